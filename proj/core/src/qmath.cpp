// Copyright 2026 The RNO Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rno/qmath.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rno {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidChannel: return "InvalidChannel";
    case ErrorCode::InvalidSubsystem: return "InvalidSubsystem";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::InvalidProblem: return "InvalidProblem";
    case ErrorCode::InvalidSolution: return "InvalidSolution";
    case ErrorCode::SolverError: return "SolverError";
    case ErrorCode::ConditionNotMet: return "ConditionNotMet";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NotFreeComponent: return "NotFreeComponent";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

int error_exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::SolverError:
      return 2;
    case ErrorCode::TooLarge:
      return 3;
    default:
      return 1;
  }
}

namespace qmath {
namespace {

// Multi-index <-> flat index helpers (first factor most significant, matching
// the Kronecker product convention).
std::vector<int> unflatten(int flat, const std::vector<int>& dims) {
  std::vector<int> idx(dims.size());
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    idx[k] = flat % dims[k];
    flat /= dims[k];
  }
  return idx;
}

int flatten(const std::vector<int>& idx, const std::vector<int>& dims) {
  int flat = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) flat = flat * dims[k] + idx[k];
  return flat;
}

void check_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::InvalidShape,
                std::string(who) + ": matrix is not square");
}

void check_dims_match(const Matrix& m, const std::vector<int>& dims,
                      const char* who) {
  check_square(m, who);
  if (product_dim(dims) != m.rows())
    throw Error(ErrorCode::InvalidShape,
                std::string(who) + ": dims do not factor the matrix size");
}

}  // namespace

int product_dim(const std::vector<int>& dims) {
  if (dims.empty())
    throw Error(ErrorCode::InvalidShape, "empty dimension list");
  int p = 1;
  for (int d : dims) {
    if (d < 1) throw Error(ErrorCode::InvalidShape, "nonpositive dimension");
    p *= d;
  }
  return p;
}

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const Matrix& m, double tol) {
  if (!is_hermitian(m, tol)) return false;
  return min_eigenvalue(m) >= -tol;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix permute_subsystems(const Matrix& m, const std::vector<int>& dims,
                          const std::vector<int>& perm) {
  check_dims_match(m, dims, "permute_subsystems");
  if (perm.size() != dims.size())
    throw Error(ErrorCode::InvalidSubsystem,
                "permutation length does not match subsystem count");
  std::vector<int> seen(dims.size(), 0);
  for (int p : perm) {
    if (p < 0 || p >= static_cast<int>(dims.size()) || seen[p]++)
      throw Error(ErrorCode::InvalidSubsystem, "invalid permutation");
  }
  const int n = static_cast<int>(m.rows());
  std::vector<int> new_dims(dims.size());
  for (std::size_t k = 0; k < perm.size(); ++k) new_dims[k] = dims[perm[k]];
  // map[old_flat] = new_flat
  std::vector<int> map(n);
  for (int f = 0; f < n; ++f) {
    std::vector<int> idx = unflatten(f, dims);
    std::vector<int> new_idx(dims.size());
    for (std::size_t k = 0; k < perm.size(); ++k) new_idx[k] = idx[perm[k]];
    map[f] = flatten(new_idx, new_dims);
  }
  Matrix out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(map[r], map[c]) = m(r, c);
  return out;
}

Matrix partial_trace(const Matrix& m, const std::vector<int>& dims,
                     const std::vector<int>& keep) {
  check_dims_match(m, dims, "partial_trace");
  for (int k : keep)
    if (k < 0 || k >= static_cast<int>(dims.size()))
      throw Error(ErrorCode::InvalidSubsystem, "partial_trace: bad index");
  if (!std::is_sorted(keep.begin(), keep.end()))
    throw Error(ErrorCode::InvalidSubsystem,
                "partial_trace: keep list must be sorted");
  std::vector<int> keep_dims, trace_dims, trace_pos;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (std::find(keep.begin(), keep.end(), static_cast<int>(k)) !=
        keep.end())
      keep_dims.push_back(dims[k]);
    else {
      trace_dims.push_back(dims[k]);
      trace_pos.push_back(static_cast<int>(k));
    }
  }
  if (keep_dims.empty())
    throw Error(ErrorCode::InvalidSubsystem, "partial_trace: keeping nothing");
  const int dk = product_dim(keep_dims);
  const int dt = trace_dims.empty() ? 1 : product_dim(trace_dims);
  Matrix out = Matrix::Zero(dk, dk);
  std::vector<int> idx(dims.size(), 0), jdx(dims.size(), 0);
  for (int r = 0; r < dk; ++r) {
    std::vector<int> ridx = unflatten(r, keep_dims);
    for (int c = 0; c < dk; ++c) {
      std::vector<int> cidx = unflatten(c, keep_dims);
      Complex acc = 0.0;
      for (int t = 0; t < dt; ++t) {
        std::vector<int> tidx =
            trace_dims.empty() ? std::vector<int>{} : unflatten(t, trace_dims);
        int kr = 0, kt = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
          const bool kept = std::find(keep.begin(), keep.end(),
                                      static_cast<int>(k)) != keep.end();
          if (kept) {
            idx[k] = ridx[kr];
            jdx[k] = cidx[kr++];
          } else {
            idx[k] = tidx[kt];
            jdx[k] = tidx[kt++];
          }
        }
        acc += m(flatten(idx, dims), flatten(jdx, dims));
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Matrix partial_transpose(const Matrix& m, const std::vector<int>& dims,
                         const std::vector<int>& transpose) {
  check_dims_match(m, dims, "partial_transpose");
  std::vector<bool> flip(dims.size(), false);
  for (int t : transpose) {
    if (t < 0 || t >= static_cast<int>(dims.size()))
      throw Error(ErrorCode::InvalidSubsystem, "partial_transpose: bad index");
    flip[t] = true;
  }
  const int n = static_cast<int>(m.rows());
  Matrix out(n, n);
  for (int r = 0; r < n; ++r) {
    std::vector<int> ridx = unflatten(r, dims);
    for (int c = 0; c < n; ++c) {
      std::vector<int> cidx = unflatten(c, dims);
      std::vector<int> nr = ridx, nc = cidx;
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (flip[k]) std::swap(nr[k], nc[k]);
      out(flatten(nr, dims), flatten(nc, dims)) = m(r, c);
    }
  }
  return out;
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const Matrix& m) {
  return hermitian_eigenvalues(m).minCoeff();
}

double trace_norm(const Matrix& m) {
  if (is_hermitian(m, 1e-10)) {
    Eigen::VectorXd ev = hermitian_eigenvalues((m + m.adjoint()) / 2.0);
    return ev.cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double sqrt_fidelity(const Matrix& rho, const Matrix& sigma) {
  check_square(rho, "sqrt_fidelity");
  if (rho.rows() != sigma.rows())
    throw Error(ErrorCode::InvalidShape, "sqrt_fidelity: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es((rho + rho.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  Matrix sqrt_rho = es.eigenvectors() *
                    ev.cwiseSqrt().asDiagonal() *
                    es.eigenvectors().adjoint();
  Matrix inner = sqrt_rho * ((sigma + sigma.adjoint()) / 2.0) * sqrt_rho;
  Eigen::VectorXd lam =
      hermitian_eigenvalues((inner + inner.adjoint()) / 2.0).cwiseMax(0.0);
  return lam.cwiseSqrt().sum();
}

double dmax(const Matrix& rho, const Matrix& sigma) {
  check_square(rho, "dmax");
  if (rho.rows() != sigma.rows())
    throw Error(ErrorCode::InvalidShape, "dmax: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es((sigma + sigma.adjoint()) / 2.0);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double lmax = std::max(ev.maxCoeff(), 0.0);
  const double support_tol = std::max(1e-10 * std::max(lmax, 1.0), 1e-14);
  std::vector<int> supp;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > support_tol) supp.push_back(i);
  if (supp.empty()) return std::numeric_limits<double>::infinity();
  // weight of rho outside supp(sigma)
  double outside = 0.0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > support_tol) continue;
    const Vector v = es.eigenvectors().col(i);
    outside += std::real((v.adjoint() * rho * v)(0, 0));
  }
  if (outside > 1e-10) return std::numeric_limits<double>::infinity();
  Matrix p(rho.rows(), supp.size());
  Eigen::VectorXd inv_sqrt(supp.size());
  for (std::size_t k = 0; k < supp.size(); ++k) {
    p.col(k) = es.eigenvectors().col(supp[k]);
    inv_sqrt(k) = 1.0 / std::sqrt(ev(supp[k]));
  }
  Matrix b = inv_sqrt.asDiagonal() * (p.adjoint() * rho * p) *
             inv_sqrt.asDiagonal();
  const double top = hermitian_eigenvalues((b + b.adjoint()) / 2.0).maxCoeff();
  return std::log2(std::max(top, 1e-300));
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(Matrix m, std::vector<int> d)
    : mat(std::move(m)), dims(std::move(d)) {
  if (product_dim(dims) != mat.rows() || mat.rows() != mat.cols())
    throw Error(ErrorCode::InvalidShape,
                "density matrix dims do not factor its size");
  if (!is_hermitian(mat, 1e-9))
    throw Error(ErrorCode::InvalidState, "density matrix is not Hermitian");
  if (std::abs(mat.trace().real() - 1.0) > 1e-9 ||
      std::abs(mat.trace().imag()) > 1e-9)
    throw Error(ErrorCode::InvalidState, "density matrix trace is not one");
  if (min_eigenvalue(mat) < -1e-9)
    throw Error(ErrorCode::InvalidState, "density matrix is not PSD");
}

DensityMatrix DensityMatrix::from_pure(const Vector& amplitudes,
                                       std::vector<int> dims) {
  const double n2 = amplitudes.squaredNorm();
  if (n2 <= 0.0)
    throw Error(ErrorCode::InvalidState, "zero amplitude vector");
  Vector v = amplitudes / std::sqrt(n2);
  return DensityMatrix(v * v.adjoint(), std::move(dims));
}

Vector basis_vector(int dim, int index) {
  if (index < 0 || index >= dim)
    throw Error(ErrorCode::InvalidRequest, "basis index out of range");
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return v;
}

Vector max_entangled_vector(int d) {
  Vector v = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = 1.0 / std::sqrt(double(d));
  return v;
}

DensityMatrix max_entangled_state(int d) {
  return DensityMatrix::from_pure(max_entangled_vector(d), {d, d});
}

DensityMatrix maximally_mixed(std::vector<int> dims) {
  const int d = product_dim(dims);
  return DensityMatrix(Matrix::Identity(d, d) / double(d), std::move(dims));
}

DensityMatrix werner_state(double w) {
  if (w < 0.0 || w > 1.0)
    throw Error(ErrorCode::InvalidRequest, "werner weight outside [0,1]");
  const Matrix phi = max_entangled_state(2).mat;
  Matrix m = w * phi + (1.0 - w) * Matrix::Identity(4, 4) / 4.0;
  return DensityMatrix(m, {2, 2});
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

Matrix kraus_to_choi(const std::vector<Matrix>& kraus, int in_dim,
                     int out_dim) {
  if (kraus.empty())
    throw Error(ErrorCode::InvalidChannel, "empty Kraus list");
  Matrix j = Matrix::Zero(in_dim * out_dim, in_dim * out_dim);
  Vector phi(in_dim * out_dim);
  for (const Matrix& k : kraus) {
    if (k.rows() != out_dim || k.cols() != in_dim)
      throw Error(ErrorCode::InvalidChannel, "Kraus operator shape mismatch");
    // |phi_K> = sum_i |i> (x) K|i>
    for (int i = 0; i < in_dim; ++i)
      for (int a = 0; a < out_dim; ++a) phi(i * out_dim + a) = k(a, i);
    j.noalias() += phi * phi.adjoint();
  }
  return j;
}

std::vector<Matrix> choi_to_kraus(const Matrix& choi, int in_dim, int out_dim,
                                  double tol) {
  if (choi.rows() != in_dim * out_dim || choi.cols() != choi.rows())
    throw Error(ErrorCode::InvalidChannel, "Choi matrix shape mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es((choi + choi.adjoint()) / 2.0);
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, lmax))
    throw Error(ErrorCode::InvalidChannel, "Choi matrix is not PSD");
  std::vector<Matrix> kraus;
  for (int v = 0; v < es.eigenvalues().size(); ++v) {
    const double lam = es.eigenvalues()(v);
    if (lam <= std::max(tol, tol * lmax)) continue;
    Matrix k(out_dim, in_dim);
    for (int i = 0; i < in_dim; ++i)
      for (int a = 0; a < out_dim; ++a)
        k(a, i) = std::sqrt(lam) * es.eigenvectors()(i * out_dim + a, v);
    kraus.push_back(std::move(k));
  }
  if (kraus.empty())
    throw Error(ErrorCode::InvalidChannel, "Choi matrix is numerically zero");
  return kraus;
}

Matrix Channel::choi_matrix(ChoiNorm norm) const {
  if (norm == ChoiNorm::TraceDIn) return choi;
  return choi / double(in_dim());
}

Channel Channel::from_kraus(std::vector<int> in_dims,
                            std::vector<int> out_dims,
                            std::vector<Matrix> kraus) {
  Channel ch;
  ch.in_dims = std::move(in_dims);
  ch.out_dims = std::move(out_dims);
  const int di = ch.in_dim(), dout = ch.out_dim();
  if (static_cast<long long>(di) * dout > kMaxChoiSide)
    throw Error(ErrorCode::TooLarge, "channel Choi side exceeds guard");
  Matrix acc = Matrix::Zero(di, di);
  for (const Matrix& k : kraus) {
    if (k.rows() != dout || k.cols() != di)
      throw Error(ErrorCode::InvalidChannel, "Kraus operator shape mismatch");
    acc.noalias() += k.adjoint() * k;
  }
  if ((acc - Matrix::Identity(di, di)).cwiseAbs().maxCoeff() > 1e-9)
    throw Error(ErrorCode::InvalidChannel,
                "Kraus operators do not satisfy completeness");
  ch.kraus = std::move(kraus);
  ch.choi = kraus_to_choi(ch.kraus, di, dout);
  return ch;
}

Channel Channel::from_choi(std::vector<int> in_dims, std::vector<int> out_dims,
                           const Matrix& choi, ChoiNorm norm) {
  Channel ch;
  ch.in_dims = std::move(in_dims);
  ch.out_dims = std::move(out_dims);
  const int di = ch.in_dim(), dout = ch.out_dim();
  if (static_cast<long long>(di) * dout > kMaxChoiSide)
    throw Error(ErrorCode::TooLarge, "channel Choi side exceeds guard");
  if (choi.rows() != di * dout || choi.cols() != choi.rows())
    throw Error(ErrorCode::InvalidChannel, "Choi matrix shape mismatch");
  ch.choi = (norm == ChoiNorm::TraceDIn) ? choi : Matrix(choi * double(di));
  if (!is_hermitian(ch.choi, 1e-9))
    throw Error(ErrorCode::InvalidChannel, "Choi matrix is not Hermitian");
  if (min_eigenvalue(ch.choi) < -1e-9)
    throw Error(ErrorCode::InvalidChannel, "Choi matrix is not PSD");
  const Matrix red =
      partial_trace(ch.choi, {di, dout}, {0});
  if ((red - Matrix::Identity(di, di)).cwiseAbs().maxCoeff() > 1e-9)
    throw Error(ErrorCode::InvalidChannel,
                "Choi partial trace is not the identity");
  return ch;
}

Matrix apply_channel_matrix(const Channel& ch, const Matrix& m) {
  const int di = ch.in_dim(), dout = ch.out_dim();
  if (m.rows() != di || m.cols() != di)
    throw Error(ErrorCode::InvalidShape, "apply_channel: input size mismatch");
  if (!ch.kraus.empty()) {
    Matrix out = Matrix::Zero(dout, dout);
    for (const Matrix& k : ch.kraus) out.noalias() += k * m * k.adjoint();
    return out;
  }
  // E(m) = tr_in[(m^T (x) I) J] = sum_ij m_ij E(|i><j|)
  Matrix out = Matrix::Zero(dout, dout);
  for (int a = 0; a < dout; ++a)
    for (int b = 0; b < dout; ++b) {
      Complex acc = 0.0;
      for (int i = 0; i < di; ++i)
        for (int j = 0; j < di; ++j)
          acc += m(i, j) * ch.choi(i * dout + a, j * dout + b);
      out(a, b) = acc;
    }
  return out;
}

Matrix adjoint_apply(const Channel& ch, const Matrix& x) {
  const int di = ch.in_dim(), dout = ch.out_dim();
  if (x.rows() != dout || x.cols() != dout)
    throw Error(ErrorCode::InvalidShape, "adjoint_apply: size mismatch");
  if (!ch.kraus.empty()) {
    Matrix out = Matrix::Zero(di, di);
    for (const Matrix& k : ch.kraus) out.noalias() += k.adjoint() * x * k;
    return out;
  }
  // tr[E(rho) X] = tr[rho Eadj(X)] forces Eadj(X)_ij = sum_ab conj(J_{(i,a),(j,b)}) X_ab
  Matrix out = Matrix::Zero(di, di);
  for (int i = 0; i < di; ++i)
    for (int j = 0; j < di; ++j) {
      Complex acc = 0.0;
      for (int a = 0; a < dout; ++a)
        for (int b = 0; b < dout; ++b)
          acc += std::conj(ch.choi(i * dout + a, j * dout + b)) * x(a, b);
      out(i, j) = acc;
    }
  return out;
}

DensityMatrix apply_channel(const Channel& ch, const DensityMatrix& rho,
                            const std::vector<int>& subsystems) {
  if (subsystems.empty())
    throw Error(ErrorCode::InvalidSubsystem, "apply_channel: no subsystems");
  std::vector<int> subs = subsystems;
  std::sort(subs.begin(), subs.end());
  if (std::adjacent_find(subs.begin(), subs.end()) != subs.end())
    throw Error(ErrorCode::InvalidSubsystem, "apply_channel: repeated index");
  for (int s : subs)
    if (s < 0 || s >= static_cast<int>(rho.dims.size()))
      throw Error(ErrorCode::InvalidSubsystem, "apply_channel: bad index");
  int sub_dim = 1;
  for (int s : subs) sub_dim *= rho.dims[s];
  if (sub_dim != ch.in_dim())
    throw Error(ErrorCode::InvalidShape,
                "apply_channel: channel input does not match subsystems");

  // Permute targets to the front, apply E (x) id, permute back.
  std::vector<int> perm = subs;
  std::vector<int> rest;
  for (int k = 0; k < static_cast<int>(rho.dims.size()); ++k)
    if (std::find(subs.begin(), subs.end(), k) == subs.end()) {
      perm.push_back(k);
      rest.push_back(rho.dims[k]);
    }
  Matrix front = permute_subsystems(rho.mat, rho.dims, perm);

  const int dr = rest.empty() ? 1 : product_dim(rest);
  std::vector<Matrix> kraus =
      ch.kraus.empty() ? choi_to_kraus(ch.choi, ch.in_dim(), ch.out_dim())
                       : ch.kraus;
  const Matrix id_rest = Matrix::Identity(dr, dr);
  Matrix out = Matrix::Zero(ch.out_dim() * dr, ch.out_dim() * dr);
  for (const Matrix& k : kraus) {
    const Matrix kf = kron(k, id_rest);
    out.noalias() += kf * front * kf.adjoint();
  }

  // Final ordering: channel outputs first, untouched factors after, then
  // rotate the output block to where the first touched subsystem sat.
  std::vector<int> mid_dims = ch.out_dims;
  mid_dims.insert(mid_dims.end(), rest.begin(), rest.end());
  const int nout = static_cast<int>(ch.out_dims.size());
  const int first = subs.front();
  // Count untouched subsystems left of `first`.
  int left = 0;
  for (int k = 0; k < first; ++k)
    if (std::find(subs.begin(), subs.end(), k) == subs.end()) ++left;
  std::vector<int> back_perm;
  for (int k = 0; k < left; ++k) back_perm.push_back(nout + k);
  for (int k = 0; k < nout; ++k) back_perm.push_back(k);
  for (int k = left; k < static_cast<int>(rest.size()); ++k)
    back_perm.push_back(nout + k);
  Matrix fin = permute_subsystems(out, mid_dims, back_perm);
  std::vector<int> fin_dims;
  for (int k = 0; k < left; ++k) fin_dims.push_back(rest[k]);
  fin_dims.insert(fin_dims.end(), ch.out_dims.begin(), ch.out_dims.end());
  for (int k = left; k < static_cast<int>(rest.size()); ++k)
    fin_dims.push_back(rest[k]);
  return DensityMatrix(std::move(fin), std::move(fin_dims));
}

Channel identity_channel(std::vector<int> dims) {
  const int d = product_dim(dims);
  return Channel::from_kraus(dims, dims, {Matrix::Identity(d, d)});
}

Channel unitary_channel(const Matrix& u) {
  check_square(u, "unitary_channel");
  const int d = static_cast<int>(u.rows());
  if ((u.adjoint() * u - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9)
    throw Error(ErrorCode::InvalidChannel, "matrix is not unitary");
  return Channel::from_kraus({d}, {d}, {u});
}

Channel dephasing_channel(int d) {
  std::vector<Matrix> kraus;
  for (int i = 0; i < d; ++i) {
    Matrix k = Matrix::Zero(d, d);
    k(i, i) = 1.0;
    kraus.push_back(std::move(k));
  }
  return Channel::from_kraus({d}, {d}, std::move(kraus));
}

Channel depolarizing_channel(int d, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw Error(ErrorCode::InvalidRequest, "depolarizing weight outside [0,1]");
  // Choi: lambda * J_id + (1-lambda) * I_in (x) I_out / d
  Matrix j_id = kraus_to_choi({Matrix::Identity(d, d)}, d, d);
  Matrix j = lambda * j_id +
             (1.0 - lambda) * Matrix::Identity(d * d, d * d) / double(d);
  return Channel::from_choi({d}, {d}, j);
}

Channel replacement_channel(const DensityMatrix& sigma,
                            std::vector<int> in_dims) {
  const int di = product_dim(in_dims);
  const int dout = sigma.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.mat);
  std::vector<Matrix> kraus;
  for (int v = 0; v < dout; ++v) {
    const double lam = std::max(es.eigenvalues()(v), 0.0);
    if (lam <= 1e-15) continue;
    for (int i = 0; i < di; ++i) {
      Matrix k = std::sqrt(lam) * es.eigenvectors().col(v) *
                 basis_vector(di, i).adjoint();
      kraus.push_back(std::move(k));
    }
  }
  return Channel::from_kraus(std::move(in_dims), sigma.dims, std::move(kraus));
}

Channel pauli_channel(const std::vector<double>& probs) {
  if (probs.size() != 4)
    throw Error(ErrorCode::InvalidRequest, "pauli_channel needs 4 weights");
  double s = 0.0;
  for (double p : probs) {
    if (p < -1e-12)
      throw Error(ErrorCode::InvalidRequest, "negative Pauli weight");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidRequest, "Pauli weights must sum to one");
  Matrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  z << 1, 0, 0, -1;
  const Matrix paulis[4] = {Matrix::Identity(2, 2), x, y, z};
  std::vector<Matrix> kraus;
  for (int a = 0; a < 4; ++a)
    if (probs[a] > 1e-15) kraus.push_back(std::sqrt(probs[a]) * paulis[a]);
  return Channel::from_kraus({2}, {2}, std::move(kraus));
}

Channel tensor_channels(const Channel& a, const Channel& b) {
  std::vector<Matrix> ka =
      a.kraus.empty() ? choi_to_kraus(a.choi, a.in_dim(), a.out_dim())
                      : a.kraus;
  std::vector<Matrix> kb =
      b.kraus.empty() ? choi_to_kraus(b.choi, b.in_dim(), b.out_dim())
                      : b.kraus;
  std::vector<Matrix> kraus;
  kraus.reserve(ka.size() * kb.size());
  for (const Matrix& k1 : ka)
    for (const Matrix& k2 : kb) kraus.push_back(kron(k1, k2));
  std::vector<int> in_dims = a.in_dims, out_dims = a.out_dims;
  in_dims.insert(in_dims.end(), b.in_dims.begin(), b.in_dims.end());
  out_dims.insert(out_dims.end(), b.out_dims.begin(), b.out_dims.end());
  return Channel::from_kraus(std::move(in_dims), std::move(out_dims),
                             std::move(kraus));
}

Channel compose_channels(const Channel& b, const Channel& a) {
  if (a.out_dim() != b.in_dim())
    throw Error(ErrorCode::InvalidChannel, "composition dimension mismatch");
  if (!a.kraus.empty() && !b.kraus.empty() &&
      a.kraus.size() * b.kraus.size() <= 256) {
    std::vector<Matrix> kraus;
    for (const Matrix& kb : b.kraus)
      for (const Matrix& ka : a.kraus) kraus.push_back(kb * ka);
    return Channel::from_kraus(a.in_dims, b.out_dims, std::move(kraus));
  }
  // Assemble the composite Choi by feeding matrix units through both maps.
  const int di = a.in_dim(), dout = b.out_dim();
  Matrix j = Matrix::Zero(di * dout, di * dout);
  for (int i = 0; i < di; ++i)
    for (int jcol = 0; jcol < di; ++jcol) {
      Matrix unit = Matrix::Zero(di, di);
      unit(i, jcol) = 1.0;
      Matrix out = apply_channel_matrix(b, apply_channel_matrix(a, unit));
      for (int r = 0; r < dout; ++r)
        for (int c = 0; c < dout; ++c)
          j(i * dout + r, jcol * dout + c) = out(r, c);
    }
  return Channel::from_choi(a.in_dims, b.out_dims, j);
}

Channel mix_channels(const std::vector<Channel>& channels,
                     const std::vector<double>& weights) {
  if (channels.empty() || channels.size() != weights.size())
    throw Error(ErrorCode::InvalidRequest, "mix_channels: size mismatch");
  double s = 0.0;
  for (double w : weights) {
    if (w < -1e-12)
      throw Error(ErrorCode::InvalidRequest, "mix_channels: negative weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidRequest, "mix_channels: weights sum != 1");
  Matrix j = Matrix::Zero(channels[0].choi.rows(), channels[0].choi.cols());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    if (channels[k].in_dim() != channels[0].in_dim() ||
        channels[k].out_dim() != channels[0].out_dim())
      throw Error(ErrorCode::InvalidChannel, "mix_channels: dim mismatch");
    j += weights[k] * channels[k].choi;
  }
  return Channel::from_choi(channels[0].in_dims, channels[0].out_dims, j);
}

Matrix polish_choi(const Matrix& choi, int in_dim, int out_dim,
                   const std::vector<std::pair<int, int>>& zero_mask,
                   int sweeps) {
  Matrix j = (choi + choi.adjoint()) / 2.0;
  const Matrix id_in = Matrix::Identity(in_dim, in_dim);
  for (int it = 0; it < sweeps; ++it) {
    // 1) linear structure: masked entries -> 0
    for (const auto& [r, c] : zero_mask) {
      j(r, c) = 0.0;
      j(c, r) = 0.0;
    }
    // 2) trace-preserving affine projection
    Matrix defect = id_in - partial_trace(j, {in_dim, out_dim}, {0});
    j += kron(defect / double(out_dim), Matrix::Identity(out_dim, out_dim));
    // 3) PSD projection
    Eigen::SelfAdjointEigenSolver<Matrix> es((j + j.adjoint()) / 2.0);
    const double neg = es.eigenvalues().minCoeff();
    double mask_viol = 0.0;
    for (const auto& [r, c] : zero_mask)
      mask_viol = std::max(mask_viol, std::abs(j(r, c)));
    if (neg >= -1e-13 && mask_viol <= 1e-13) {
      Matrix red = partial_trace(j, {in_dim, out_dim}, {0});
      if ((red - id_in).cwiseAbs().maxCoeff() <= 1e-12) break;
    }
    j = es.eigenvectors() *
        es.eigenvalues().cwiseMax(0.0).asDiagonal() *
        es.eigenvectors().adjoint();
  }
  return (j + j.adjoint()) / 2.0;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

double Rng::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(gen_);
}

double Rng::gaussian() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(gen_);
}

int Rng::uniform_int(int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  return dist(gen_);
}

Matrix sample_ginibre(int rows, int cols, Rng& rng) {
  Matrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      g(i, j) = Complex(rng.gaussian(), rng.gaussian());
  return g;
}

Vector sample_pure_vector(int dim, Rng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
  return v / v.norm();
}

DensityMatrix sample_pure_state(std::vector<int> dims, Rng& rng) {
  const int d = product_dim(dims);
  return DensityMatrix::from_pure(sample_pure_vector(d, rng), std::move(dims));
}

DensityMatrix sample_state(std::vector<int> dims, Rng& rng) {
  const int d = product_dim(dims);
  Matrix g = sample_ginibre(d, d, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix((rho + rho.adjoint()) / 2.0, std::move(dims));
}

Matrix sample_unitary(int dim, Rng& rng) {
  Matrix g = sample_ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    Complex d = r(i, i);
    q.col(i) *= (std::abs(d) > 1e-300) ? d / std::abs(d) : 1.0;
  }
  return q;
}

Channel sample_channel(std::vector<int> in_dims, std::vector<int> out_dims,
                       int kraus_count, Rng& rng) {
  const int di = product_dim(in_dims), dout = product_dim(out_dims);
  if (kraus_count < 1 || kraus_count > di * dout)
    throw Error(ErrorCode::InvalidRequest, "bad Kraus count");
  // Random isometry H_in -> H_out (x) H_env via QR.
  Matrix g = sample_ginibre(dout * kraus_count, di, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() *
             Matrix::Identity(dout * kraus_count, di);
  std::vector<Matrix> kraus(kraus_count, Matrix::Zero(dout, di));
  for (int e = 0; e < kraus_count; ++e)
    for (int a = 0; a < dout; ++a)
      for (int i = 0; i < di; ++i) kraus[e](a, i) = q(a * kraus_count + e, i);
  return Channel::from_kraus(std::move(in_dims), std::move(out_dims),
                             std::move(kraus));
}

std::vector<double> sample_simplex(int n, Rng& rng) {
  std::vector<double> w(n);
  double s = 0.0;
  for (double& x : w) {
    x = -std::log(std::max(rng.uniform(), 1e-300));
    s += x;
  }
  for (double& x : w) x /= s;
  return w;
}

SampledObject sample_object(const std::string& kind, std::vector<int> dims,
                            std::uint64_t seed) {
  Rng rng(seed);
  SampledObject obj;
  if (kind == "state") {
    obj.state = sample_state(std::move(dims), rng);
  } else if (kind == "pure_state") {
    obj.state = sample_pure_state(std::move(dims), rng);
  } else if (kind == "unitary") {
    obj.unitary = sample_unitary(product_dim(dims), rng);
  } else if (kind == "channel") {
    obj.channel = sample_channel(dims, dims, 3, rng);
  } else {
    throw Error(ErrorCode::InvalidRequest, "unsupported sample kind: " + kind);
  }
  return obj;
}

}  // namespace qmath
}  // namespace rno
