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

#include "rno/freesets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rno::freesets {

using namespace rno::qmath;

const char* membership_name(Membership verdict) {
  switch (verdict) {
    case Membership::Free: return "free";
    case Membership::NotFree: return "not_free";
    case Membership::NecessaryOnlyPass: return "necessary_checks_pass";
  }
  return "unknown";
}

const char* channel_verdict_name(ChannelVerdict verdict) {
  switch (verdict) {
    case ChannelVerdict::Free: return "free";
    case ChannelVerdict::NotFree: return "not_free";
    case ChannelVerdict::NotFalsified: return "not_falsified";
  }
  return "unknown";
}

FreeSetModel FreeSetModel::incoherent(int d) {
  if (d < 2) throw Error(ErrorCode::InvalidRequest, "incoherent model: d < 2");
  FreeSetModel m;
  m.kind = FreeSetKind::Incoherent;
  m.factor_dims = {d};
  return m;
}

FreeSetModel FreeSetModel::separable_ppt(int da, int db) {
  if (da < 2 || db < 2)
    throw Error(ErrorCode::InvalidRequest, "separable model: local dim < 2");
  FreeSetModel m;
  m.kind = FreeSetKind::SeparablePpt;
  m.factor_dims = {da, db};
  return m;
}

FreeSetModel FreeSetModel::tensor_power(int n) const {
  if (n < 1) throw Error(ErrorCode::InvalidRequest, "tensor power: n < 1");
  FreeSetModel m = *this;
  m.copies = copies * n;
  return m;
}

std::vector<int> FreeSetModel::state_dims() const {
  std::vector<int> dims;
  for (int c = 0; c < copies; ++c)
    dims.insert(dims.end(), factor_dims.begin(), factor_dims.end());
  return dims;
}

int FreeSetModel::dim() const { return product_dim(state_dims()); }

bool FreeSetModel::membership_exact() const {
  if (kind == FreeSetKind::Incoherent) return true;
  return copies == 1 && factor_dims[0] * factor_dims[1] <= 6;
}

std::string FreeSetModel::name() const {
  std::ostringstream os;
  if (kind == FreeSetKind::Incoherent) {
    os << "incoherent(" << factor_dims[0] << ")";
  } else {
    os << "separable_ppt(" << factor_dims[0] << "x" << factor_dims[1] << ")";
  }
  if (copies > 1) os << "^" << copies;
  return os.str();
}

std::vector<std::vector<int>> FreeSetModel::pt_subsets() const {
  if (kind == FreeSetKind::Incoherent) return {};
  const int nf = 2 * copies;
  std::vector<std::vector<int>> subsets;
  // All nonempty subsets of {1, ..., nf-1}; omitting factor 0 removes the
  // complement of every listed subset, which has the same spectrum test.
  for (unsigned mask = 1; mask < (1u << (nf - 1)); ++mask) {
    std::vector<int> subset;
    for (int k = 1; k < nf; ++k)
      if (mask & (1u << (k - 1))) subset.push_back(k);
    subsets.push_back(std::move(subset));
  }
  return subsets;
}

MembershipReport FreeSetModel::membership(const DensityMatrix& rho,
                                          double tol) const {
  if (rho.dim() != dim())
    throw Error(ErrorCode::InvalidShape, "membership: dimension mismatch");
  MembershipReport report;
  report.exact = membership_exact();
  if (kind == FreeSetKind::Incoherent) {
    double off = 0.0;
    for (int r = 0; r < rho.dim(); ++r)
      for (int c = 0; c < rho.dim(); ++c)
        if (r != c) off = std::max(off, std::abs(rho.mat(r, c)));
    report.margin = -off;
    report.exact = true;
    if (off <= tol) {
      report.verdict = Membership::Free;
      report.detail = "all off-diagonal entries vanish";
    } else {
      report.verdict = Membership::NotFree;
      std::ostringstream os;
      os << "largest off-diagonal magnitude " << off;
      report.detail = os.str();
    }
    return report;
  }
  const std::vector<int> dims = state_dims();
  double worst = 0.0;
  std::vector<int> worst_subset;
  for (const std::vector<int>& subset : pt_subsets()) {
    const Matrix pt = partial_transpose(rho.mat, dims, subset);
    const double eig = min_eigenvalue(pt);
    if (eig < worst) {
      worst = eig;
      worst_subset = subset;
    }
  }
  report.margin = worst;
  if (worst < -tol) {
    report.verdict = Membership::NotFree;
    report.exact = true;  // a negative transpose eigenvalue is conclusive
    std::ostringstream os;
    os << "partial transpose over factors {";
    for (std::size_t k = 0; k < worst_subset.size(); ++k)
      os << (k ? "," : "") << worst_subset[k];
    os << "} has eigenvalue " << worst;
    report.detail = os.str();
  } else if (report.exact) {
    report.verdict = Membership::Free;
    report.detail = "positive partial transpose (conclusive at this size)";
  } else {
    report.verdict = Membership::NecessaryOnlyPass;
    report.detail =
        "all transpose checks pass (necessary but not sufficient here)";
  }
  return report;
}

bool FreeSetModel::is_free(const DensityMatrix& rho, double tol) const {
  return membership(rho, tol).verdict != Membership::NotFree;
}

DensityMatrix FreeSetModel::sample_free(Rng& rng) const {
  const std::vector<int> dims = state_dims();
  if (kind == FreeSetKind::Incoherent) {
    const int d = dim();
    std::vector<double> w = sample_simplex(d, rng);
    Matrix m = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = w[i];
    return DensityMatrix(m, dims);
  }
  const int da = factor_dims[0], db = factor_dims[1];
  Matrix copy_acc;
  Matrix full;
  for (int c = 0; c < copies; ++c) {
    const int terms = da * db + 2;
    std::vector<double> w = sample_simplex(terms, rng);
    Matrix mix = Matrix::Zero(da * db, da * db);
    for (int k = 0; k < terms; ++k) {
      Vector a = sample_pure_vector(da, rng);
      Vector b = sample_pure_vector(db, rng);
      mix += w[k] * kron(Matrix(a * a.adjoint()), Matrix(b * b.adjoint()));
    }
    full = (c == 0) ? mix : kron(full, mix);
  }
  return DensityMatrix((full + full.adjoint()) / 2.0, dims);
}

DensityMatrix FreeSetModel::sample_not_free(Rng& rng, double margin) const {
  const std::vector<int> dims = state_dims();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    DensityMatrix cand = sample_pure_state(dims, rng);
    MembershipReport rep = membership(cand);
    if (rep.verdict != Membership::NotFree) continue;
    if (kind == FreeSetKind::Incoherent) {
      if (-rep.margin >= margin) return cand;
    } else if (rep.margin <= -margin) {
      return cand;
    }
  }
  throw Error(ErrorCode::SolverError,
              "could not sample a resourceful state at the requested margin");
}

namespace {

// One primitive member of the incoherence-preserving family.
Channel mio_primitive(const FreeSetModel& model, Rng& rng) {
  const int d = model.dim();
  const std::vector<int> dims = model.state_dims();
  switch (rng.uniform_int(0, 4)) {
    case 0: {
      // Fully dephasing any channel leaves only diagonal outputs.
      Channel raw = sample_channel(dims, dims, 2, rng);
      return compose_channels(dephasing_channel(d), raw);
    }
    case 1: {
      // Diagonal-phase unitaries fix every basis projector.
      Matrix u = Matrix::Zero(d, d);
      for (int i = 0; i < d; ++i)
        u(i, i) = std::exp(Complex(0.0, rng.uniform(0.0, 6.283185307179586)));
      Channel ch = unitary_channel(u);
      ch.in_dims = dims;
      ch.out_dims = dims;
      return ch;
    }
    case 2: {
      // Basis permutations.
      std::vector<int> perm(d);
      for (int i = 0; i < d; ++i) perm[i] = i;
      for (int i = d - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_int(0, i)]);
      Matrix u = Matrix::Zero(d, d);
      for (int i = 0; i < d; ++i) u(perm[i], i) = 1.0;
      Channel ch = unitary_channel(u);
      ch.in_dims = dims;
      ch.out_dims = dims;
      return ch;
    }
    case 3: {
      // Replacement by a fixed diagonal state.
      return replacement_channel(model.sample_free(rng), dims);
    }
    default:
      return compose_channels(dephasing_channel(d), identity_channel(dims));
  }
}

Channel separable_primitive(const FreeSetModel& model, Rng& rng) {
  const std::vector<int> dims = model.state_dims();
  const int da = model.factor_dims[0], db = model.factor_dims[1];
  switch (rng.uniform_int(0, 3)) {
    case 0: {
      // Independent local unitaries on every factor.
      Matrix u = Matrix::Identity(1, 1);
      for (std::size_t k = 0; k < dims.size(); ++k)
        u = kron(u, sample_unitary(dims[k], rng));
      Channel ch = unitary_channel(u);
      ch.in_dims = dims;
      ch.out_dims = dims;
      return ch;
    }
    case 1: {
      if (da != db) break;
      // Swap the two halves of one copy.
      const int copy = rng.uniform_int(0, model.copies - 1);
      const int d = model.dim();
      Matrix swap_u = Matrix::Zero(d, d);
      for (int col = 0; col < d; ++col) {
        int rem = col;
        std::vector<int> idx(dims.size());
        for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
          idx[k] = rem % dims[k];
          rem /= dims[k];
        }
        std::swap(idx[2 * copy], idx[2 * copy + 1]);
        int row = 0;
        for (std::size_t k = 0; k < dims.size(); ++k)
          row = row * dims[k] + idx[k];
        swap_u(row, col) = 1.0;
      }
      Channel ch = unitary_channel(swap_u);
      ch.in_dims = dims;
      ch.out_dims = dims;
      return ch;
    }
    case 2:
      return replacement_channel(model.sample_free(rng), dims);
    default:
      break;
  }
  // Local dephasing on every factor preserves separability.
  Channel deph = dephasing_channel(dims[0]);
  for (std::size_t k = 1; k < dims.size(); ++k)
    deph = tensor_channels(deph, dephasing_channel(dims[k]));
  deph.in_dims = dims;
  deph.out_dims = dims;
  return deph;
}

Channel mio_channel(const FreeSetModel& model, Rng& rng, int depth) {
  auto primitive = [&](Rng& r) {
    return model.kind == FreeSetKind::Incoherent ? mio_primitive(model, r)
                                                 : separable_primitive(model, r);
  };
  const int shape = depth > 0 ? rng.uniform_int(0, 3) : 0;
  switch (shape) {
    case 1: {
      Channel a = mio_channel(model, rng, depth - 1);
      Channel b = mio_channel(model, rng, depth - 1);
      const double w = rng.uniform(0.1, 0.9);
      return mix_channels({a, b}, {w, 1.0 - w});
    }
    case 2: {
      Channel a = mio_channel(model, rng, depth - 1);
      Channel b = mio_channel(model, rng, depth - 1);
      return compose_channels(b, a);
    }
    default:
      return primitive(rng);
  }
}

}  // namespace

Channel FreeSetModel::sample_free_channel(Rng& rng) const {
  return mio_channel(*this, rng, 1);
}

Vector FreeSetModel::max_resource_vector(int n) const {
  if (n < 1)
    throw Error(ErrorCode::InvalidRequest,
                "maximally resourceful state needs n >= 1 copies");
  Vector per_copy;
  if (kind == FreeSetKind::Incoherent) {
    const int d = factor_dims[0];
    per_copy = Vector::Constant(d, Complex(1.0 / std::sqrt(double(d)), 0.0));
  } else {
    const int da = factor_dims[0], db = factor_dims[1];
    const int dmin = std::min(da, db);
    per_copy = Vector::Zero(da * db);
    for (int i = 0; i < dmin; ++i)
      per_copy(i * db + i) = Complex(1.0 / std::sqrt(double(dmin)), 0.0);
  }
  Vector full = Vector::Constant(1, Complex(1.0, 0.0));
  for (int c = 0; c < copies * n; ++c) {
    Vector next(full.size() * per_copy.size());
    for (int i = 0; i < full.size(); ++i)
      next.segment(i * per_copy.size(), per_copy.size()) =
          full(i) * per_copy;
    full = std::move(next);
  }
  return full;
}

DensityMatrix FreeSetModel::max_resource_state(int n) const {
  const Vector v = max_resource_vector(n);
  return DensityMatrix::from_pure(v, tensor_power(n).state_dims());
}

double FreeSetModel::overlap_bound_c(int n) const {
  if (n < 1)
    throw Error(ErrorCode::InvalidRequest, "overlap bound needs n >= 1");
  const int base = kind == FreeSetKind::Incoherent
                       ? factor_dims[0]
                       : std::min(factor_dims[0], factor_dims[1]);
  return std::pow(double(base), -double(copies) * double(n));
}

double FreeSetModel::overlap_bound_c_inverse(double y) const {
  if (!(y > 0.0) || y > 1.0)
    throw Error(ErrorCode::InvalidRequest,
                "overlap-bound inverse needs y in (0, 1]");
  const int base = kind == FreeSetKind::Incoherent
                       ? factor_dims[0]
                       : std::min(factor_dims[0], factor_dims[1]);
  return std::log(1.0 / y) / (std::log(double(base)) * double(copies));
}

ChannelCertReport FreeSetModel::is_rno_channel(const Channel& ch, double tol,
                                               int samples,
                                               std::uint64_t seed) const {
  if (ch.in_dim() != dim() || ch.out_dim() != dim())
    throw Error(ErrorCode::InvalidShape,
                "channel freeness: channel is not square over the model space");
  return certify_channel_free(*this, *this, ch, tol, samples, seed);
}

double FreeSetModel::max_free_overlap(const Vector& psi, Rng& rng,
                                      int restarts) const {
  if (psi.size() != dim())
    throw Error(ErrorCode::InvalidShape, "overlap: dimension mismatch");
  if (kind == FreeSetKind::Incoherent) {
    double best = 0.0;
    for (int i = 0; i < psi.size(); ++i)
      best = std::max(best, std::abs(psi(i)));
    return best;
  }
  const std::vector<int> dims = state_dims();
  if (copies == 1) {
    // Exact: the largest Schmidt coefficient of the dA x dB reshape.
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        reshaped(psi.data(), factor_dims[0], factor_dims[1]);
    Eigen::JacobiSVD<Matrix> svd(reshaped);
    return svd.singularValues()(0);
  }
  // Multi-start alternating maximization over product vectors; a certified
  // lower bound on the true maximum overlap.
  const int nf = static_cast<int>(dims.size());
  double best = 0.0;
  for (int start = 0; start < restarts; ++start) {
    std::vector<Vector> vecs(nf);
    for (int k = 0; k < nf; ++k) vecs[k] = sample_pure_vector(dims[k], rng);
    double prev = 0.0;
    for (int sweep = 0; sweep < 200; ++sweep) {
      for (int k = 0; k < nf; ++k) {
        // Contract psi against all factors except k.
        Vector contracted = Vector::Zero(dims[k]);
        for (int flat = 0; flat < psi.size(); ++flat) {
          int rem = flat;
          Complex coeff = 1.0;
          int k_index = 0;
          for (int f = nf - 1; f >= 0; --f) {
            const int idx = rem % dims[f];
            rem /= dims[f];
            if (f == k)
              k_index = idx;
            else
              coeff *= std::conj(vecs[f](idx));
          }
          contracted(k_index) += coeff * psi(flat);
        }
        const double norm = contracted.norm();
        if (norm > 1e-14) vecs[k] = contracted / norm;
      }
      // Overlap after the sweep equals the norm of the final contraction.
      Complex overlap = 0.0;
      for (int flat = 0; flat < psi.size(); ++flat) {
        int rem = flat;
        Complex coeff = 1.0;
        for (int f = nf - 1; f >= 0; --f) {
          const int idx = rem % dims[f];
          rem /= dims[f];
          coeff *= std::conj(vecs[f](idx));
        }
        overlap += coeff * psi(flat);
      }
      const double value = std::abs(overlap);
      if (value - prev < 1e-12) {
        prev = value;
        break;
      }
      prev = value;
    }
    best = std::max(best, prev);
  }
  return best;
}

ChannelCertReport certify_channel_free(const FreeSetModel& in_model,
                                       const FreeSetModel& out_model,
                                       const Channel& ch, double tol,
                                       int samples, std::uint64_t seed) {
  if (ch.in_dim() != in_model.dim() || ch.out_dim() != out_model.dim())
    throw Error(ErrorCode::InvalidShape,
                "channel freeness: dimensions do not match the models");
  ChannelCertReport report;
  if (in_model.kind == FreeSetKind::Incoherent &&
      out_model.kind == FreeSetKind::Incoherent) {
    // Exact: the channel preserves diagonality iff every basis projector
    // maps to a diagonal state, i.e. every input-diagonal Choi block is
    // diagonal.  J is indexed (input (x) output).
    const int din = ch.in_dim(), dout = ch.out_dim();
    double worst = 0.0;
    int worst_input = 0;
    for (int i = 0; i < din; ++i)
      for (int a = 0; a < dout; ++a)
        for (int b = 0; b < dout; ++b) {
          if (a == b) continue;
          const double mag = std::abs(ch.choi(i * dout + a, i * dout + b));
          if (mag > worst) {
            worst = mag;
            worst_input = i;
          }
        }
    report.exact = true;
    report.margin = -worst;
    if (worst <= tol) {
      report.verdict = ChannelVerdict::Free;
      report.detail = "every basis projector maps to a diagonal state";
    } else {
      report.verdict = ChannelVerdict::NotFree;
      std::ostringstream os;
      os << "basis projector " << worst_input
         << " maps to a state with off-diagonal magnitude " << worst;
      report.detail = os.str();
    }
    return report;
  }
  // Sampling-based falsification: a single free input with a non-free image
  // is conclusive; surviving all samples is only evidence.
  if (samples < 1)
    throw Error(ErrorCode::InvalidRequest, "channel freeness: samples < 1");
  Rng rng(seed);
  double min_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const DensityMatrix in = in_model.sample_free(rng);
    const Matrix out_raw = apply_channel_matrix(ch, in.mat);
    const DensityMatrix out((out_raw + out_raw.adjoint()) / 2.0,
                            out_model.state_dims());
    const MembershipReport rep = out_model.membership(out, tol);
    min_margin = std::min(min_margin, rep.margin);
    if (rep.verdict == Membership::NotFree) {
      report.verdict = ChannelVerdict::NotFree;
      report.exact = true;  // a witnessed escape from the free set
      report.margin = rep.margin;
      std::ostringstream os;
      os << "free input " << s << " maps outside the free set: " << rep.detail;
      report.detail = os.str();
      return report;
    }
  }
  report.verdict = ChannelVerdict::NotFalsified;
  report.exact = false;
  report.margin = min_margin;
  std::ostringstream os;
  os << samples << " sampled free inputs all map to free states";
  report.detail = os.str();
  return report;
}

void add_partial_transpose_link(conic::SdpProblem& problem, int blk_pt,
                                int blk_src, const std::vector<int>& dims,
                                const std::vector<int>& subset) {
  const int d = product_dim(dims);
  const int nf = static_cast<int>(dims.size());
  std::vector<bool> flip(nf, false);
  for (int s : subset) {
    if (s < 0 || s >= nf)
      throw Error(ErrorCode::InvalidProblem, "transpose link: bad factor");
    flip[s] = true;
  }
  auto map_pair = [&](int r, int c) {
    std::vector<int> ri(nf), ci(nf);
    int rr = r, cc = c;
    for (int k = nf - 1; k >= 0; --k) {
      ri[k] = rr % dims[k];
      rr /= dims[k];
      ci[k] = cc % dims[k];
      cc /= dims[k];
    }
    for (int k = 0; k < nf; ++k)
      if (flip[k]) std::swap(ri[k], ci[k]);
    int nr = 0, nc = 0;
    for (int k = 0; k < nf; ++k) {
      nr = nr * dims[k] + ri[k];
      nc = nc * dims[k] + ci[k];
    }
    return std::pair<int, int>{nr, nc};
  };
  for (int r = 0; r < d; ++r)
    for (int c = r; c < d; ++c) {
      auto [tr, tc] = map_pair(r, c);
      const int row_re = problem.new_row(0.0);
      problem.add_entry(row_re, blk_pt, r, c, 1.0);
      problem.add_entry(row_re, blk_src, tr, tc, -1.0);
      if (r == c) continue;
      const int row_im = problem.new_row(0.0);
      problem.add_entry(row_im, blk_pt, r, c, Complex(0.0, -1.0));
      problem.add_entry(row_im, blk_src, tr, tc, Complex(0.0, 1.0));
    }
}

}  // namespace rno::freesets
