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

#include "rno/conic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rno::conic {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

SolveObserver g_observer;

int pair_index(int r, int c) {
  // column-major upper-triangular enumeration of pairs r < c
  return c * (c - 1) / 2 + r;
}

}  // namespace

Eigen::VectorXd svec(const Matrix& h) {
  const int d = static_cast<int>(h.rows());
  Eigen::VectorXd v(d * d);
  for (int i = 0; i < d; ++i) v(i) = h(i, i).real();
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < c; ++r) {
      const int p = d + 2 * pair_index(r, c);
      v(p) = kSqrt2 * h(r, c).real();
      v(p + 1) = kSqrt2 * h(r, c).imag();
    }
  return v;
}

Matrix smat(const Eigen::VectorXd& coords, int d) {
  Matrix h(d, d);
  for (int i = 0; i < d; ++i) h(i, i) = coords(i);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < c; ++r) {
      const int p = d + 2 * pair_index(r, c);
      h(r, c) = Complex(coords(p), coords(p + 1)) / kSqrt2;
      h(c, r) = std::conj(h(r, c));
    }
  return h;
}

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIter: return "max_iterations";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Problem assembly
// ---------------------------------------------------------------------------

int SdpProblem::add_psd_block(int dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidProblem, "PSD block dim < 1");
  Block blk{BlockType::Psd, dim, num_cols_};
  num_cols_ += blk.size();
  blocks_.push_back(blk);
  return static_cast<int>(blocks_.size()) - 1;
}

int SdpProblem::add_nonneg_block(int count) {
  if (count < 1) throw Error(ErrorCode::InvalidProblem, "empty nonneg block");
  Block blk{BlockType::Nonneg, count, num_cols_};
  num_cols_ += count;
  blocks_.push_back(blk);
  return static_cast<int>(blocks_.size()) - 1;
}

int SdpProblem::add_free_block(int count) {
  if (count < 1) throw Error(ErrorCode::InvalidProblem, "empty free block");
  Block blk{BlockType::Free, count, num_cols_};
  num_cols_ += count;
  blocks_.push_back(blk);
  return static_cast<int>(blocks_.size()) - 1;
}

int SdpProblem::new_row(double rhs) {
  rhs_.push_back(rhs);
  return static_cast<int>(rhs_.size()) - 1;
}

void SdpProblem::check_block_entry(int block, int r, int c) const {
  if (block < 0 || block >= num_blocks())
    throw Error(ErrorCode::InvalidProblem, "bad block id");
  const Block& blk = blocks_[block];
  if (blk.type != BlockType::Psd)
    throw Error(ErrorCode::InvalidProblem,
                "matrix entry on a non-matrix block");
  if (r < 0 || c < 0 || r >= blk.dim || c >= blk.dim)
    throw Error(ErrorCode::InvalidProblem, "matrix entry out of range");
}

int SdpProblem::svec_index(int block, int r, int c) const {
  const Block& blk = blocks_[block];
  if (r == c) return blk.offset + r;
  return blk.offset + blk.dim + 2 * pair_index(r, c);
}

void SdpProblem::add_entry(int row, int block, int r, int c, Complex coeff) {
  if (row < 0 || row >= num_rows())
    throw Error(ErrorCode::InvalidProblem, "bad row id");
  check_block_entry(block, r, c);
  if (r == c) {
    // X_rr is real; Re(coeff * X_rr) = Re(coeff) X_rr
    if (std::abs(coeff.real()) > 0.0)
      entries_.push_back({row, svec_index(block, r, r), coeff.real()});
    return;
  }
  // With u = sqrt(2) Re X_rc, v = sqrt(2) Im X_rc (for r < c):
  //   Re(coeff * X_rc) = Re(coeff) u / sqrt2 - Im(coeff) v / sqrt2
  //   Re(coeff * X_cr) = Re(coeff) u / sqrt2 + Im(coeff) v / sqrt2
  const bool upper = r < c;
  const int rr = upper ? r : c;
  const int cc = upper ? c : r;
  const int p = svec_index(block, rr, cc);
  const double sgn = upper ? -1.0 : 1.0;
  if (std::abs(coeff.real()) > 0.0)
    entries_.push_back({row, p, coeff.real() / kSqrt2});
  if (std::abs(coeff.imag()) > 0.0)
    entries_.push_back({row, p + 1, sgn * coeff.imag() / kSqrt2});
}

void SdpProblem::add_scalar_entry(int row, int block, int k, double coeff) {
  if (row < 0 || row >= num_rows())
    throw Error(ErrorCode::InvalidProblem, "bad row id");
  if (block < 0 || block >= num_blocks())
    throw Error(ErrorCode::InvalidProblem, "bad block id");
  const Block& blk = blocks_[block];
  if (blk.type == BlockType::Psd)
    throw Error(ErrorCode::InvalidProblem, "scalar entry on a matrix block");
  if (k < 0 || k >= blk.dim)
    throw Error(ErrorCode::InvalidProblem, "scalar entry out of range");
  if (coeff != 0.0) entries_.push_back({row, blk.offset + k, coeff});
}

void SdpProblem::add_hermitian(int row, int block, const Matrix& h) {
  check_block_entry(block, 0, 0);
  const Block& blk = blocks_[block];
  if (h.rows() != blk.dim || h.cols() != blk.dim)
    throw Error(ErrorCode::InvalidProblem, "Hermitian coefficient size");
  // <H, X> = sum_r H_rr X_rr + sum_{r<c} 2 Re(conj(H_rc) X_rc)
  for (int r = 0; r < blk.dim; ++r)
    add_entry(row, block, r, r, h(r, r).real());
  for (int c = 0; c < blk.dim; ++c)
    for (int r = 0; r < c; ++r)
      add_entry(row, block, r, c, 2.0 * std::conj(h(r, c)));
}

void SdpProblem::add_trace_second_rows(int block, int d_first, int d_second,
                                       const Matrix& target) {
  check_block_entry(block, 0, 0);
  if (blocks_[block].dim != d_first * d_second)
    throw Error(ErrorCode::InvalidProblem, "trace rows: block size mismatch");
  if (target.rows() != d_first || target.cols() != d_first)
    throw Error(ErrorCode::InvalidProblem, "trace rows: target size");
  for (int r = 0; r < d_first; ++r)
    for (int c = r; c < d_first; ++c) {
      const int row_re = new_row(target(r, c).real());
      for (int t = 0; t < d_second; ++t)
        add_entry(row_re, block, r * d_second + t, c * d_second + t, 1.0);
      if (r == c) continue;
      const int row_im = new_row(target(r, c).imag());
      for (int t = 0; t < d_second; ++t)
        add_entry(row_im, block, r * d_second + t, c * d_second + t,
                  Complex(0.0, -1.0));
    }
}

void SdpProblem::add_matrix_eq_rows(const std::vector<int>& blocks,
                                    const std::vector<double>& coeffs, int d,
                                    const Matrix& target) {
  if (blocks.size() != coeffs.size() || blocks.empty())
    throw Error(ErrorCode::InvalidProblem, "matrix equality: size mismatch");
  for (int id : blocks) {
    check_block_entry(id, 0, 0);
    if (blocks_[id].dim != d)
      throw Error(ErrorCode::InvalidProblem, "matrix equality: block side");
  }
  if (target.rows() != d || target.cols() != d)
    throw Error(ErrorCode::InvalidProblem, "matrix equality: target size");
  for (int r = 0; r < d; ++r)
    for (int c = r; c < d; ++c) {
      const int row_re = new_row(target(r, c).real());
      for (std::size_t k = 0; k < blocks.size(); ++k)
        add_entry(row_re, blocks[k], r, c, coeffs[k]);
      if (r == c) continue;
      const int row_im = new_row(target(r, c).imag());
      for (std::size_t k = 0; k < blocks.size(); ++k)
        add_entry(row_im, blocks[k], r, c, Complex(0.0, -coeffs[k]));
    }
}

void SdpProblem::add_objective(int block, const Matrix& c) {
  check_block_entry(block, 0, 0);
  const Block& blk = blocks_[block];
  if (c.rows() != blk.dim || c.cols() != blk.dim)
    throw Error(ErrorCode::InvalidProblem, "objective coefficient size");
  const Eigen::VectorXd coords = svec((c + c.adjoint()) / 2.0);
  for (int k = 0; k < coords.size(); ++k)
    if (coords(k) != 0.0) objective_.emplace_back(blk.offset + k, coords(k));
}

void SdpProblem::add_scalar_objective(int block, int k, double coeff) {
  if (block < 0 || block >= num_blocks())
    throw Error(ErrorCode::InvalidProblem, "bad block id");
  const Block& blk = blocks_[block];
  if (blk.type == BlockType::Psd)
    throw Error(ErrorCode::InvalidProblem, "scalar objective on matrix block");
  if (k < 0 || k >= blk.dim)
    throw Error(ErrorCode::InvalidProblem, "scalar objective out of range");
  if (coeff != 0.0) objective_.emplace_back(blk.offset + k, coeff);
}

void SdpProblem::assemble(Eigen::MatrixXd& a, Eigen::VectorXd& b,
                          Eigen::VectorXd& c) const {
  const int m = num_rows(), n = num_cols();
  if (m == 0 || n == 0)
    throw Error(ErrorCode::InvalidProblem, "problem has no rows or columns");
  a = Eigen::MatrixXd::Zero(m, n);
  for (const Entry& e : entries_) a(e.row, e.col) += e.val;
  b = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), m);
  c = Eigen::VectorXd::Zero(n);
  const double sign = maximize_ ? -1.0 : 1.0;
  for (const auto& [col, coeff] : objective_) c(col) += sign * coeff;
}

Matrix SdpProblem::block_matrix(int id, const Eigen::VectorXd& x) const {
  check_block_entry(id, 0, 0);
  const Block& blk = blocks_[id];
  return smat(x.segment(blk.offset, blk.size()), blk.dim);
}

Eigen::VectorXd SdpProblem::block_vector(int id,
                                         const Eigen::VectorXd& x) const {
  if (id < 0 || id >= num_blocks())
    throw Error(ErrorCode::InvalidProblem, "bad block id");
  const Block& blk = blocks_[id];
  return x.segment(blk.offset, blk.size());
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

namespace {

struct Workspace {
  const SdpProblem* problem = nullptr;
  Eigen::MatrixXd a;        // unscaled
  Eigen::VectorXd b, c;     // unscaled, minimization sense
  Eigen::MatrixXd a_hat;    // row-scaled
  Eigen::VectorXd b_hat;
  Eigen::VectorXd row_scale;
  Eigen::MatrixXd gq;       // eigenvectors of A_hat A_hat'
  Eigen::VectorXd gl_inv;   // pseudo-inverted eigenvalues
  double b_norm = 0.0, c_norm = 0.0;

  Eigen::VectorXd pinv_apply(const Eigen::VectorXd& u) const {
    return gq * (gl_inv.asDiagonal() * (gq.transpose() * u));
  }
};

// Projects v blockwise onto the dual cone; also emits the complementary
// primal update x = sigma (z - v).
void project_blocks(const SdpProblem& p, const Eigen::VectorXd& v,
                    double sigma, Eigen::VectorXd& z, Eigen::VectorXd& x) {
  for (int id = 0; id < p.num_blocks(); ++id) {
    const Block& blk = p.block(id);
    const auto seg_v = v.segment(blk.offset, blk.size());
    auto seg_z = z.segment(blk.offset, blk.size());
    auto seg_x = x.segment(blk.offset, blk.size());
    switch (blk.type) {
      case BlockType::Psd: {
        Eigen::SelfAdjointEigenSolver<Matrix> es(smat(seg_v, blk.dim));
        const Eigen::VectorXd lam = es.eigenvalues();
        const Matrix pos = es.eigenvectors() *
                           lam.cwiseMax(0.0).asDiagonal() *
                           es.eigenvectors().adjoint();
        const Matrix neg = es.eigenvectors() *
                           lam.cwiseMin(0.0).asDiagonal() *
                           es.eigenvectors().adjoint();
        seg_z = svec(pos);
        seg_x = -sigma * svec(neg);
        break;
      }
      case BlockType::Nonneg:
        seg_z = seg_v.cwiseMax(0.0);
        seg_x = -sigma * seg_v.cwiseMin(0.0).eval();
        break;
      case BlockType::Free:
        seg_z.setZero();
        seg_x = -sigma * seg_v;
        break;
    }
  }
}

// Farkas-style dual improving ray test: d certifies primal infeasibility if
// b'd > 0 and -A'd lies in the dual cone.
bool is_infeasibility_certificate(const Workspace& ws,
                                  const Eigen::VectorXd& dir) {
  const double nd = dir.norm();
  if (nd < 1e-12) return false;
  const Eigen::VectorXd d = dir / nd;
  const double gain = ws.b.dot(d);
  if (gain <= 1e-5 * (1.0 + ws.b_norm)) return false;
  const Eigen::VectorXd w = -(ws.a.transpose() * d);
  const SdpProblem& p = *ws.problem;
  for (int id = 0; id < p.num_blocks(); ++id) {
    const Block& blk = p.block(id);
    const auto seg = w.segment(blk.offset, blk.size());
    switch (blk.type) {
      case BlockType::Psd: {
        Eigen::SelfAdjointEigenSolver<Matrix> es(smat(seg, blk.dim),
                                                 Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8) return false;
        break;
      }
      case BlockType::Nonneg:
        if (seg.minCoeff() < -1e-8) return false;
        break;
      case BlockType::Free:
        if (seg.cwiseAbs().maxCoeff() > 1e-8) return false;
        break;
    }
  }
  return true;
}

}  // namespace

void set_solve_observer(SolveObserver observer) {
  g_observer = std::move(observer);
}

void clear_solve_observer() { g_observer = nullptr; }

SolveResult solve(const SdpProblem& problem, const SolverOptions& options) {
  Workspace ws;
  ws.problem = &problem;
  problem.assemble(ws.a, ws.b, ws.c);
  const int m = problem.num_rows(), n = problem.num_cols();

  // Row scaling.
  ws.row_scale.resize(m);
  for (int r = 0; r < m; ++r) {
    const double nr = ws.a.row(r).norm();
    ws.row_scale(r) = 1.0 / std::max(nr, 1e-12);
  }
  ws.a_hat = ws.row_scale.asDiagonal() * ws.a;
  ws.b_hat = ws.row_scale.asDiagonal() * ws.b;
  ws.b_norm = ws.b.norm();
  ws.c_norm = ws.c.norm();

  // Normal matrix.
  {
    Eigen::MatrixXd g = ws.a_hat * ws.a_hat.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double lmax = std::max(lam.maxCoeff(), 0.0);
    ws.gq = es.eigenvectors();
    ws.gl_inv.resize(m);
    for (int i = 0; i < m; ++i)
      ws.gl_inv(i) = (lam(i) > 1e-12 * std::max(lmax, 1.0)) ? 1.0 / lam(i)
                                                            : 0.0;
  }

  SolveResult result;
  result.x = Eigen::VectorXd::Zero(n);
  result.y = Eigen::VectorXd::Zero(m);
  result.z = Eigen::VectorXd::Zero(n);

  // Consistency presolve: if even the least-squares solution cannot satisfy
  // the equalities, the problem is infeasible regardless of the cone.
  {
    const Eigen::VectorXd y_ls = ws.pinv_apply(ws.b_hat);
    const Eigen::VectorXd x_ls = ws.a_hat.transpose() * y_ls;
    const double viol = (ws.a_hat * x_ls - ws.b_hat).cwiseAbs().maxCoeff();
    if (viol > 1e-9 * (1.0 + ws.b_hat.cwiseAbs().maxCoeff())) {
      result.status = SolveStatus::Infeasible;
      result.objective = std::numeric_limits<double>::quiet_NaN();
      if (g_observer) g_observer(problem, result);
      return result;
    }
  }

  double sigma = options.sigma;
  const double alpha = options.relaxation;
  Eigen::VectorXd x = result.x, z = result.z, y(m);
  Eigen::VectorXd y_u_window = Eigen::VectorXd::Zero(m);
  double pres = 0.0, dres = 0.0, gap = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  int iter = 0;

  for (iter = 1; iter <= options.max_iter; ++iter) {
    const Eigen::VectorXd rhs =
        (ws.b_hat - ws.a_hat * x) / sigma - ws.a_hat * (z - ws.c);
    y = ws.pinv_apply(rhs);
    const Eigen::VectorXd w = ws.a_hat.transpose() * y;
    const Eigen::VectorXd h = alpha * w + (1.0 - alpha) * (ws.c - z);
    const Eigen::VectorXd v = ws.c - h - x / sigma;
    project_blocks(problem, v, sigma, z, x);

    if (iter % options.check_every == 0) {
      const Eigen::VectorXd y_u = ws.row_scale.asDiagonal() * y;
      pres = (ws.a * x - ws.b).norm() / (1.0 + ws.b_norm);
      dres = (ws.a.transpose() * y_u + z - ws.c).norm() / (1.0 + ws.c_norm);
      const double pobj = ws.c.dot(x);
      const double dobj = ws.b.dot(y_u);
      gap = std::abs(pobj - dobj) /
            (1.0 + std::abs(pobj) + std::abs(dobj));
      if (options.verbose && iter % 1000 == 0)
        std::fprintf(stderr, "conic iter %d pres %.2e dres %.2e gap %.2e\n",
                     iter, pres, dres, gap);
      if (pres < options.tol && dres < options.tol && gap < options.tol) {
        status = SolveStatus::Optimal;
        result.y = y_u;
        break;
      }
      if (pobj < -1e12) {
        status = SolveStatus::Unbounded;
        result.y = y_u;
        break;
      }
      if (iter % options.adapt_every == 0) {
        if (pres > 10.0 * dres)
          sigma = std::min(sigma * 2.0, 1e6);
        else if (dres > 10.0 * pres)
          sigma = std::max(sigma / 2.0, 1e-6);
      }
      if (iter % options.certificate_every == 0 && iter >= 1000 &&
          pres > 100.0 * options.tol) {
        const Eigen::VectorXd dir = y_u - y_u_window;
        if (is_infeasibility_certificate(ws, dir)) {
          status = SolveStatus::Infeasible;
          result.y = y_u;
          break;
        }
        y_u_window = y_u;
      }
    }
  }

  if (status == SolveStatus::MaxIter) {
    result.y = ws.row_scale.asDiagonal() * y;
    iter = options.max_iter;
  }
  result.status = status;
  result.x = x;
  result.z = z;
  result.iterations = std::min(iter, options.max_iter);
  result.primal_residual = pres;
  result.dual_residual = dres;
  result.gap = gap;
  if (status == SolveStatus::Optimal) {
    const double sign = problem.maximize() ? -1.0 : 1.0;
    result.objective = sign * ws.c.dot(x);
  } else {
    result.objective = std::numeric_limits<double>::quiet_NaN();
  }
  if (g_observer) g_observer(problem, result);
  return result;
}

bool KktReport::within(double tol) const {
  return status == SolveStatus::Optimal && primal_residual <= tol &&
         dual_residual <= tol && gap <= tol && min_primal_eig >= -tol &&
         min_dual_eig >= -tol && std::abs(complementarity) <= tol;
}

KktReport check_kkt(const SdpProblem& problem, const SolveResult& result) {
  KktReport report;
  report.status = result.status;
  if (result.status != SolveStatus::Optimal) return report;
  Eigen::MatrixXd a;
  Eigen::VectorXd b, c;
  problem.assemble(a, b, c);
  report.primal_residual = (a * result.x - b).norm() / (1.0 + b.norm());
  report.dual_residual =
      (a.transpose() * result.y + result.z - c).norm() / (1.0 + c.norm());
  const double pobj = c.dot(result.x);
  const double dobj = b.dot(result.y);
  report.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  report.complementarity =
      std::abs(result.x.dot(result.z)) / (1.0 + std::abs(pobj));
  double min_p = 0.0, min_d = 0.0;
  for (int id = 0; id < problem.num_blocks(); ++id) {
    const Block& blk = problem.block(id);
    if (blk.type == BlockType::Free) continue;
    const auto seg_x = result.x.segment(blk.offset, blk.size());
    const auto seg_z = result.z.segment(blk.offset, blk.size());
    if (blk.type == BlockType::Psd) {
      min_p = std::min(min_p, qmath::min_eigenvalue(smat(seg_x, blk.dim)));
      min_d = std::min(min_d, qmath::min_eigenvalue(smat(seg_z, blk.dim)));
    } else {
      min_p = std::min(min_p, seg_x.minCoeff());
      min_d = std::min(min_d, seg_z.minCoeff());
    }
  }
  report.min_primal_eig = min_p;
  report.min_dual_eig = min_d;
  return report;
}

}  // namespace rno::conic
