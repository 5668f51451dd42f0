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

#include "rno/static_measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace rno::static_measures {

using namespace rno::qmath;
using conic::SdpProblem;
using conic::SolveResult;
using conic::SolveStatus;
using freesets::FreeSetKind;

namespace {

// A cone(F) member inside a problem: a nonnegative diagonal for the
// incoherent model, or a PSD block whose transpose battery is linked in.
struct ConeVar {
  bool diagonal = false;
  int block = -1;
};

ConeVar add_cone_var(SdpProblem& p, const FreeSetModel& model) {
  const int d = model.dim();
  ConeVar var;
  if (model.kind == FreeSetKind::Incoherent) {
    var.diagonal = true;
    var.block = p.add_nonneg_block(d);
    return var;
  }
  var.diagonal = false;
  var.block = p.add_psd_block(d);
  const std::vector<int> dims = model.state_dims();
  for (const std::vector<int>& subset : model.pt_subsets()) {
    const int pt = p.add_psd_block(d);
    freesets::add_partial_transpose_link(p, pt, var.block, dims, subset);
  }
  return var;
}

struct Term {
  bool diagonal = false;  // block holds only the diagonal (nonneg coords)
  int block = -1;
  double coeff = 0.0;
};

Term term(const ConeVar& var, double coeff) {
  return Term{var.diagonal, var.block, coeff};
}

Term term(int psd_block, double coeff) {
  return Term{false, psd_block, coeff};
}

// Rows for: sum_k coeff_k * X_k = target (entrywise over r <= c).
void add_eq_rows(SdpProblem& p, const std::vector<Term>& terms, int d,
                 const Matrix& target) {
  for (int r = 0; r < d; ++r)
    for (int c = r; c < d; ++c) {
      const int row_re = p.new_row(target(r, c).real());
      for (const Term& t : terms) {
        if (t.diagonal) {
          if (r == c) p.add_scalar_entry(row_re, t.block, r, t.coeff);
        } else {
          p.add_entry(row_re, t.block, r, c, t.coeff);
        }
      }
      if (r == c) continue;
      const int row_im = p.new_row(target(r, c).imag());
      for (const Term& t : terms)
        if (!t.diagonal)
          p.add_entry(row_im, t.block, r, c, Complex(0.0, -t.coeff));
    }
}

void add_trace_objective(SdpProblem& p, const ConeVar& var, int d) {
  if (var.diagonal) {
    for (int i = 0; i < d; ++i) p.add_scalar_objective(var.block, i, 1.0);
  } else {
    p.add_objective(var.block, Matrix::Identity(d, d));
  }
}

Matrix extract_cone_var(const SdpProblem& p, const ConeVar& var, int d,
                        const Eigen::VectorXd& x) {
  if (!var.diagonal) return p.block_matrix(var.block, x);
  const Eigen::VectorXd diag = p.block_vector(var.block, x);
  Matrix t = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) t(i, i) = diag(i);
  return t;
}

// Projects a near-state matrix onto the exact states: Hermitian part,
// eigenvalue clip at zero, unit trace.
Matrix polish_state(const Matrix& m) {
  const int d = static_cast<int>(m.rows());
  Matrix h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0);
  const double total = vals.sum();
  if (total <= 1e-14) return Matrix::Identity(d, d) / double(d);
  vals /= total;
  return eig.eigenvectors() * vals.asDiagonal() *
         eig.eigenvectors().adjoint();
}

// `reference` is the state the decomposition is anchored at: the input for
// the plain quantifiers, the optimized nearby state (block `rt_block`) for
// the smoothed ones.
RobustnessResult finish(const FreeSetModel& model, const SdpProblem& p,
                        const ConeVar& tvar, const SolveResult& solved,
                        const Matrix& rho, int rt_block = -1) {
  RobustnessResult out;
  out.status = solved.status;
  out.exact_model = model.membership_exact();
  switch (solved.status) {
    case SolveStatus::Optimal: {
      out.value = std::max(solved.objective - 1.0, 0.0);
      out.log2_value = std::log2(1.0 + out.value);
      out.witness_t = extract_cone_var(p, tvar, model.dim(), solved.x);
      out.smoothed_state =
          rt_block >= 0 ? polish_state(p.block_matrix(rt_block, solved.x))
                        : rho;
      const int d = model.dim();
      if (out.value <= 1e-10) {
        out.mixer = Matrix::Identity(d, d) / double(d);
        out.free_witness = polish_state(out.smoothed_state);
      } else {
        out.mixer =
            polish_state((out.witness_t - out.smoothed_state) / out.value);
        out.free_witness = polish_state(out.witness_t / (1.0 + out.value));
      }
      return out;
    }
    case SolveStatus::Infeasible:
      out.value = std::numeric_limits<double>::infinity();
      out.log2_value = std::numeric_limits<double>::infinity();
      return out;
    default:
      throw Error(ErrorCode::SolverError,
                  std::string("robustness solve ended with status ") +
                      conic::status_name(solved.status));
  }
}

conic::SolverOptions to_solver(const RobustnessOptions& opts) {
  conic::SolverOptions s;
  s.tol = opts.tol;
  s.max_iter = opts.max_iter;
  return s;
}

void check_input(const FreeSetModel& model, const DensityMatrix& rho) {
  if (rho.dim() != model.dim())
    throw Error(ErrorCode::InvalidShape,
                "state dimension does not match the free-set model");
}

// Shared smoothing scaffolding: a state block rho~ plus the trace-ball
// constraint ||rho - rho~||_1 <= 2 eps expressed through P - N = rho - rho~.
int add_smoothing_blocks(SdpProblem& p, const Matrix& rho, int d, double eps) {
  const int rt = p.add_psd_block(d);
  const int bp = p.add_psd_block(d);
  const int bn = p.add_psd_block(d);
  const int slack = p.add_nonneg_block(1);
  // tr rho~ = 1
  const int row_tr = p.new_row(1.0);
  for (int i = 0; i < d; ++i) p.add_entry(row_tr, rt, i, i, 1.0);
  // P - N + rho~ = rho
  add_eq_rows(p, {term(bp, 1.0), term(bn, -1.0), term(rt, 1.0)}, d, rho);
  // tr P + tr N + slack = 2 eps
  const int row_ball = p.new_row(2.0 * eps);
  for (int i = 0; i < d; ++i) {
    p.add_entry(row_ball, bp, i, i, 1.0);
    p.add_entry(row_ball, bn, i, i, 1.0);
  }
  p.add_scalar_entry(row_ball, slack, 0, 1.0);
  return rt;
}

}  // namespace

RobustnessResult generalized_robustness(const FreeSetModel& model,
                                        const DensityMatrix& rho,
                                        const RobustnessOptions& opts) {
  check_input(model, rho);
  const int d = model.dim();
  SdpProblem p;
  const ConeVar tvar = add_cone_var(p, model);
  const int q = p.add_psd_block(d);
  add_eq_rows(p, {term(tvar, 1.0), term(q, -1.0)}, d, rho.mat);
  add_trace_objective(p, tvar, d);
  return finish(model, p, tvar, conic::solve(p, to_solver(opts)), rho.mat);
}

RobustnessResult standard_robustness(const FreeSetModel& model,
                                     const DensityMatrix& rho,
                                     const RobustnessOptions& opts) {
  check_input(model, rho);
  const int d = model.dim();
  SdpProblem p;
  const ConeVar tvar = add_cone_var(p, model);
  const ConeVar uvar = add_cone_var(p, model);
  add_eq_rows(p, {term(tvar, 1.0), term(uvar, -1.0)}, d, rho.mat);
  add_trace_objective(p, tvar, d);
  return finish(model, p, tvar, conic::solve(p, to_solver(opts)), rho.mat);
}

RobustnessResult smoothed_generalized_robustness(const FreeSetModel& model,
                                                 const DensityMatrix& rho,
                                                 double eps,
                                                 const RobustnessOptions& opts) {
  check_input(model, rho);
  if (eps < 0.0 || eps > 1.0)
    throw Error(ErrorCode::InvalidRequest, "smoothing radius outside [0,1]");
  const int d = model.dim();
  SdpProblem p;
  const int rt = add_smoothing_blocks(p, rho.mat, d, eps);
  const ConeVar tvar = add_cone_var(p, model);
  const int q = p.add_psd_block(d);
  add_eq_rows(p, {term(tvar, 1.0), term(q, -1.0), term(rt, -1.0)}, d,
              Matrix::Zero(d, d));
  add_trace_objective(p, tvar, d);
  return finish(model, p, tvar, conic::solve(p, to_solver(opts)), rho.mat, rt);
}

RobustnessResult smoothed_standard_robustness(const FreeSetModel& model,
                                              const DensityMatrix& rho,
                                              double eps,
                                              const RobustnessOptions& opts) {
  check_input(model, rho);
  if (eps < 0.0 || eps > 1.0)
    throw Error(ErrorCode::InvalidRequest, "smoothing radius outside [0,1]");
  const int d = model.dim();
  SdpProblem p;
  const int rt = add_smoothing_blocks(p, rho.mat, d, eps);
  const ConeVar tvar = add_cone_var(p, model);
  const ConeVar uvar = add_cone_var(p, model);
  add_eq_rows(p, {term(tvar, 1.0), term(uvar, -1.0), term(rt, -1.0)}, d,
              Matrix::Zero(d, d));
  add_trace_objective(p, tvar, d);
  return finish(model, p, tvar, conic::solve(p, to_solver(opts)), rho.mat, rt);
}

GeometricResult geometric_measure_pure(const FreeSetModel& model,
                                       const Vector& psi, std::uint64_t seed,
                                       int restarts) {
  const double norm = psi.norm();
  if (norm <= 0.0)
    throw Error(ErrorCode::InvalidState, "zero amplitude vector");
  Vector unit = psi / norm;
  Rng rng(seed);
  GeometricResult out;
  out.overlap = model.max_free_overlap(unit, rng, restarts);
  out.value = 1.0 - out.overlap;
  out.exact = model.kind == FreeSetKind::Incoherent || model.copies == 1;
  return out;
}

const char* quantifier_name(Quantifier q) {
  return q == Quantifier::Generalized ? "generalized" : "standard";
}

double AxiomReport::max_violation() const {
  return std::max({vanishes_on_free.max_violation, monotone.max_violation,
                   faithful.max_violation, convex.max_violation});
}

namespace {

double measure(const FreeSetModel& model, Quantifier q,
               const DensityMatrix& rho, const RobustnessOptions& opts) {
  const RobustnessResult r = q == Quantifier::Generalized
                                 ? generalized_robustness(model, rho, opts)
                                 : standard_robustness(model, rho, opts);
  return r.value;
}

void record(AxiomCheck& check, double violation) {
  ++check.checks;
  check.max_violation = std::max(check.max_violation, violation);
}

// A measure-and-prepare map rho -> t sigma + (1-t) delta with t = <psi|rho|psi>.
// Free by construction: every free state's overlap with psi stays at or below
// the mixing threshold of sigma, where the output is a convex combination of
// the free witness (sigma + S delta)/(1 + S) and the free supplement delta.
struct PreparedFreeMap {
  Vector psi;
  Matrix sigma;
  Matrix delta;
};

Matrix apply_prepared(const PreparedFreeMap& fm, const Matrix& rho) {
  const Complex raw = (fm.psi.adjoint() * rho * fm.psi)(0, 0);
  const double t = std::clamp(raw.real(), 0.0, 1.0);
  return t * fm.sigma + (1.0 - t) * fm.delta;
}

Vector product_vector(const FreeSetModel& model, Rng& rng) {
  const std::vector<int> dims = model.state_dims();
  Vector v = Vector::Constant(1, Complex(1.0, 0.0));
  for (int d : dims) {
    const Vector f = sample_pure_vector(d, rng);
    Vector next(v.size() * d);
    for (int i = 0; i < v.size(); ++i) next.segment(i * d, d) = v(i) * f;
    v = std::move(next);
  }
  return v;
}

std::vector<PreparedFreeMap> build_free_map_pool(const FreeSetModel& model,
                                                 Rng& rng,
                                                 const RobustnessOptions& opts,
                                                 int want) {
  std::vector<PreparedFreeMap> pool;
  const int d = model.dim();
  for (int attempt = 0; attempt < 8 * want && int(pool.size()) < want;
       ++attempt) {
    // Mostly-free target with a small pure admixture keeps the mixing
    // threshold high enough for weakly resourceful measurement states.
    const double q = rng.uniform(0.05, 0.45);
    const DensityMatrix base = model.sample_free(rng);
    const DensityMatrix pure = sample_pure_state(model.state_dims(), rng);
    Matrix sig = q * pure.mat + (1.0 - q) * base.mat;
    sig = (sig + sig.adjoint()) / 2.0;
    const DensityMatrix sigma(sig, model.state_dims());
    const RobustnessResult r = standard_robustness(model, sigma, opts);
    if (!std::isfinite(r.value)) continue;
    const double threshold = 1.0 / (1.0 + r.value);
    const double eta = rng.uniform(0.0, 0.25);
    Vector psi = (1.0 - eta) * product_vector(model, rng) +
                 eta * sample_pure_vector(d, rng);
    psi /= psi.norm();
    const double c1 = model.max_free_overlap(psi, rng);
    if (c1 > threshold + 1e-9) continue;
    PreparedFreeMap fm;
    fm.psi = psi;
    fm.sigma = sig;
    fm.delta = r.value <= 1e-10 ? Matrix(Matrix::Identity(d, d) / double(d))
                                : r.mixer;
    if (!model.is_free(DensityMatrix(fm.delta, model.state_dims()), 1e-7))
      continue;
    pool.push_back(std::move(fm));
  }
  return pool;
}

}  // namespace

AxiomReport quantifier_axiom_suite(const FreeSetModel& model, Quantifier q,
                                   int trials, std::uint64_t seed,
                                   const RobustnessOptions& opts) {
  if (trials < 1)
    throw Error(ErrorCode::InvalidRequest, "axiom suite: trials < 1");
  AxiomReport report;
  report.quantifier = q;
  report.trials = trials;
  report.seed = seed;
  Rng rng(seed);
  const std::vector<int> dims = model.state_dims();
  constexpr double kNotFreeMargin = 1e-3;   // decisiveness of O3 samples
  constexpr double kFaithfulFloor = 1e-6;   // required positivity at O3
  std::vector<PreparedFreeMap> pool;
  if (model.kind == FreeSetKind::SeparablePpt)
    pool = build_free_map_pool(model, rng, opts, std::min(6, trials));
  const double mix_weights[] = {0.25, 0.5, 0.75};

  for (int t = 0; t < trials; ++t) {
    // O1: the quantifier vanishes on free states.
    {
      const DensityMatrix free_state = model.sample_free(rng);
      record(report.vanishes_on_free, measure(model, q, free_state, opts));
    }
    // O2: the quantifier never increases under a free channel.
    {
      const DensityMatrix in = t % 3 == 0
                                   ? model.sample_free(rng)
                                   : model.sample_not_free(rng, kNotFreeMargin);
      Matrix out_raw;
      if (model.kind == FreeSetKind::SeparablePpt && !pool.empty() &&
          t % 2 == 1) {
        out_raw = apply_prepared(pool[(t / 2) % pool.size()], in.mat);
      } else {
        const Channel ch = model.sample_free_channel(rng);
        if (model.kind == FreeSetKind::Incoherent &&
            model.is_rno_channel(ch, 1e-9).verdict !=
                freesets::ChannelVerdict::Free)
          throw Error(ErrorCode::SolverError,
                      "sampled channel failed its own freeness certificate");
        out_raw = apply_channel_matrix(ch, in.mat);
      }
      const DensityMatrix out((out_raw + out_raw.adjoint()) / 2.0, dims);
      const double before = measure(model, q, in, opts);
      if (std::isfinite(before)) {
        const double after = measure(model, q, out, opts);
        record(report.monotone, std::max(0.0, after - before));
      } else {
        record(report.monotone, 0.0);  // +infinity dominates every output
      }
    }
    // O3: strictly positive on decisively resourceful states.
    {
      const DensityMatrix bad = model.sample_not_free(rng, kNotFreeMargin);
      const double value = measure(model, q, bad, opts);
      record(report.faithful,
             std::isfinite(value) ? std::max(0.0, kFaithfulFloor - value)
                                  : 0.0);
    }
    // O4: convex under mixing.
    {
      const DensityMatrix a = model.sample_not_free(rng, kNotFreeMargin);
      const DensityMatrix b =
          t % 2 == 0 ? model.sample_free(rng) : sample_state(dims, rng);
      const double w = mix_weights[t % 3];
      const DensityMatrix mixed(w * a.mat + (1.0 - w) * b.mat, dims);
      const double va = measure(model, q, a, opts);
      const double vb = measure(model, q, b, opts);
      if (std::isfinite(va) && std::isfinite(vb)) {
        const double vm = measure(model, q, mixed, opts);
        record(report.convex,
               std::max(0.0, vm - (w * va + (1.0 - w) * vb)));
      } else {
        record(report.convex, 0.0);  // an infinite endpoint never binds
      }
    }
  }
  return report;
}

}  // namespace rno::static_measures
