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

#include "rno/transform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "rno/errors.hpp"

namespace rno::transform {

namespace {

using freesets::FreeSetKind;
using freesets::Membership;
using qmath::Channel;
using static_measures::RobustnessOptions;
using static_measures::RobustnessResult;
using static_measures::standard_robustness;

struct PlanData {
  TransformPlan plan;
  Vector unit;              // normalized input vector
  RobustnessResult target;  // standard robustness of sigma with witness
};

PlanData make_plan(const FreeSetModel& model, const Vector& psi,
                   const DensityMatrix& sigma, const TransformOptions& opts) {
  const int d = model.dim();
  if (psi.size() != d) {
    throw Error(ErrorCode::InvalidShape,
                "transform input dimension does not match the model");
  }
  if (sigma.dim() != d) {
    throw Error(ErrorCode::InvalidShape,
                "transform target dimension does not match the model");
  }
  const double norm = psi.norm();
  if (norm < 1e-12) {
    throw Error(ErrorCode::InvalidState, "transform input vector is zero");
  }

  PlanData data;
  data.unit = psi / norm;

  Rng rng(opts.seed);
  const double c1 =
      model.max_free_overlap(data.unit, rng, opts.overlap_restarts);
  RobustnessOptions rob_opts;
  rob_opts.tol = opts.tol;
  rob_opts.max_iter = opts.max_iter;
  data.target = standard_robustness(model, sigma, rob_opts);

  TransformPlan& plan = data.plan;
  plan.overlap = c1;
  plan.geometric = 1.0 - c1;
  plan.robustness = data.target.value;
  plan.threshold =
      std::isinf(data.target.value) ? 0.0 : 1.0 / (1.0 + data.target.value);
  plan.required = opts.tight_mode ? c1 * c1 : c1;
  plan.condition_lhs = plan.threshold + plan.geometric;
  plan.mixer = std::isinf(data.target.value)
                   ? Matrix()
                   : (data.target.value <= 1e-10
                          ? Matrix(Matrix::Identity(d, d) / double(d))
                          : data.target.mixer);
  plan.overlap_exact =
      !(model.kind == FreeSetKind::SeparablePpt && model.copies > 1);
  plan.model_exact = data.target.exact_model && model.membership_exact();
  plan.feasible = plan.threshold > 0.0 &&
                  plan.required <= plan.threshold + 1e-9;

  std::ostringstream out;
  out << (opts.tight_mode ? "c1^2 = " : "c1 = ") << plan.required
      << (plan.feasible ? " <= " : " > ") << plan.threshold
      << " = 1/(1 + S(target))";
  if (std::isinf(data.target.value)) {
    out << "; target admits no free supplement";
  }
  plan.detail = out.str();
  return data;
}

// Projects a raw supplement onto the model's free set: hermitize, blend a
// little maximal mixedness in, clear what must vanish exactly, and clip the
// spectrum back to a unit-trace density matrix.
DensityMatrix polish_mixer(const FreeSetModel& model, const Matrix& raw,
                           double gamma) {
  const int d = model.dim();
  Matrix m = 0.5 * (raw + raw.adjoint());
  m = (1.0 - gamma) * m +
      gamma * Matrix::Identity(d, d) / static_cast<double>(d);
  if (model.kind == FreeSetKind::Incoherent) {
    Matrix diag = Matrix::Zero(d, d);
    double total = 0.0;
    for (int i = 0; i < d; ++i) {
      const double v = std::max(m(i, i).real(), 0.0);
      diag(i, i) = v;
      total += v;
    }
    if (total < 1e-12) {
      throw Error(ErrorCode::SolverError,
                  "transform supplement collapsed to zero");
    }
    return DensityMatrix(diag / total, model.state_dims());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
  const double total = vals.sum();
  if (total < 1e-12) {
    throw Error(ErrorCode::SolverError,
                "transform supplement collapsed to zero");
  }
  Matrix clipped = es.eigenvectors() * (vals / total).asDiagonal() *
                   es.eigenvectors().adjoint();
  return DensityMatrix(clipped, model.state_dims());
}

// Largest x in [0, 1] with x sigma + (1-x) mixer verified free.  Freeness is
// monotone in x here because the mixer itself is free.
double bisect_threshold(const FreeSetModel& model, const DensityMatrix& sigma,
                        const DensityMatrix& mixer, double tol) {
  const auto free_at = [&](double x) {
    Matrix mix = x * sigma.mat + (1.0 - x) * mixer.mat;
    return model.is_free(DensityMatrix(mix, model.state_dims()), tol);
  };
  if (free_at(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (free_at(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TransformPlan plan_transform(const FreeSetModel& model, const Vector& psi,
                             const DensityMatrix& sigma,
                             const TransformOptions& opts) {
  return make_plan(model, psi, sigma, opts).plan;
}

TransformChannel build_transform(const FreeSetModel& model, const Vector& psi,
                                 const DensityMatrix& sigma,
                                 const TransformOptions& opts) {
  PlanData data = make_plan(model, psi, sigma, opts);
  if (!data.plan.feasible) {
    throw Error(ErrorCode::ConditionNotMet,
                "transform condition fails: " + data.plan.detail);
  }
  const int d = model.dim();
  const std::vector<int> dims = model.state_dims();

  DensityMatrix mixer =
      data.target.value <= 1e-12
          ? DensityMatrix(sigma.mat, dims)
          : polish_mixer(model,
                         (data.target.witness_t - sigma.mat) /
                             data.target.value,
                         opts.mixer_gamma);
  if (!model.is_free(mixer, 1e-8)) {
    throw Error(ErrorCode::SolverError,
                "transform supplement failed the free-set check after polish");
  }

  const double x_eff =
      bisect_threshold(model, sigma, mixer, opts.membership_tol);
  const double needed = data.plan.overlap * data.plan.overlap;
  if (needed > x_eff + 1e-12) {
    std::ostringstream out;
    out << "polished supplement covers mixing weight " << x_eff
        << " but the construction needs " << needed;
    throw Error(ErrorCode::ConditionNotMet, out.str());
  }

  // Kraus form: sqrt(lambda_a) |s_a><psi| prepares the target off the input
  // direction; sqrt(mu_b) |m_b><q_c| over an orthonormal basis q_c of the
  // orthogonal complement prepares the supplement.
  std::vector<Matrix> kraus;
  Eigen::SelfAdjointEigenSolver<Matrix> es_sigma(sigma.mat);
  for (int a = 0; a < d; ++a) {
    const double lam = es_sigma.eigenvalues()(a);
    if (lam < 1e-14) continue;
    kraus.push_back(std::sqrt(lam) * es_sigma.eigenvectors().col(a) *
                    data.unit.adjoint());
  }
  Eigen::HouseholderQR<Matrix> qr(data.unit);
  Matrix q = qr.householderQ();
  Eigen::SelfAdjointEigenSolver<Matrix> es_mixer(mixer.mat);
  for (int b = 0; b < d; ++b) {
    const double mu = es_mixer.eigenvalues()(b);
    if (mu < 1e-14) continue;
    for (int c = 1; c < d; ++c) {
      kraus.push_back(std::sqrt(mu) * es_mixer.eigenvectors().col(b) *
                      q.col(c).adjoint());
    }
  }

  TransformChannel tc{Channel::from_kraus(dims, dims, std::move(kraus)),
                      std::move(mixer), x_eff, std::move(data.plan)};
  return tc;
}

TransformAudit audit_transform(const FreeSetModel& model,
                               const TransformChannel& tc, const Vector& psi,
                               const DensityMatrix& sigma, int trials,
                               Rng& rng) {
  const Vector unit = psi / psi.norm();
  TransformAudit audit;
  audit.trials = trials;
  Matrix mapped =
      qmath::apply_channel_matrix(tc.channel, (unit * unit.adjoint()).eval());
  audit.target_error = qmath::trace_norm(mapped - sigma.mat);
  audit.worst_margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    DensityMatrix in = model.sample_free(rng);
    Matrix out = qmath::apply_channel_matrix(tc.channel, in.mat);
    auto report =
        model.membership(DensityMatrix(out, model.state_dims()), 1e-8);
    audit.worst_margin = std::min(audit.worst_margin, report.margin);
    if (report.verdict == Membership::NotFree) audit.outputs_free = false;
  }
  return audit;
}

}  // namespace rno::transform
