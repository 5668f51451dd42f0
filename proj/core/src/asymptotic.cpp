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

#include "rno/asymptotic.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rno/errors.hpp"

namespace rno::asymptotic {
namespace {

constexpr int kDimensionGuard = 16;

// rho^(x)n together with the matching n-copy model; enforces the guard.
struct CopySetup {
  FreeSetModel model;
  DensityMatrix state;
};

CopySetup make_copies(const FreeSetModel& m, const DensityMatrix& rho, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidRequest, "n must be at least 1");
  const FreeSetModel model_n = m.tensor_power(n);
  long long dim = 1;
  for (int d : model_n.state_dims()) dim *= d;
  if (dim > kDimensionGuard)
    throw Error(ErrorCode::TooLarge,
                "n-copy space exceeds the dimension guard of " +
                    std::to_string(kDimensionGuard));
  Matrix full = rho.mat;
  for (int i = 1; i < n; ++i) full = qmath::kron(full, rho.mat);
  return {model_n, DensityMatrix(full, model_n.state_dims())};
}

// floor of the unit count with a small nudge against solver noise sitting
// just below an integer.
int unit_count(const FreeSetModel& m, double standard_value) {
  const double raw = m.overlap_bound_c_inverse(1.0 / (1.0 + standard_value));
  return static_cast<int>(std::floor(raw + 1e-6));
}

}  // namespace

double cost_lower_bound(const FreeSetModel& m, const DensityMatrix& rho, int n,
                        double eps, const CostOptions& opts) {
  if (!(eps >= 0.0 && eps <= 0.2))
    throw Error(ErrorCode::InvalidRequest,
                "smoothing radius must lie in [0, 0.2]");
  const CopySetup setup = make_copies(m, rho, n);
  const auto result =
      eps == 0.0
          ? static_measures::generalized_robustness(setup.model, setup.state,
                                                    opts.solve)
          : static_measures::smoothed_generalized_robustness(
                setup.model, setup.state, eps, opts.solve);
  return result.log2_value / static_cast<double>(n);
}

double cost_upper_bound(const FreeSetModel& m, const DensityMatrix& rho, int n,
                        const CostOptions& opts) {
  const CopySetup setup = make_copies(m, rho, n);
  const auto result =
      static_measures::standard_robustness(setup.model, setup.state, opts.solve);
  if (!std::isfinite(result.value))
    return std::numeric_limits<double>::infinity();
  return static_cast<double>(unit_count(m, result.value)) /
         static_cast<double>(n);
}

CostBoundReport cost_bounds(const FreeSetModel& m, const DensityMatrix& rho,
                            int n, double eps, const CostOptions& opts) {
  CostBoundReport report;
  report.n = n;
  report.eps = eps;
  report.lower_bound = cost_lower_bound(m, rho, n, eps, opts);
  report.upper_bound = cost_upper_bound(m, rho, n, opts);
  report.vacuous = !std::isfinite(report.upper_bound);
  return report;
}

PreparationBuildReport build_preparation_channel(const FreeSetModel& m,
                                                 const DensityMatrix& rho,
                                                 int n, int samples,
                                                 std::uint64_t seed,
                                                 const CostOptions& opts) {
  const CopySetup setup = make_copies(m, rho, n);
  const auto standard =
      static_measures::standard_robustness(setup.model, setup.state, opts.solve);
  if (!std::isfinite(standard.value))
    throw Error(ErrorCode::ConditionNotMet,
                "standard robustness diverged; the preparation bound is "
                "vacuous for this state");

  PreparationBuildReport report;
  report.k_n = unit_count(m, standard.value);
  const std::vector<int> out_dims = setup.model.state_dims();

  if (report.k_n == 0) {
    // Free targets need no resource input: a preparation from the trivial
    // one-dimensional space.
    report.channel = Channel::from_choi({1}, out_dims, setup.state.mat);
    report.reconstruction_error = 0.0;
    report.free_samples = 1;
    const auto verdict = setup.model.membership(setup.state);
    const bool ok = verdict.verdict == freesets::Membership::Free ||
                    verdict.verdict == freesets::Membership::NecessaryOnlyPass;
    report.free_passes = ok ? 1 : 0;
    report.necessary_only =
        verdict.verdict == freesets::Membership::NecessaryOnlyPass;
    return report;
  }

  report.overlap_cap = m.overlap_bound_c(report.k_n);
  const FreeSetModel in_model = m.tensor_power(report.k_n);
  long long in_dim = 1;
  for (int d : in_model.state_dims()) in_dim *= d;
  if (in_dim > kDimensionGuard)
    throw Error(ErrorCode::TooLarge,
                "resource input space exceeds the dimension guard");

  const DensityMatrix resource = m.max_resource_state(report.k_n);
  const Matrix projector = resource.mat;
  const Matrix eye = Matrix::Identity(projector.rows(), projector.cols());
  // pi_n is the standard-robustness mixer: mixing rho^(x)n with it lands in
  // the free set, which is exactly what the failure branch must emit.
  const Matrix& pi_n = standard.mixer;

  // Choi of X -> tr[X P] target + tr[X (I-P)] pi in the input-major layout.
  const Matrix choi = qmath::kron(projector.transpose(), setup.state.mat) +
                      qmath::kron(eye - projector.transpose(), pi_n);
  report.channel =
      Channel::from_choi(in_model.state_dims(), out_dims, choi);

  const Matrix reproduced =
      qmath::apply_channel_matrix(report.channel, projector);
  report.reconstruction_error =
      (reproduced - setup.state.mat).cwiseAbs().maxCoeff();
  if (report.reconstruction_error > 1e-9)
    throw Error(ErrorCode::SolverError,
                "preparation channel failed to reproduce its target");

  qmath::Rng rng(seed);
  report.free_samples = samples;
  for (int s = 0; s < samples; ++s) {
    const DensityMatrix eta = in_model.sample_free(rng);
    const double overlap =
        std::real((eta.mat * projector).trace());
    report.max_overlap = std::max(report.max_overlap, overlap);
    if (overlap > report.overlap_cap + 1e-9)
      throw Error(ErrorCode::HypothesisViolated,
                  "a sampled free input overlapped the resource state beyond "
                  "the model envelope");
    Matrix out = qmath::apply_channel_matrix(report.channel, eta.mat);
    out = (0.5 * (out + out.adjoint())).eval();
    const auto verdict =
        setup.model.membership(DensityMatrix(out, out_dims));
    if (verdict.verdict == freesets::Membership::Free) {
      ++report.free_passes;
    } else if (verdict.verdict == freesets::Membership::NecessaryOnlyPass) {
      ++report.free_passes;
      report.necessary_only = true;
    }
  }
  return report;
}

}  // namespace rno::asymptotic
