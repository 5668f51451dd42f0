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
#include <vector>

#include "doctest.h"
#include "rno/conic.hpp"
#include "rno/errors.hpp"
#include "rno/qmath.hpp"
#include "rno/static_measures.hpp"

using namespace rno;
using namespace rno::qmath;
using namespace rno::asymptotic;
using rno::freesets::FreeSetModel;
using rno::freesets::Membership;

namespace {

DensityMatrix two_copies(const DensityMatrix& rho) {
  std::vector<int> dims = rho.dims;
  dims.insert(dims.end(), rho.dims.begin(), rho.dims.end());
  return DensityMatrix(kron(rho.mat, rho.mat), dims);
}

}  // namespace

TEST_CASE("one Bell pair costs exactly one unit") {
  const FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix bell = sep.max_resource_state(1);

  CHECK(cost_lower_bound(sep, bell, 1, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-4));
  CHECK(cost_upper_bound(sep, bell, 1) == doctest::Approx(1.0));

  const auto report = cost_bounds(sep, bell, 1, 0.0);
  CHECK(report.n == 1);
  CHECK(report.eps == 0.0);
  CHECK(!report.vacuous);
  CHECK(report.lower_bound <= report.upper_bound + 1e-4);
}

TEST_CASE("two Bell pairs still cost one unit per copy") {
  const FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix bell = sep.max_resource_state(1);

  CostOptions opts;
  opts.solve.tol = 1e-6;
  CHECK(cost_lower_bound(sep, bell, 2, 0.0, opts) ==
        doctest::Approx(1.0).epsilon(1e-4));
  CHECK(cost_upper_bound(sep, bell, 2, opts) == doctest::Approx(1.0));
}

TEST_CASE("the uniform superposition has a vacuous preparation bound") {
  const FreeSetModel coh = FreeSetModel::incoherent(2);
  const DensityMatrix plus = coh.max_resource_state(1);

  CHECK(cost_lower_bound(coh, plus, 1, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-4));

  // No free mixer can absorb a coherent state, so the standard robustness
  // diverges and the unit-count bound says nothing.
  const auto report = cost_bounds(coh, plus, 1, 0.0);
  CHECK(std::isinf(report.upper_bound));
  CHECK(report.vacuous);
  CHECK(report.lower_bound == doctest::Approx(1.0).epsilon(1e-4));

  CHECK_THROWS_AS(build_preparation_channel(coh, plus, 1), Error);
  try {
    build_preparation_channel(coh, plus, 1);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::ConditionNotMet);
  }
}

TEST_CASE("free states cost nothing at either end") {
  Rng rng(41);
  const FreeSetModel coh = FreeSetModel::incoherent(2);
  const FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  for (const auto& model : {coh, sep}) {
    const DensityMatrix rho = model.sample_free(rng);
    CHECK(cost_lower_bound(model, rho, 1, 0.0) <= 1e-6);
    CHECK(cost_upper_bound(model, rho, 1) == 0.0);
  }
}

TEST_CASE("smoothing lowers the lower bound and respects the guard rails") {
  const FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix bell = sep.max_resource_state(1);

  double previous = 2.0;
  for (double eps : {0.0, 0.05, 0.1, 0.2}) {
    const double value = cost_lower_bound(sep, bell, 1, eps);
    CHECK(value <= previous + 1e-7);
    previous = value;
  }

  CHECK_THROWS_AS(cost_lower_bound(sep, bell, 1, 0.25), Error);
  CHECK_THROWS_AS(cost_lower_bound(sep, bell, 1, -0.01), Error);
  // 3 copies of a two-qubit space blow the dimension guard.
  CHECK_THROWS_AS(cost_lower_bound(sep, bell, 3, 0.0), Error);
  CHECK_THROWS_AS(cost_upper_bound(sep, bell, 3), Error);
  try {
    cost_upper_bound(sep, bell, 3);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("the preparation channel reproduces one Bell pair from one unit") {
  const FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix bell = sep.max_resource_state(1);

  const auto report = build_preparation_channel(sep, bell, 1, 200, 9);
  CHECK(report.k_n == 1);
  CHECK(report.reconstruction_error <= 1e-9);
  CHECK(report.overlap_cap == doctest::Approx(0.5));
  CHECK(report.max_overlap <= report.overlap_cap + 1e-9);
  CHECK(report.free_samples == 200);
  CHECK(report.free_passes == 200);
  CHECK(!report.necessary_only);  // single-copy membership is exact here

  // Feeding the resource state through the channel returns the target.
  const Matrix out = apply_channel_matrix(report.channel, bell.mat);
  CHECK((out - bell.mat).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("a free target is prepared from nothing") {
  Rng rng(43);
  const FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix freebie = sep.sample_free(rng);

  const auto report = build_preparation_channel(sep, freebie, 1, 50, 7);
  CHECK(report.k_n == 0);
  CHECK(report.channel.in_dim() == 1);
  CHECK(report.reconstruction_error <= 1e-9);
  CHECK(report.free_passes == report.free_samples);
  CHECK((report.channel.choi - freebie.mat).cwiseAbs().maxCoeff() <= 1e-9);

  // Same story for a diagonal state in the coherence model, where the
  // standard robustness of a free state is finite (zero).
  const FreeSetModel coh = FreeSetModel::incoherent(2);
  const DensityMatrix diag = coh.sample_free(rng);
  const auto coh_report = build_preparation_channel(coh, diag, 1, 50, 7);
  CHECK(coh_report.k_n == 0);
  CHECK(coh_report.free_passes == coh_report.free_samples);
}

TEST_CASE("two Bell pairs are prepared from two units") {
  const FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix bell = sep.max_resource_state(1);
  const DensityMatrix bell2 = two_copies(bell);

  CostOptions opts;
  opts.solve.tol = 1e-6;
  const auto report = build_preparation_channel(sep, bell, 2, 40, 11, opts);
  CHECK(report.k_n == 2);
  CHECK(report.reconstruction_error <= 1e-9);
  CHECK(report.overlap_cap == doctest::Approx(0.25));
  CHECK(report.max_overlap <= report.overlap_cap + 1e-9);
  CHECK(report.free_passes == report.free_samples);
  CHECK(report.necessary_only);  // two-copy separability is a battery

  // Monotonicity consumed by the lower bound: the resource input carries
  // k units of log-robustness and a free channel cannot create more.
  const auto lr = static_measures::generalized_robustness(
      sep.tensor_power(2), bell2, opts.solve);
  CHECK(lr.log2_value <= report.k_n + 1e-5);
}

TEST_CASE("free samples never overlap the resource state beyond the cap") {
  Rng rng(47);
  const FreeSetModel coh = FreeSetModel::incoherent(2);
  const FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  for (const auto& model : {coh, sep}) {
    for (int k : {1, 2}) {
      const Matrix projector = model.max_resource_state(k).mat;
      const double cap = model.overlap_bound_c(k);
      const FreeSetModel in_model = model.tensor_power(k);
      double worst = 0.0;
      for (int s = 0; s < 50; ++s) {
        const DensityMatrix eta = in_model.sample_free(rng);
        worst = std::max(worst,
                         std::real((eta.mat * projector).trace()));
      }
      CHECK(worst <= cap + 1e-9);
    }
  }
}

TEST_CASE("every cost solve closes its KKT conditions") {
  int solves = 0;
  double worst = 0.0;
  conic::set_solve_observer([&](const conic::SdpProblem& prob,
                                const conic::SolveResult& res) {
    ++solves;
    auto kkt = conic::check_kkt(prob, res);
    worst = std::max({worst, kkt.primal_residual, kkt.dual_residual,
                      std::abs(kkt.gap)});
  });
  const FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix bell = sep.max_resource_state(1);
  cost_bounds(sep, bell, 1, 0.05);
  conic::clear_solve_observer();
  CHECK(solves >= 2);
  CHECK(worst <= 1e-5);
}
