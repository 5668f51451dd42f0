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

#include "rno/dynamic_measures.hpp"

#include <cmath>

#include "doctest.h"
#include "rno/freesets.hpp"
#include "rno/qmath.hpp"

using namespace rno;
using namespace rno::qmath;
using namespace rno::dynamic_measures;
using rno::freesets::ChannelVerdict;
using rno::freesets::FreeSetModel;

namespace {

Channel hadamard_channel() {
  Matrix h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return unitary_channel(h);
}

Channel plus_replacement() {
  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return replacement_channel(DensityMatrix::from_pure(plus, {2}), {2});
}

}  // namespace

TEST_CASE("diamond distance on the reference pairs") {
  Channel id2 = identity_channel({2});
  CHECK(diamond_distance(id2, id2) == 0.0);

  Matrix z(2, 2);
  z << 1.0, 0.0, 0.0, -1.0;
  CHECK(diamond_distance(id2, unitary_channel(z)) ==
        doctest::Approx(1.0).epsilon(1e-6));

  CHECK(diamond_distance(id2, dephasing_channel(2)) ==
        doctest::Approx(0.5).epsilon(1e-6));

  CHECK_THROWS_AS(diamond_distance(id2, identity_channel({3})), Error);
}

TEST_CASE("diamond distance dominates variational and output bounds") {
  Rng rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    Channel a = sample_channel({2}, {2}, 2, rng);
    Channel b = sample_channel({2}, {2}, 2, rng);
    const double value = diamond_distance(a, b);
    for (int k = 0; k < 5; ++k) {
      CHECK(diamond_lower_bound(a, b, sample_ginibre(2, 2, rng)) <=
            value + 1e-6);
    }
    // Outputs of any stabilized input stay within the diamond bound.
    for (int k = 0; k < 5; ++k) {
      DensityMatrix rho = sample_state({2, 2}, rng);
      DensityMatrix out_a = apply_channel(a, rho, {1});
      DensityMatrix out_b = apply_channel(b, rho, {1});
      CHECK(0.5 * trace_norm(out_a.mat - out_b.mat) <= value + 1e-6);
    }
  }
}

TEST_CASE("a bystander factor does not increase diamond distance") {
  Rng rng(12);
  for (int trial = 0; trial < 2; ++trial) {
    Channel q = sample_channel({2}, {2}, 2, rng);
    Channel n1 = sample_channel({2}, {2}, 2, rng);
    Channel n2 = sample_channel({2}, {2}, 2, rng);
    const double plain = diamond_distance(n1, n2);
    const double dressed =
        diamond_distance(tensor_channels(q, n1), tensor_channels(q, n2));
    CHECK(dressed <= plain + 1e-5);
  }
}

TEST_CASE("channel robustness is exactly one on the free family") {
  Rng rng(13);
  std::vector<Channel> free_family = {
      dephasing_channel(2), depolarizing_channel(2, 0.7),
      FreeSetModel::incoherent(2).sample_free_channel(rng),
      FreeSetModel::incoherent(3).sample_free_channel(rng)};
  for (const Channel& ch : free_family) {
    ChannelRobustnessResult r = channel_rno_robustness(ch);
    CHECK(r.p_star == 1.0);
    CHECK(r.resulting_free.choi.rows() == ch.choi.rows());
  }
}

TEST_CASE("the Hadamard gate mixes to free at exactly one half") {
  ChannelRobustnessResult r = channel_rno_robustness(hadamard_channel());
  CHECK(r.p_star == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.solver_residual <= 1e-6);
  CHECK(r.reconstruction_residual <= 1e-6);
  // The certified mixture really is a free channel.
  auto cert = freesets::FreeSetModel::incoherent(2).is_rno_channel(
      r.resulting_free, 1e-6);
  CHECK(cert.verdict == ChannelVerdict::Free);
}

TEST_CASE("the plus replacement mixes against its phase-flipped twin") {
  ChannelRobustnessResult r = channel_rno_robustness(plus_replacement());
  CHECK(r.p_star == doctest::Approx(0.5).epsilon(1e-6));
  // At the optimum the companion must send every basis state to the minus
  // state: its off-diagonal is forced to cancel the plus coherence and the
  // modulus-half coherence pins the diagonal.
  Vector minus(2);
  minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  const Matrix target = minus * minus.adjoint();
  for (int i = 0; i < 2; ++i) {
    Matrix basis = Matrix::Zero(2, 2);
    basis(i, i) = 1.0;
    const Matrix sent = apply_channel_matrix(r.companion, basis);
    CHECK((sent - target).cwiseAbs().maxCoeff() <= 1e-4);
  }
}

TEST_CASE("robustness reaches one exactly when the certificate passes") {
  Rng rng(14);
  std::vector<Channel> probes = {
      dephasing_channel(2), hadamard_channel(), plus_replacement(),
      depolarizing_channel(2, 0.3),
      unitary_channel(sample_unitary(2, rng))};
  FreeSetModel inc = FreeSetModel::incoherent(2);
  for (const Channel& ch : probes) {
    const bool free = inc.is_rno_channel(ch, 1e-6).verdict ==
                      ChannelVerdict::Free;
    const double p = channel_rno_robustness(ch).p_star;
    if (free) {
      CHECK(p == 1.0);
    } else {
      CHECK(p < 1.0 - 1e-6);
    }
  }
}

TEST_CASE("divergence to the free family hits the frozen oracles") {
  CHECK(channel_divergence_to_free(dephasing_channel(2)) == 0.0);

  const double hadamard = channel_divergence_to_free(hadamard_channel());
  CHECK(hadamard == doctest::Approx(1.0).epsilon(1e-5));

  // Tensoring a free bystander leaves the divergence unchanged.
  const double dressed = channel_divergence_to_free(
      tensor_channels(hadamard_channel(), dephasing_channel(2)));
  CHECK(dressed == doctest::Approx(hadamard).epsilon(1e-5));

  Matrix rot(2, 2);
  rot << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
  CHECK(channel_divergence_to_free(unitary_channel(rot)) > 1e-3);
}

TEST_CASE("both channel measures are monotone under free pre and post maps") {
  Rng rng(15);
  FreeSetModel inc = FreeSetModel::incoherent(2);
  const Channel e = hadamard_channel();
  const double base_p = channel_rno_robustness(e).p_star;
  const double base_f = channel_divergence_to_free(e);
  for (int trial = 0; trial < 3; ++trial) {
    Channel pre = inc.sample_free_channel(rng);
    Channel post = inc.sample_free_channel(rng);
    Channel dressed = compose_channels(post, compose_channels(e, pre));
    CHECK(channel_rno_robustness(dressed).p_star >= base_p - 1e-5);
    CHECK(channel_divergence_to_free(dressed) <= base_f + 1e-5);
  }
}

TEST_CASE("smoothing the channel robustness is flagged and monotone") {
  SmoothingConfig cfg;
  cfg.restarts = 8;
  cfg.seed = 5;
  const Channel h = hadamard_channel();
  const std::vector<double> grid = {0.0, 0.05, 0.1, 0.2};
  auto sweep = smoothed_channel_sweep(h, grid, cfg);
  REQUIRE(sweep.size() == grid.size());

  const double exact = channel_rno_robustness(h).p_star;
  CHECK(sweep[0].upper_estimate == doctest::Approx(exact).epsilon(1e-6));
  for (size_t k = 0; k + 1 < sweep.size(); ++k) {
    CHECK(sweep[k + 1].upper_estimate <= sweep[k].upper_estimate + 1e-12);
  }
  for (size_t k = 0; k < sweep.size(); ++k) {
    CHECK(sweep[k].heuristic);
    CHECK(sweep[k].witness_distance <= grid[k] + 1e-9);
  }
  // The last witness really sits inside its ball.
  CHECK(diamond_distance(sweep.back().witness, h) <= grid.back() + 1e-6);

  // A free channel with coherent neighbours smooths strictly below one.
  auto nudged = smoothed_channel_robustness(dephasing_channel(2), 0.1, cfg);
  CHECK(nudged.upper_estimate < 1.0 - 1e-3);

  CHECK_THROWS_AS(smoothed_channel_robustness(h, 1.0, cfg), Error);
  CHECK_THROWS_AS(smoothed_channel_robustness(h, -0.1, cfg), Error);
}

TEST_CASE("every dynamic solve closes its KKT conditions") {
  int solves = 0;
  double worst = 0.0;
  conic::set_solve_observer([&](const conic::SdpProblem& prob,
                                const conic::SolveResult& res) {
    ++solves;
    auto kkt = conic::check_kkt(prob, res);
    worst = std::max({worst, kkt.primal_residual, kkt.dual_residual,
                      std::abs(kkt.gap)});
  });
  diamond_distance(identity_channel({2}), dephasing_channel(2));
  channel_rno_robustness(hadamard_channel());
  channel_divergence_to_free(hadamard_channel());
  conic::clear_solve_observer();
  CHECK(solves >= 3);
  CHECK(worst <= 1e-5);
}
