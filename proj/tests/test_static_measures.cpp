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
#include "rno/dynamic_measures.hpp"

#include <cmath>

#include "doctest.h"

using namespace rno;
using namespace rno::qmath;
using namespace rno::freesets;
using namespace rno::static_measures;
namespace dynamic_measures = rno::dynamic_measures;

namespace {

DensityMatrix plus_state() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return DensityMatrix::from_pure(v, {2});
}

}  // namespace

TEST_CASE("generalized robustness of the plus state is one") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  RobustnessResult r = generalized_robustness(inc, plus_state());
  REQUIRE(r.status == conic::SolveStatus::Optimal);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.log2_value == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.exact_model);
  // The optimal dominating matrix here is the identity.
  CHECK((r.witness_t - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("pure-state robustness matches the amplitude closed form") {
  // For a pure state against the incoherent model the robustness equals
  // (sum_i |c_i|)^2 - 1; this is an independent check of the solver path.
  FreeSetModel inc = FreeSetModel::incoherent(3);
  Rng rng(101);
  for (int trial = 0; trial < 4; ++trial) {
    Vector psi = sample_pure_vector(3, rng);
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += std::abs(psi(i));
    const double expected = s * s - 1.0;
    DensityMatrix rho = DensityMatrix::from_pure(psi, {3});
    RobustnessResult r = generalized_robustness(inc, rho);
    REQUIRE(r.status == conic::SolveStatus::Optimal);
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-4));
  }
}

TEST_CASE("standard robustness of a coherent state is infinite") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  RobustnessResult r = standard_robustness(inc, plus_state());
  CHECK(r.status == conic::SolveStatus::Infeasible);
  CHECK(std::isinf(r.value));
  CHECK(std::isinf(r.log2_value));
}

TEST_CASE("diagonal states have zero robustness of every flavor") {
  FreeSetModel inc = FreeSetModel::incoherent(3);
  Rng rng(7);
  DensityMatrix diag = inc.sample_free(rng);
  CHECK(generalized_robustness(inc, diag).value ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(standard_robustness(inc, diag).value ==
        doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("Bell state robustness is one for both quantifiers") {
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  DensityMatrix bell = max_entangled_state(2);
  RobustnessResult gen = generalized_robustness(sep, bell);
  REQUIRE(gen.status == conic::SolveStatus::Optimal);
  CHECK(gen.value == doctest::Approx(1.0).epsilon(1e-5));
  RobustnessResult std_r = standard_robustness(sep, bell);
  REQUIRE(std_r.status == conic::SolveStatus::Optimal);
  CHECK(std_r.value == doctest::Approx(1.0).epsilon(1e-5));
  // The standard witness decomposes rho = (1+s) tau - s omega with free
  // parts; check T and T - rho pass membership loosely.
  DensityMatrix t_state(std_r.witness_t / std_r.witness_t.trace().real(),
                        {2, 2});
  CHECK(sep.is_free(t_state, 1e-5));
}

TEST_CASE("werner boundary state has vanishing robustness") {
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  RobustnessResult r = generalized_robustness(sep, werner_state(1.0 / 3.0));
  REQUIRE(r.status == conic::SolveStatus::Optimal);
  CHECK(r.value <= 2e-5);
}

TEST_CASE("generalized never exceeds standard robustness") {
  Rng rng(23);
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  for (int trial = 0; trial < 3; ++trial) {
    DensityMatrix rho = sample_state({2, 2}, rng);
    const double gen = generalized_robustness(sep, rho).value;
    const double std_r = standard_robustness(sep, rho).value;
    CHECK(gen <= std_r + 1e-5);
  }
}

TEST_CASE("two-copy Bell robustness against the transpose battery") {
  // Twirling over local unitaries and the copy swap reduces this program to
  // a three-variable LP over span{P⊗P, P⊗Q+Q⊗P, Q⊗Q} with P the Bell
  // projector and Q = (I-P)/3.  Writing T=(x,y,z) and the supplement
  // T-rho=(x-1,y,z), the transpose battery demands y>=x, z>=y and
  // a-2b+c>=0 for each vector (a,b,c); at the forced x=1 the supplement
  // gives z>=2y, so tr T = x+2y+z is minimized at (1,1,2) with value 5.
  FreeSetModel sep2 = FreeSetModel::separable_ppt(2, 2).tensor_power(2);
  Matrix bell = max_entangled_state(2).mat;
  DensityMatrix two(kron(bell, bell), {2, 2, 2, 2});
  RobustnessResult r = standard_robustness(sep2, two);
  REQUIRE(r.status == conic::SolveStatus::Optimal);
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-4));
  CHECK_FALSE(r.exact_model);
}

TEST_CASE("werner standard robustness follows the twirl line") {
  // Twirl-invariant T = a P + b (I-P)/3 with P the singlet projector must
  // satisfy b >= a (partial transpose) for both T and T - rho; writing the
  // werner state in that basis as ((1+3w)/4, 3(1-w)/4) forces
  // tr T = (1+3w)/2, hence value (3w-1)/2 for w above the separable edge.
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  for (double w : {0.4, 0.5, 0.7}) {
    RobustnessResult r = standard_robustness(sep, werner_state(w));
    REQUIRE(r.status == conic::SolveStatus::Optimal);
    CHECK(r.value == doctest::Approx((3.0 * w - 1.0) / 2.0).epsilon(2e-4));
  }
}

TEST_CASE("smoothing with zero radius reproduces the plain value") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  DensityMatrix rho = plus_state();
  RobustnessResult plain = generalized_robustness(inc, rho);
  RobustnessResult sm = smoothed_generalized_robustness(inc, rho, 0.0);
  REQUIRE(sm.status == conic::SolveStatus::Optimal);
  CHECK(sm.value == doctest::Approx(plain.value).epsilon(1e-4));
}

TEST_CASE("smoothed robustness is monotone in the radius") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  DensityMatrix rho = plus_state();
  double prev = generalized_robustness(inc, rho).value;
  for (double eps : {0.05, 0.1, 0.2, 0.4}) {
    RobustnessResult sm = smoothed_generalized_robustness(inc, rho, eps);
    REQUIRE(sm.status == conic::SolveStatus::Optimal);
    CHECK(sm.value <= prev + 1e-5);
    prev = sm.value;
  }
  // With radius 1/2 a diagonal state enters the ball and smoothing hits 0.
  RobustnessResult at_half = smoothed_generalized_robustness(inc, rho, 0.55);
  CHECK(at_half.value <= 1e-4);
}

TEST_CASE("smoothed standard robustness keeps the infeasible regime") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  DensityMatrix rho = plus_state();
  // The closest diagonal state sits at trace distance 1/2 (so eps = 1/2).
  RobustnessResult far = smoothed_standard_robustness(inc, rho, 0.1);
  CHECK(far.status == conic::SolveStatus::Infeasible);
  CHECK(std::isinf(far.value));
  RobustnessResult near = smoothed_standard_robustness(inc, rho, 0.55);
  REQUIRE(near.status == conic::SolveStatus::Optimal);
  CHECK(near.value <= 1e-4);
}

TEST_CASE("smoothed separable robustness shrinks for the Bell state") {
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  DensityMatrix bell = max_entangled_state(2);
  RobustnessResult sm = smoothed_generalized_robustness(sep, bell, 0.1);
  REQUIRE(sm.status == conic::SolveStatus::Optimal);
  CHECK(sm.value < 1.0 - 1e-3);
  CHECK(sm.value > 0.0);
}

TEST_CASE("geometric measure closed forms") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  Vector plus(2);
  plus << 1.0, 1.0;  // normalized internally
  GeometricResult g = geometric_measure_pure(inc, plus);
  CHECK(g.value == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(g.exact);

  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  GeometricResult gb = geometric_measure_pure(sep, max_entangled_vector(2));
  CHECK(gb.value ==
        doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-12));

  GeometricResult gz =
      geometric_measure_pure(inc, Vector(basis_vector(2, 0)));
  CHECK(gz.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("robustness is faithful on sampled states") {
  Rng rng(31);
  for (FreeSetModel model :
       {FreeSetModel::incoherent(3), FreeSetModel::separable_ppt(2, 2)}) {
    DensityMatrix free_state = model.sample_free(rng);
    CHECK(generalized_robustness(model, free_state).value <= 1e-5);
    DensityMatrix res = model.sample_not_free(rng, 0.01);
    CHECK(generalized_robustness(model, res).value > 1e-7);
  }
}

TEST_CASE("the solver decomposition returns a mixer and a free witness") {
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix bell = max_entangled_state(2);
  RobustnessResult r = generalized_robustness(sep, bell);
  REQUIRE(r.status == conic::SolveStatus::Optimal);
  const std::vector<int> dims = sep.state_dims();

  // Mixing rho with value parts of the mixer lands inside the free set.
  const Matrix blended =
      (bell.mat + r.value * r.mixer) / (1.0 + r.value);
  CHECK(sep.is_free(DensityMatrix(blended, dims), 1e-6));
  CHECK(sep.is_free(DensityMatrix(r.free_witness, dims), 1e-6));
  CHECK((blended - r.free_witness).cwiseAbs().maxCoeff() < 1e-5);

  // A free input gets the trivial decomposition.
  RobustnessResult zero = generalized_robustness(sep, maximally_mixed({2, 2}));
  CHECK(zero.value == doctest::Approx(0.0).epsilon(1e-6));
  CHECK((zero.mixer - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("the standard mixer keeps absorbing the state beyond the optimum") {
  // With a free supplement sigma at the optimal r, every s >= r also lands
  // (rho + s sigma)/(1+s) in the free set: the extra weight only dilutes.
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix rho = werner_state(0.6);
  RobustnessResult r = standard_robustness(sep, rho);
  REQUIRE(r.status == conic::SolveStatus::Optimal);
  REQUIRE(std::isfinite(r.value));
  CHECK(sep.is_free(DensityMatrix(r.mixer, sep.state_dims()), 1e-6));
  for (double s : {r.value + 0.1, r.value + 1.0}) {
    const Matrix blended = (rho.mat + s * r.mixer) / (1.0 + s);
    CHECK(sep.is_free(DensityMatrix(blended, sep.state_dims()), 1e-6));
  }
}

TEST_CASE("nearby states need at most the same robustness at twice the radius") {
  // If rho and sigma are within trace distance eps, any smoothing ball of
  // radius eps around rho sits inside the radius-2eps ball around sigma.
  FreeSetModel inc = FreeSetModel::incoherent(2);
  Rng rng(21);
  for (int t = 0; t < 4; ++t) {
    const DensityMatrix rho = sample_state({2}, rng);
    const DensityMatrix noise = inc.sample_free(rng);
    const double lambda = rng.uniform(0.05, 0.3);
    const DensityMatrix sigma(
        (1.0 - lambda) * rho.mat + lambda * noise.mat, std::vector<int>{2});
    const double eps = 0.5 * trace_norm(rho.mat - sigma.mat);
    const double at_rho =
        smoothed_generalized_robustness(inc, rho, eps).value;
    const double at_sigma =
        smoothed_generalized_robustness(inc, sigma, 2.0 * eps).value;
    CHECK(at_sigma <= at_rho + 1e-6);
  }
}

TEST_CASE("log-robustness is subadditive under tensoring") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  FreeSetModel inc2 = inc.tensor_power(2);
  Rng rng(22);
  for (int t = 0; t < 3; ++t) {
    const DensityMatrix rho = sample_state({2}, rng);
    const DensityMatrix doubled(kron(rho.mat, rho.mat), inc2.state_dims());
    const double single = generalized_robustness(inc, rho).log2_value;
    const double both = generalized_robustness(inc2, doubled).log2_value;
    CHECK(both <= 2.0 * single + 1e-5);
  }
  // The Bell state saturates it against the transpose battery: one copy has
  // log-robustness 1 and the two-copy program reaches exactly 2.
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  FreeSetModel sep2 = sep.tensor_power(2);
  const DensityMatrix bell = max_entangled_state(2);
  const DensityMatrix bell2(kron(bell.mat, bell.mat), sep2.state_dims());
  const double single = generalized_robustness(sep, bell).log2_value;
  const double both = generalized_robustness(sep2, bell2).log2_value;
  CHECK(both <= 2.0 * single + 1e-5);
  CHECK(both == doctest::Approx(2.0).epsilon(2e-4));
}

TEST_CASE("pure-state standard and generalized robustness coincide") {
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  Rng rng(23);
  for (int t = 0; t < 6; ++t) {
    const DensityMatrix psi = sample_pure_state({2, 2}, rng);
    const double gen = generalized_robustness(sep, psi).value;
    const double std_r = standard_robustness(sep, psi).value;
    REQUIRE(std::isfinite(std_r));
    CHECK(std::abs(gen - std_r) <= 1e-5);
  }
}

TEST_CASE("axiom suite stays within tolerance on both models") {
  for (Quantifier q : {Quantifier::Generalized, Quantifier::Standard}) {
    AxiomReport inc =
        quantifier_axiom_suite(FreeSetModel::incoherent(2), q, 20, 31);
    CAPTURE(quantifier_name(q));
    CHECK(inc.max_violation() <= 1e-5);
    CHECK(inc.vanishes_on_free.checks == 20);
    CHECK(inc.monotone.checks == 20);
    CHECK(inc.faithful.checks == 20);
    CHECK(inc.convex.checks == 20);

    AxiomReport sep =
        quantifier_axiom_suite(FreeSetModel::separable_ppt(2, 2), q, 12, 32);
    CHECK(sep.max_violation() <= 1e-5);
    CHECK(sep.monotone.checks == 12);
  }
}

TEST_CASE("nearly free channels cannot raise the smoothed robustness") {
  // A channel within diamond distance eps of a certified free channel sends
  // rho to within trace distance eps of a free image, so the eps-smoothed
  // robustness of the output never beats the plain robustness of the input.
  FreeSetModel inc = FreeSetModel::incoherent(2);
  Rng rng(24);
  Channel m = inc.sample_free_channel(rng);
  Channel drift = sample_channel({2}, {2}, 2, rng);
  Channel lambda = mix_channels({m, drift}, {0.9, 0.1});
  const double eps = dynamic_measures::diamond_distance(lambda, m);
  REQUIRE(eps > 0.0);
  REQUIRE(eps < 0.5);
  for (int t = 0; t < 4; ++t) {
    const DensityMatrix rho = sample_state({2}, rng);
    const double before = generalized_robustness(inc, rho).value;
    Matrix out = apply_channel_matrix(lambda, rho.mat);
    out = 0.5 * (out + out.adjoint()).eval();
    const DensityMatrix moved(out, std::vector<int>{2});
    const double after =
        smoothed_generalized_robustness(inc, moved, eps).value;
    CHECK(after <= before + 1e-5);
  }
}
