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

#include "doctest.h"

using namespace rno;
using namespace rno::qmath;
using namespace rno::freesets;

TEST_CASE("incoherent membership is the off-diagonal test") {
  FreeSetModel model = FreeSetModel::incoherent(3);
  CHECK(model.membership_exact());
  CHECK(model.dim() == 3);

  Rng rng(1);
  DensityMatrix diag = model.sample_free(rng);
  MembershipReport rep = model.membership(diag);
  CHECK(rep.verdict == Membership::Free);
  CHECK(rep.exact);

  Vector plus(3);
  plus << 1, 1, 1;
  DensityMatrix coherent = DensityMatrix::from_pure(plus, {3});
  rep = model.membership(coherent);
  CHECK(rep.verdict == Membership::NotFree);
  CHECK(-rep.margin == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("separable membership at 2x2 is conclusive") {
  FreeSetModel model = FreeSetModel::separable_ppt(2, 2);
  CHECK(model.membership_exact());
  CHECK(model.pt_subsets().size() == 1);

  MembershipReport bell = model.membership(max_entangled_state(2));
  CHECK(bell.verdict == Membership::NotFree);
  CHECK(bell.margin == doctest::Approx(-0.5).epsilon(1e-10));

  // Werner states are separable exactly up to w = 1/3.
  CHECK(model.membership(werner_state(0.33)).verdict == Membership::Free);
  CHECK(model.membership(werner_state(0.34)).verdict == Membership::NotFree);

  Rng rng(2);
  for (int i = 0; i < 5; ++i) {
    DensityMatrix free_state = model.sample_free(rng);
    CHECK(model.is_free(free_state));
  }
}

TEST_CASE("larger or multi-copy separable verdicts are flagged inexact") {
  FreeSetModel big = FreeSetModel::separable_ppt(3, 3);
  CHECK_FALSE(big.membership_exact());
  Rng rng(3);
  MembershipReport rep = big.membership(big.sample_free(rng));
  CHECK(rep.verdict == Membership::NecessaryOnlyPass);
  CHECK_FALSE(rep.exact);

  FreeSetModel two = FreeSetModel::separable_ppt(2, 2).tensor_power(2);
  CHECK(two.copies == 2);
  CHECK(two.dim() == 16);
  CHECK(two.pt_subsets().size() == 7);  // 2^(2n-1) - 1 at n = 2
  CHECK_FALSE(two.membership_exact());

  // A Bell pair on the first copy is caught by the battery.
  Matrix bell = max_entangled_state(2).mat;
  DensityMatrix sep = two.sample_free(rng);
  Matrix joint = kron(bell, partial_trace(sep.mat, {2, 2, 2, 2}, {2, 3}));
  DensityMatrix state(joint, {2, 2, 2, 2});
  CHECK(two.membership(state).verdict == Membership::NotFree);

  // Free on both copies passes every transpose check.
  CHECK(two.membership(two.sample_free(rng)).verdict ==
        Membership::NecessaryOnlyPass);
}

TEST_CASE("multi-copy incoherent model stays exact") {
  FreeSetModel model = FreeSetModel::incoherent(2).tensor_power(3);
  CHECK(model.membership_exact());
  CHECK(model.dim() == 8);
  Rng rng(4);
  CHECK(model.membership(model.sample_free(rng)).verdict == Membership::Free);
}

TEST_CASE("resourceful sampling respects the requested margin") {
  Rng rng(5);
  FreeSetModel inc = FreeSetModel::incoherent(3);
  DensityMatrix r1 = inc.sample_not_free(rng, 0.05);
  CHECK(-inc.membership(r1).margin >= 0.05);

  FreeSetModel sep = FreeSetModel::separable_ppt(2, 3);
  DensityMatrix r2 = sep.sample_not_free(rng, 0.05);
  CHECK(sep.membership(r2).margin <= -0.05);
}

TEST_CASE("sampled free channels preserve the free set") {
  Rng rng(6);
  for (FreeSetModel model :
       {FreeSetModel::incoherent(3), FreeSetModel::separable_ppt(2, 2)}) {
    for (int trial = 0; trial < 8; ++trial) {
      Channel ch = model.sample_free_channel(rng);
      for (int s = 0; s < 3; ++s) {
        DensityMatrix in = model.sample_free(rng);
        DensityMatrix out(apply_channel_matrix(ch, in.mat),
                          model.state_dims());
        CHECK(model.is_free(out, 1e-8));
      }
    }
  }
}

TEST_CASE("incoherent free channels keep basis projectors diagonal") {
  // The defining test of the maximal incoherence-preserving class: every
  // basis projector must map to a diagonal state.
  Rng rng(7);
  FreeSetModel model = FreeSetModel::incoherent(3);
  for (int trial = 0; trial < 10; ++trial) {
    Channel ch = model.sample_free_channel(rng);
    for (int i = 0; i < 3; ++i) {
      Matrix unit = Matrix::Zero(3, 3);
      unit(i, i) = 1.0;
      Matrix out = apply_channel_matrix(ch, unit);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          if (r != c) CHECK(std::abs(out(r, c)) <= 1e-12);
    }
  }
}

TEST_CASE("free overlap closed forms") {
  Rng rng(8);
  FreeSetModel inc = FreeSetModel::incoherent(2);
  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(inc.max_free_overlap(plus, rng) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  CHECK(sep.max_free_overlap(max_entangled_vector(2), rng) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  // Product states have unit overlap with the free set.
  Vector prod = kron(Matrix(sample_pure_vector(2, rng)),
                     Matrix(sample_pure_vector(2, rng)))
                    .col(0);
  CHECK(sep.max_free_overlap(prod, rng) == doctest::Approx(1.0).epsilon(1e-9));

  // Two Bell copies: alternating maximization reaches the product optimum
  // 1/2, and can never exceed it.
  FreeSetModel sep2 = sep.tensor_power(2);
  Vector bell2 = kron(Matrix(max_entangled_vector(2)),
                      Matrix(max_entangled_vector(2)))
                     .col(0);
  const double overlap = sep2.max_free_overlap(bell2, rng, 12);
  CHECK(overlap <= 0.5 + 1e-9);
  CHECK(overlap == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("partial transpose link rows match the dense operation") {
  Rng rng(9);
  Matrix g = sample_ginibre(4, 4, rng);
  Matrix h = (g + g.adjoint()) / 2.0;
  conic::SdpProblem p;
  const int src = p.add_psd_block(4);
  const int dst = p.add_psd_block(4);
  add_partial_transpose_link(p, dst, src, {2, 2}, {1});
  // Pin src = h (entrywise), then feasibility forces dst = PT(h).
  for (int r = 0; r < 4; ++r)
    for (int c = r; c < 4; ++c) {
      const int row = p.new_row(h(r, c).real());
      p.add_entry(row, src, r, c, 1.0);
      if (r == c) continue;
      const int row_im = p.new_row(h(r, c).imag());
      p.add_entry(row_im, src, r, c, Complex(0.0, -1.0));
    }
  Eigen::MatrixXd a;
  Eigen::VectorXd b, c;
  p.assemble(a, b, c);
  // Build the stacked coordinate vector (svec(h), svec(PT h)) and check
  // every row is satisfied.
  Eigen::VectorXd x(p.num_cols());
  x.segment(0, 16) = conic::svec(h);
  x.segment(16, 16) = conic::svec(partial_transpose(h, {2, 2}, {1}));
  CHECK((a * x - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("maximally resourceful states and the overlap bound") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  const DensityMatrix plus = inc.max_resource_state(1);
  Matrix expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  CHECK((plus.mat - expected).cwiseAbs().maxCoeff() < 1e-12);

  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix bell = sep.max_resource_state(1);
  const Vector phi = max_entangled_vector(2);
  CHECK((bell.mat - Matrix(phi * phi.adjoint())).cwiseAbs().maxCoeff() <
        1e-12);

  // Two copies tensor the single-copy state.
  const DensityMatrix two = sep.max_resource_state(2);
  CHECK((two.mat - kron(bell.mat, bell.mat)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS((void)sep.max_resource_state(0), Error);

  // c(n) = d^-n, strictly decreasing, with a matching inverse.
  CHECK(inc.overlap_bound_c(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(inc.overlap_bound_c(3) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(sep.overlap_bound_c(1) == doctest::Approx(0.5).epsilon(1e-12));
  for (int n = 1; n < 5; ++n)
    CHECK(sep.overlap_bound_c(n + 1) < sep.overlap_bound_c(n));
  CHECK(sep.overlap_bound_c_inverse(sep.overlap_bound_c(3)) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)sep.overlap_bound_c_inverse(0.0), Error);
  CHECK_THROWS_AS((void)sep.overlap_bound_c_inverse(1.5), Error);
}

TEST_CASE("sampled free states never beat the overlap bound") {
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  const DensityMatrix bell = sep.max_resource_state(1);
  Rng rng(11);
  double worst = 0.0;
  for (int s = 0; s < 500; ++s) {
    const DensityMatrix rho = sep.sample_free(rng);
    worst = std::max(worst, (rho.mat * bell.mat).trace().real());
  }
  CHECK(worst <= sep.overlap_bound_c(1) + 1e-9);
}

TEST_CASE("channel freeness certificates") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  const auto deph = inc.is_rno_channel(dephasing_channel(2));
  CHECK(deph.verdict == ChannelVerdict::Free);
  CHECK(deph.exact);

  Matrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  h /= std::sqrt(2.0);
  const auto had = inc.is_rno_channel(unitary_channel(h));
  CHECK(had.verdict == ChannelVerdict::NotFree);
  CHECK(had.exact);
  CHECK(had.margin < -0.4);  // H|0> = |+> has off-diagonal 1/2

  // The swap unitary maps separable states to separable states; sampling
  // cannot certify that, only fail to falsify it.
  FreeSetModel sep = FreeSetModel::separable_ppt(2, 2);
  Matrix swap_u = Matrix::Zero(4, 4);
  swap_u(0, 0) = swap_u(3, 3) = 1.0;
  swap_u(1, 2) = swap_u(2, 1) = 1.0;
  Channel swap_ch = unitary_channel(swap_u);
  swap_ch.in_dims = {2, 2};
  swap_ch.out_dims = {2, 2};
  const auto swapped = sep.is_rno_channel(swap_ch, 1e-9, 200);
  CHECK(swapped.verdict == ChannelVerdict::NotFalsified);
  CHECK_FALSE(swapped.exact);

  // A unitary that entangles: conclusively not free.
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = 1.0;
  cnot(2, 3) = cnot(3, 2) = 1.0;
  Matrix hi = kron(h, Matrix::Identity(2, 2));
  Channel entangler = unitary_channel(Matrix(cnot * hi));
  entangler.in_dims = {2, 2};
  entangler.out_dims = {2, 2};
  const auto ent = sep.is_rno_channel(entangler, 1e-9, 200);
  CHECK(ent.verdict == ChannelVerdict::NotFree);
  CHECK(ent.exact);
}

TEST_CASE("the free channel family is closed under tensoring and mixing") {
  FreeSetModel inc = FreeSetModel::incoherent(2);
  FreeSetModel inc2 = inc.tensor_power(2);
  Rng rng(13);
  for (int t = 0; t < 5; ++t) {
    Channel a = inc.sample_free_channel(rng);
    Channel b = inc.sample_free_channel(rng);
    REQUIRE(inc.is_rno_channel(a).verdict == ChannelVerdict::Free);
    REQUIRE(inc.is_rno_channel(b).verdict == ChannelVerdict::Free);
    const Channel both = tensor_channels(a, b);
    CHECK(inc2.is_rno_channel(both).verdict == ChannelVerdict::Free);
    const Channel mixed = mix_channels({a, b}, {0.3, 0.7});
    CHECK(inc.is_rno_channel(mixed).verdict == ChannelVerdict::Free);
  }
  // Basis permutations are free in both models.
  Matrix cycle = Matrix::Zero(4, 4);
  cycle(1, 0) = cycle(2, 1) = cycle(3, 2) = cycle(0, 3) = 1.0;
  Channel perm = unitary_channel(cycle);
  perm.in_dims = {2, 2};
  perm.out_dims = {2, 2};
  CHECK(inc2.is_rno_channel(perm).verdict == ChannelVerdict::Free);
}
