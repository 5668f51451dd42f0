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

#include <cmath>

#include "doctest.h"
#include "rno/qmath.hpp"

using namespace rno;
using namespace rno::conic;

namespace {

// Adds rows expressing P = partial transpose (second factor) of T for 2x2
// tensor blocks of side d1*d2.
void add_pt_link_rows(SdpProblem& p, int blk_p, int blk_t, int d1, int d2) {
  const int d = d1 * d2;
  auto pt_index = [&](int r, int c) {
    const int i = r / d2, a = r % d2, j = c / d2, b = c % d2;
    return std::pair<int, int>{i * d2 + b, j * d2 + a};
  };
  for (int r = 0; r < d; ++r)
    for (int c = r; c < d; ++c) {
      auto [tr, tc] = pt_index(r, c);
      const int row_re = p.new_row(0.0);
      p.add_entry(row_re, blk_p, r, c, 1.0);
      p.add_entry(row_re, blk_t, tr, tc, -1.0);
      if (r == c && tr == tc) continue;
      const int row_im = p.new_row(0.0);
      p.add_entry(row_im, blk_p, r, c, Complex(0.0, -1.0));
      p.add_entry(row_im, blk_t, tr, tc, Complex(0.0, 1.0));
    }
}

}  // namespace

TEST_CASE("svec embedding is an isometry") {
  qmath::Rng rng(3);
  Matrix g = qmath::sample_ginibre(4, 4, rng);
  Matrix a = (g + g.adjoint()) / 2.0;
  g = qmath::sample_ginibre(4, 4, rng);
  Matrix b = (g + g.adjoint()) / 2.0;
  Eigen::VectorXd va = svec(a), vb = svec(b);
  CHECK((smat(va, 4) - a).cwiseAbs().maxCoeff() < 1e-14);
  const double hs = (a.adjoint() * b).trace().real();
  CHECK(va.dot(vb) == doctest::Approx(hs).epsilon(1e-12));
}

TEST_CASE("minimal-trace dominating matrix equals the positive part") {
  qmath::Rng rng(5);
  Matrix g = qmath::sample_ginibre(3, 3, rng);
  Matrix a = (g + g.adjoint()) / 2.0;
  // Oracle: min tr X s.t. X >= A, X PSD has value tr(positive part of A).
  const double expected =
      qmath::hermitian_eigenvalues(a).cwiseMax(0.0).sum();

  SdpProblem p;
  const int bx = p.add_psd_block(3);
  const int bq = p.add_psd_block(3);
  p.add_matrix_eq_rows({bx, bq}, {1.0, -1.0}, 3, a);
  p.add_objective(bx, Matrix::Identity(3, 3));
  SolveResult res = solve(p);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(expected).epsilon(1e-5));

  KktReport kkt = check_kkt(p, res);
  CHECK(kkt.within(1e-6));
}

TEST_CASE("entry constraints pin a complex off-diagonal") {
  SdpProblem p;
  const int bx = p.add_psd_block(2);
  const int row_re = p.new_row(0.3);
  p.add_entry(row_re, bx, 0, 1, 1.0);
  const int row_im = p.new_row(-0.2);
  p.add_entry(row_im, bx, 0, 1, Complex(0.0, -1.0));
  p.add_objective(bx, Matrix::Identity(2, 2));
  SolveResult res = solve(p);
  REQUIRE(res.status == SolveStatus::Optimal);
  // min a+b with ab >= |w|^2 gives 2|w|.
  const double w = std::sqrt(0.3 * 0.3 + 0.2 * 0.2);
  CHECK(res.objective == doctest::Approx(2.0 * w).epsilon(1e-5));
  Matrix x = p.block_matrix(bx, res.x);
  CHECK(std::abs(x(0, 1) - Complex(0.3, -0.2)) < 1e-5);
}

TEST_CASE("diagonal dominator of the plus state needs trace two") {
  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  Matrix psi = plus * plus.adjoint();

  SdpProblem p;
  const int bt = p.add_nonneg_block(2);
  const int bq = p.add_psd_block(2);
  // diag(t) - Q = psi
  for (int i = 0; i < 2; ++i) {
    const int row = p.new_row(psi(i, i).real());
    p.add_scalar_entry(row, bt, i, 1.0);
    p.add_entry(row, bq, i, i, -1.0);
  }
  const int row_re = p.new_row(psi(0, 1).real());
  p.add_entry(row_re, bq, 0, 1, -1.0);
  const int row_im = p.new_row(psi(0, 1).imag());
  p.add_entry(row_im, bq, 0, 1, Complex(0.0, -1.0));
  p.add_scalar_objective(bt, 0, 1.0);
  p.add_scalar_objective(bt, 1, 1.0);

  SolveResult res = solve(p);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("PPT dominator of the Bell state needs trace two") {
  Matrix bell = qmath::max_entangled_state(2).mat;
  SdpProblem p;
  const int bt = p.add_psd_block(4);
  const int bq = p.add_psd_block(4);
  const int bp = p.add_psd_block(4);
  p.add_matrix_eq_rows({bt, bq}, {1.0, -1.0}, 4, bell);
  add_pt_link_rows(p, bp, bt, 2, 2);
  p.add_objective(bt, Matrix::Identity(4, 4));
  SolveResult res = solve(p);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(check_kkt(p, res).within(1e-6));
}

TEST_CASE("trace cap below one is reported infeasible") {
  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  Matrix psi = plus * plus.adjoint();
  SdpProblem p;
  const int bt = p.add_psd_block(2);
  const int bq = p.add_psd_block(2);
  p.add_matrix_eq_rows({bt, bq}, {1.0, -1.0}, 2, psi);
  const int row = p.new_row(0.5);
  p.add_entry(row, bt, 0, 0, 1.0);
  p.add_entry(row, bt, 1, 1, 1.0);
  p.add_objective(bt, Matrix::Identity(2, 2));
  SolveResult res = solve(p);
  CHECK(res.status == SolveStatus::Infeasible);
}

TEST_CASE("inconsistent equalities are caught in presolve") {
  SdpProblem p;
  const int bx = p.add_psd_block(2);
  const int r1 = p.new_row(1.0);
  p.add_entry(r1, bx, 0, 0, 1.0);
  const int r2 = p.new_row(2.0);
  p.add_entry(r2, bx, 0, 0, 1.0);
  p.add_objective(bx, Matrix::Identity(2, 2));
  SolveResult res = solve(p);
  CHECK(res.status == SolveStatus::Infeasible);
  CHECK(res.iterations == 0);
}

TEST_CASE("maximize flag flips the reported objective") {
  // max X_00 s.t. tr X = 1, X PSD -> 1.
  SdpProblem p;
  const int bx = p.add_psd_block(2);
  const int row = p.new_row(1.0);
  p.add_entry(row, bx, 0, 0, 1.0);
  p.add_entry(row, bx, 1, 1, 1.0);
  Matrix c = Matrix::Zero(2, 2);
  c(0, 0) = 1.0;
  p.add_objective(bx, c);
  p.set_maximize(true);
  SolveResult res = solve(p);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("solve observer sees every solve") {
  int solves = 0;
  set_solve_observer([&](const SdpProblem&, const SolveResult& r) {
    ++solves;
    CHECK(r.status == SolveStatus::Optimal);
  });
  SdpProblem p;
  const int bx = p.add_psd_block(2);
  const int row = p.new_row(1.0);
  p.add_entry(row, bx, 0, 0, 1.0);
  p.add_entry(row, bx, 1, 1, 1.0);
  p.add_objective(bx, Matrix::Identity(2, 2));
  solve(p);
  solve(p);
  clear_solve_observer();
  solve(p);
  CHECK(solves == 2);
}
