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

#ifndef RNO_DYNAMIC_MEASURES_HPP_
#define RNO_DYNAMIC_MEASURES_HPP_

#include <cstdint>
#include <vector>

#include "rno/conic.hpp"
#include "rno/qmath.hpp"

// Channel-level quantifiers against the incoherence-preserving family (maps
// whose Choi matrix has diagonal input blocks that are themselves diagonal):
//
//   diamond_distance             (1/2)||E1 - E2||_diamond
//   channel_rno_robustness       L(E) = sup { p : pE + (1-p)G free for some
//                                channel G }, in [0,1], 1 = free
//   smoothed_channel_robustness  inf of L over a diamond ball around E
//   channel_divergence_to_free   log2 min { lambda : J_E <= K, K in
//                                lambda * (free Choi set) }
//
// The L program becomes jointly convex through the substitution
// Y = (1-p) J_G.  The smoothed variant minimizes a concave value function
// over the ball and is genuinely nonconvex; the estimator here returns a
// certified UPPER bound on the infimum and marks every result as heuristic.

namespace rno::dynamic_measures {

using qmath::Channel;

struct SolveOptions {
  double tol = 1e-7;
  int max_iter = 200000;
};

// Half the completely bounded trace norm of the difference map, in [0, 1],
// computed by a semidefinite program over the Choi difference.  Before
// returning, the optimum is checked against sampled variational lower bounds
// (reference preparations conjugating the Choi difference) and against the
// maximally mixed preparation; a contradiction raises SolverError.
double diamond_distance(const Channel& e1, const Channel& e2,
                        const SolveOptions& opts = {});

// One variational sample: half the trace norm of
// (A (x) I) (J_1 - J_2) (A^dag (x) I) with A normalized to unit Frobenius
// norm.  Every sample lower-bounds diamond_distance; the supremum over A
// attains it.  Exposed for cross-validation in tests.
double diamond_lower_bound(const Channel& e1, const Channel& e2,
                           const Matrix& a);

struct ChannelRobustnessResult {
  double p_star = 0.0;  // in [0,1]; exactly 1 iff the channel itself is free
  conic::SolveStatus status = conic::SolveStatus::Optimal;
  Channel companion;       // G: mixing weight (1 - p_star) lands on free
  Channel resulting_free;  // p E + (1-p) G after clean-up; certified free
  double solver_residual = 0.0;          // worst KKT residual of the solve
  double reconstruction_residual = 0.0;  // max |pJ_E + (1-p)J_G - J_free|
};

// Largest p such that pE + (1-p)G is incoherence-preserving for some channel
// G.  Exactly-free inputs short-circuit to p = 1 via the Choi certificate;
// otherwise a single SDP over Y = (1-p) J_G decides the optimum.
ChannelRobustnessResult channel_rno_robustness(const Channel& e,
                                               const SolveOptions& opts = {});

struct SmoothingConfig {
  int restarts = 16;  // 0 disables the search (keeps the unsmoothed value)
  std::uint64_t seed = 1;
  SolveOptions solve;
};

struct SmoothedChannelResult {
  double upper_estimate = 1.0;  // upper bound on inf L over the ball
  Channel witness;              // channel inside the ball attaining it
  double witness_distance = 0.0;
  bool heuristic = true;  // always true: the infimum itself is nonconvex
};

// eps-smoothed robustness: the infimum of L over channels within diamond
// distance eps of e, estimated by line searches from e toward coherence
// generating directions.  The returned value is achieved by `witness`, so it
// is a sound upper bound; it is not certified to be the infimum.
SmoothedChannelResult smoothed_channel_robustness(const Channel& e,
                                                  double eps,
                                                  const SmoothingConfig& cfg =
                                                      {});

// Grid variant sharing the search directions across radii.  Balls are
// nested, so the running minimum keeps every estimate valid for its own
// radius and makes the sequence nonincreasing once the grid is sorted.
// Results are returned in the order of `eps_grid`.
std::vector<SmoothedChannelResult> smoothed_channel_sweep(
    const Channel& e, const std::vector<double>& eps_grid,
    const SmoothingConfig& cfg = {});

// log2 of the smallest lambda admitting K >= J_E with K in the cone of
// incoherence-preserving Choi matrices and tr_out K = lambda I.  Zero exactly
// when the channel certifies free; strictly positive otherwise.
double channel_divergence_to_free(const Channel& e,
                                  const SolveOptions& opts = {});

}  // namespace rno::dynamic_measures

#endif  // RNO_DYNAMIC_MEASURES_HPP_
