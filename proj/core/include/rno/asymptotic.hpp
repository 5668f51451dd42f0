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

#ifndef RNO_ASYMPTOTIC_HPP_
#define RNO_ASYMPTOTIC_HPP_

#include <cstdint>

#include "rno/freesets.hpp"
#include "rno/qmath.hpp"
#include "rno/static_measures.hpp"

// Finite-copy brackets on the asymptotic preparation cost of a state: the
// lower bound regularizes the smoothed generalized log-robustness, the upper
// bound counts how many canonical resource units a measure-and-prepare
// channel needs to synthesize n copies.  Everything here is a finite-n proxy
// evaluated at the n and eps recorded in the report; no limit is claimed.

namespace rno::asymptotic {

using freesets::FreeSetModel;
using qmath::Channel;
using qmath::DensityMatrix;

struct CostOptions {
  static_measures::RobustnessOptions solve;
};

struct CostBoundReport {
  int n = 1;
  double eps = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  // The upper bound is +infinity because the standard robustness diverged
  // (every coherent state under the incoherent model does this).
  bool vacuous = false;
};

// (1/n) * smoothed generalized log-robustness of rho^(x)n at radius eps.
// Requires eps in [0, 0.2] and an n-copy space of dimension at most 16.
double cost_lower_bound(const FreeSetModel& m, const DensityMatrix& rho, int n,
                        double eps, const CostOptions& opts = {});

// floor(c^-1(1/(1 + R))) / n with R the standard robustness of rho^(x)n and
// c the model's free-overlap envelope; +infinity when R diverges.
double cost_upper_bound(const FreeSetModel& m, const DensityMatrix& rho, int n,
                        const CostOptions& opts = {});

CostBoundReport cost_bounds(const FreeSetModel& m, const DensityMatrix& rho,
                            int n, double eps, const CostOptions& opts = {});

struct PreparationBuildReport {
  Channel channel;
  int k_n = 0;
  // Largest entrywise deviation of the channel's output on the resource
  // input from rho^(x)n; guaranteed below 1e-9.
  double reconstruction_error = 0.0;
  int free_samples = 0;  // sampled free inputs pushed through the channel
  int free_passes = 0;   // outputs that passed the output-model freeness test
  double max_overlap = 0.0;  // largest tr(eta phi+) seen across the samples
  double overlap_cap = 0.0;  // the model's envelope c(k_n)
  // The output freeness test was only a battery of necessary conditions
  // (multi-copy separable model), not an exact membership test.
  bool necessary_only = false;
};

// Builds the two-outcome measure-and-prepare channel that turns k_n canonical
// resource units into rho^(x)n: project onto the resource state and emit the
// target, otherwise emit the standard-robustness mixer.  Throws
// ConditionNotMet when the standard robustness diverges (the bound is vacuous
// there) and TooLarge past the dimension guard.
PreparationBuildReport build_preparation_channel(const FreeSetModel& m,
                                                 const DensityMatrix& rho,
                                                 int n, int samples = 200,
                                                 std::uint64_t seed = 1,
                                                 const CostOptions& opts = {});

}  // namespace rno::asymptotic

#endif  // RNO_ASYMPTOTIC_HPP_
