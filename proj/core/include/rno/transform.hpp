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

#ifndef RNO_TRANSFORM_HPP_
#define RNO_TRANSFORM_HPP_

#include <cstdint>
#include <string>

#include "rno/freesets.hpp"
#include "rno/qmath.hpp"
#include "rno/static_measures.hpp"

// Single-shot state transformations by resource-nonincreasing channels.
//
// Given a pure input psi and a target state sigma, the measurement-prepare
// channel
//
//   E(rho) = <psi|rho|psi> sigma + (1 - <psi|rho|psi>) delta
//
// maps psi to sigma exactly.  It never generates resource as long as every
// free input lands on a free output, i.e. whenever x sigma + (1-x) delta is
// free for all x up to c1^2, c1 being the largest free overlap of psi.  A
// supplement delta with that property exists whenever the target's standard
// robustness S satisfies c1 <= 1/(1+S): take delta = (T - sigma)/S from the
// optimal dominating T, so that the mixture at x = 1/(1+S) is the free state
// T/(1+S).  The default feasibility test uses that sufficient inequality;
// tight mode tests the sharper c1^2 <= 1/(1+S), which is exactly what the
// construction needs.

namespace rno::transform {

using freesets::FreeSetModel;
using qmath::DensityMatrix;
using qmath::Rng;

struct TransformOptions {
  bool tight_mode = false;      // test c1^2 (construction-exact) vs c1
  double tol = 1e-7;            // robustness solver tolerance
  int max_iter = 200000;
  double membership_tol = 1e-9;
  double mixer_gamma = 1e-6;    // blend toward the maximally mixed state
  std::uint64_t seed = 1;
  int overlap_restarts = 8;
};

struct TransformPlan {
  bool feasible = false;
  double overlap = 0.0;        // c1, largest free overlap of the input
  double geometric = 0.0;      // 1 - c1
  double robustness = 0.0;     // standard robustness of the target
  double threshold = 0.0;      // 1/(1 + robustness); 0 when infinite
  double required = 0.0;       // c1 or c1^2 depending on the mode
  double condition_lhs = 0.0;  // threshold + geometric; feasible at >= 1
  Matrix mixer;                // supplement delta from the robustness solve
  bool overlap_exact = true;   // false when c1 is only a lower bound
  bool model_exact = true;     // false when the free cone is a relaxation
  std::string detail;
};

// Evaluates the feasibility condition without building the channel.
TransformPlan plan_transform(const FreeSetModel& model, const Vector& psi,
                             const DensityMatrix& sigma,
                             const TransformOptions& opts = {});

struct TransformChannel {
  qmath::Channel channel;
  DensityMatrix mixer;              // polished supplement delta
  double effective_threshold = 0.0; // largest verified-free mixing weight
  TransformPlan plan;
};

// Builds the measurement-prepare channel realizing psi -> sigma.  Throws
// ConditionNotMet when the plan is infeasible or the polished supplement
// cannot cover the required mixing weight.
TransformChannel build_transform(const FreeSetModel& model, const Vector& psi,
                                 const DensityMatrix& sigma,
                                 const TransformOptions& opts = {});

struct TransformAudit {
  double target_error = 0.0;  // trace distance of E(psi) from sigma
  double worst_margin = 0.0;  // smallest membership margin over free inputs
  bool outputs_free = true;
  int trials = 0;
};

// Replays the channel on the exact input and on sampled free states.
TransformAudit audit_transform(const FreeSetModel& model,
                               const TransformChannel& tc, const Vector& psi,
                               const DensityMatrix& sigma, int trials,
                               Rng& rng);

}  // namespace rno::transform

#endif  // RNO_TRANSFORM_HPP_
