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

#ifndef RNO_STATIC_MEASURES_HPP_
#define RNO_STATIC_MEASURES_HPP_

#include <string>

#include "rno/conic.hpp"
#include "rno/freesets.hpp"
#include "rno/qmath.hpp"

// State resource quantifiers.
//
// For a free-set model F with cone(F):
//   generalized robustness   R(rho) = min { tr T - 1 : T >= rho, T in cone(F) }
//   standard robustness      S(rho) = min { tr T - 1 : T >= rho, T in cone(F),
//                                           T - rho in cone(F) }
// The standard variant is +infinity whenever no free supplement exists (for
// instance, any coherent state against the incoherent model).  Smoothed
// variants jointly optimize over states rho~ within trace distance
// ||rho - rho~||_1 <= 2 eps of the input.
//
// The separable model is implemented through its transpose-battery cone; when
// that battery is only a necessary test (dA*dB > 6 or tensor copies) the
// reported value is a certified lower bound and `exact_model` is false.

namespace rno::static_measures {

using freesets::FreeSetModel;
using qmath::DensityMatrix;

struct RobustnessOptions {
  double tol = 1e-7;
  int max_iter = 200000;
};

struct RobustnessResult {
  double value = 0.0;       // robustness; +infinity when no decomposition
  double log2_value = 0.0;  // log2(1 + value)
  conic::SolveStatus status = conic::SolveStatus::MaxIter;
  bool exact_model = true;  // false when the cone is a relaxation
  Matrix witness_t;         // optimal dominating T (empty if infeasible)
  // Optimal supplement sigma = (T - rho)/value (I/d when value = 0) and the
  // resulting free state tau = (rho + value*sigma)/(1 + value): mixing rho
  // with `value` parts of `mixer` lands on `free_witness` inside the free
  // set.  Both are cleaned up to exact states; empty when infeasible.
  Matrix mixer;
  Matrix free_witness;
  // The optimized nearby state for the smoothed variants (equals the input
  // for the unsmoothed ones); the decomposition above is anchored at it.
  Matrix smoothed_state;
};

RobustnessResult generalized_robustness(const FreeSetModel& model,
                                        const DensityMatrix& rho,
                                        const RobustnessOptions& opts = {});

RobustnessResult standard_robustness(const FreeSetModel& model,
                                     const DensityMatrix& rho,
                                     const RobustnessOptions& opts = {});

RobustnessResult smoothed_generalized_robustness(
    const FreeSetModel& model, const DensityMatrix& rho, double eps,
    const RobustnessOptions& opts = {});

RobustnessResult smoothed_standard_robustness(
    const FreeSetModel& model, const DensityMatrix& rho, double eps,
    const RobustnessOptions& opts = {});

struct GeometricResult {
  double value = 0.0;    // 1 - largest free overlap
  double overlap = 0.0;  // largest |<phi|psi>| over free pure phi
  bool exact = true;     // false when the overlap is only a lower bound
};

// Geometric measure of a pure state: closed form via the largest basis
// amplitude (incoherent model) or largest Schmidt coefficient (single-copy
// separable model); alternating maximization for separable tensor copies.
GeometricResult geometric_measure_pure(const FreeSetModel& model,
                                       const Vector& psi,
                                       std::uint64_t seed = 1,
                                       int restarts = 8);

// ---------------------------------------------------------------------------
// Quantifier axiom harness
// ---------------------------------------------------------------------------
//
// Empirical check that a robustness quantifier behaves as a resource
// quantifier on sampled instances:
//   O1  vanishes on free states
//   O2  does not increase under free channels
//   O3  is strictly positive on resourceful states
//   O4  is convex under mixing
// Free channels are drawn from the model's certified family; the separable
// model additionally exercises measure-and-prepare maps built from the
// standard-robustness decomposition (free by the mixing-threshold argument).

enum class Quantifier { Generalized, Standard };

const char* quantifier_name(Quantifier q);

struct AxiomCheck {
  int checks = 0;
  double max_violation = 0.0;
};

struct AxiomReport {
  Quantifier quantifier = Quantifier::Generalized;
  int trials = 0;
  std::uint64_t seed = 0;
  AxiomCheck vanishes_on_free;  // O1
  AxiomCheck monotone;          // O2
  AxiomCheck faithful;          // O3
  AxiomCheck convex;            // O4

  double max_violation() const;
};

AxiomReport quantifier_axiom_suite(const FreeSetModel& model, Quantifier q,
                                   int trials, std::uint64_t seed,
                                   const RobustnessOptions& opts = {});

}  // namespace rno::static_measures

#endif  // RNO_STATIC_MEASURES_HPP_
