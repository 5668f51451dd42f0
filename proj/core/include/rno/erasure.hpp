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

#ifndef RNO_ERASURE_HPP_
#define RNO_ERASURE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "rno/dynamic_measures.hpp"
#include "rno/qmath.hpp"

// Resource erasure by randomized placement: mixing one copy of a channel into
// n - 1 copies of a free reference destroys the resource at a rate controlled
// by a binomial mean-absolute-deviation sum, its Stirling-type closed form,
// and the smoothed channel robustness.  This header exposes the construction
// (build_gamma_n), the bound arithmetic (binomial_pmf_bound, threshold_n),
// the measured-vs-analytic deviation report (mixing_deviation_bound), and the
// two-sided destruction-cost bracket (destruction_cost_bounds).

namespace rno::erasure {

using qmath::Channel;

// Exact binomial point mass together with the k-independent envelope that
// caps every mass at or below the mean.
struct BinomialBoundResult {
  // C(n,k) p^k (1-p)^(n-k), summed in exact rational arithmetic when p has a
  // denominator at most 1000, long-double arithmetic otherwise.
  double pmf = 0.0;
  // e^(1/12) / sqrt(2*pi*n*p*(1-p) - 2*pi); requires n*p*(1-p) > 1.
  double bound = 0.0;
};

// Preconditions: 0 < p < 1, 0 <= k <= floor(n*p), and n*p*(1-p) > 1.  The
// violated inequality is named in the InvalidRequest message.
BinomialBoundResult binomial_pmf_bound(int n, double p, int k);

// Smallest integer n with n - 1 >= 2(1-p)e^(1/6)/(eps^2*pi*p) + 1/(p(1-p)),
// i.e. the copy count at which the closed-form deviation bound drops to eps.
int threshold_n(double eps, double p);

// (1/p) * sum_k C(n,k) p^k (1-p)^(n-k) |p - k/n|, evaluated exactly when p
// has a small rational representation.
double exact_deviation_sum(int n, double p);

// sqrt(2)*(1-p)*e^(1/12) / sqrt(pi*p*(n-1)*(1-p) - pi); +infinity when the
// radicand is not positive (the form is undefined there).
double closed_form_deviation(int n, double p);

// Uniform average over the n placements of psi among theta factors:
//   Gamma_n = (1/n) * sum_i theta^(i-1) (x) psi (x) theta^(n-i).
// Both channels must share input and output dimensions.  Throws TooLarge when
// the n-copy Choi side (d_in*d_out)^n would exceed the global matrix cap.
Channel build_gamma_n(const Channel& psi, const Channel& theta, int n);

struct ErasureReport {
  int n = 0;
  double p = 0.0;
  // (1/p) E|p - k/n| over Binomial(n, p); always finite.
  double exact_sum_bound = 0.0;
  // Stirling-type envelope of the sum; +infinity when (n-1)p(1-p) <= 1.
  double closed_form_bound = 0.0;
  // ||J(Gamma_n) - J(theta^n)||_1 with trace-one Chois; absent when the
  // n-copy Choi would exceed the matrix cap (the bounds above still stand).
  std::optional<double> measured_choi_trace_distance;
  // Same norm on unnormalized (trace d_in^n) Chois, reported so a
  // factor-of-dimension slip between conventions cannot hide.
  std::optional<double> measured_choi_trace_distance_raw;
  // Half diamond norm of Gamma_n - theta^n via the SDP; computed only when
  // requested and n <= 2.
  std::optional<double> measured_diamond_distance;
  // Copies the closed-form analysis would demand to certify the deviation
  // this report achieved; 0 when exact_sum_bound is too large to invert.
  int threshold_n = 0;
  // Destruction-cost bracket instantiated at this report's deviation level:
  // lower is a smoothed-robustness estimate (see weak flag), upper is
  // log2 of the closed-form copy count.
  double cost_lower = 0.0;
  double cost_upper = 0.0;
  // The lower estimate compares a probability to a log-count and is produced
  // by a heuristic that over-estimates an infimum, so it is never certified.
  bool cost_lower_weak = true;
  std::vector<std::string> notes;
};

// Deviation report for mixing psi into the free reference theta = p*psi +
// (1-p)*phi.  Throws HypothesisViolated when theta is not a free channel and
// InvalidRequest when p lies outside (0,1).  Channel-level measurements are
// filled only when the n-copy Choi fits the matrix cap; qubit pairs whose
// Chois are diagonal in the Bell product basis take a scalar eigenvalue path
// that never materializes the large matrices.
ErasureReport mixing_deviation_bound(const Channel& psi, const Channel& phi,
                                     double p, int n,
                                     bool compute_diamond = false);

struct DestructionConfig {
  dynamic_measures::SmoothingConfig smoothing;
};

struct CostBoundReport {
  // Smoothed robustness estimate at radius sqrt(eps*(2-eps)); weak by
  // construction (probability vs log-count, heuristic over-estimate).
  double lower = 0.0;
  // log2(2(1-L')e^(1/6)/(eta^2*pi*L') + 1/(L'(1-L')) + 1) with L' the
  // smoothed robustness estimate at radius eps - eta; 0 when L' = 1 and
  // +infinity when L' = 0 (both flagged degenerate).
  double upper = 0.0;
  double robustness_inner = 0.0;  // L'  at radius eps - eta
  double robustness_outer = 0.0;  // L'' at radius sqrt(eps*(2-eps))
  double eps = 0.0;
  double eta = 0.0;
  bool degenerate = false;
  bool lower_weak = true;
  std::vector<std::string> notes;
};

// Two-sided bracket on the cost of erasing e to within trace-distance eps.
// Requires 0 < eta < eps < 1.
CostBoundReport destruction_cost_bounds(const Channel& e, double eps,
                                        double eta,
                                        const DestructionConfig& cfg = {});

// Arithmetic core of the upper bound, exposed so the formula can be checked
// against hand-computed values without engineering a channel whose smoothed
// robustness lands exactly on a target.
double destruction_upper_from(double l_inner, double eta);

}  // namespace rno::erasure

#endif  // RNO_ERASURE_HPP_
