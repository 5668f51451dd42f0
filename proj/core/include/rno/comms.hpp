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

#ifndef RNO_COMMS_HPP_
#define RNO_COMMS_HPP_

// Coherence-assisted classical communication at desk scale.
//
//   protocol_simulate            average success probability of a fixed
//                                (encoder, channel x ancilla, decoder) triple
//   seesaw_success_probability   alternating maximization over free encoders
//                                and decoders; a certified achievability
//                                lower bound on the optimum
//   capacity_bound               one-shot message-count bound driven by the
//                                channel's smoothed robustness, with an
//                                achievability consistency experiment
//
// All protocol components are free (incoherence-preserving) channels; the
// communication channel in the middle is the only resourceful element.

#include <cstdint>
#include <string>
#include <vector>

#include "rno/dynamic_measures.hpp"
#include "rno/qmath.hpp"

namespace rno::comms {

using qmath::Channel;

// A fixed protocol instance.  Messages are the computational basis of an
// m-dimensional register; the encoder prepares a joint input for the
// communication channel `n` and the ancilla channel `w`, and the decoder
// maps the joint output back onto the message register.
struct ProtocolSpec {
  Channel n;
  int m = 2;
  int ancilla_dim = 1;
  Channel encoder;  // m-dim register -> input of (n x w)
  Channel decoder;  // output of (n x w) -> m-dim register
  Channel w;        // ancilla side, free
};

// Average success probability (1/m) sum_k <k| D((N x W)(E(|k><k|))) |k> of
// the fixed triple.  Every component must certify free at `tol`; a
// resourceful encoder, decoder, or ancilla channel raises NotFreeComponent.
double protocol_simulate(const ProtocolSpec& spec, double tol = 1e-6);

struct SeesawConfig {
  int rounds = 30;
  int restarts = 8;
  std::uint64_t seed = 1;
  double convergence_gain = 1e-8;
  dynamic_measures::SolveOptions solve;
};

struct SeesawResult {
  double f_hat = 0.0;   // achievability lower bound on the optimum
  ProtocolSpec spec;    // triple attaining f_hat (so the bound is certified)
  std::vector<double> round_values;  // winning restart, one value per round
};

// Alternating maximization of the average success probability: with the
// encoder fixed, the optimal free decoder is a semidefinite program (the
// objective is linear in the decoder Choi and freeness is a set of linear
// rows); with the decoder fixed, the optimal free encoder is an exact basis
// search.  The objective never decreases within a run, and the best value
// over restarts is returned together with the triple that attains it.
SeesawResult seesaw_success_probability(const Channel& n, int m,
                                        int ancilla_dim,
                                        const SeesawConfig& cfg = {});

enum class ConsistencyVerdict { Consistent, Violation };

const char* consistency_verdict_name(ConsistencyVerdict verdict);

struct CapacityConfig {
  SeesawConfig seesaw;
  dynamic_measures::SmoothingConfig smoothing;
  int max_messages = 8;  // achievability scan cap
};

struct CapacityReport {
  double theta = 0.0;
  double delta = 0.0;
  // Upper-bound estimate of the delta-smoothed channel robustness.  Because
  // it can only overshoot the true smoothed value, bound_on_m can only
  // undershoot the true right-hand side: an achievability result consistent
  // with bound_on_m is sound evidence for the inequality on this instance.
  double l_delta_estimate = 1.0;
  bool l_estimate_heuristic = false;
  double bound_on_m = 0.0;
  double c_theta_bits = 0.0;  // log2(bound_on_m)
  double achieved_f = 1.0;
  int achieved_m = 1;
  ConsistencyVerdict verdict = ConsistencyVerdict::Consistent;
  std::vector<std::string> notes;
};

// Evaluates the one-shot bound  m <= 1 / (L_delta * (1 - theta - delta))  and
// runs the see-saw achievability experiment against it: achieved_m is the
// largest message count whose failure probability stays within theta.  A
// violation is recorded in the verdict and notes, never asserted away.
CapacityReport capacity_bound(const Channel& n, double theta, double delta,
                              const CapacityConfig& cfg = {});

}  // namespace rno::comms

#endif  // RNO_COMMS_HPP_
