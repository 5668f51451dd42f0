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

#ifndef RNO_FREESETS_HPP_
#define RNO_FREESETS_HPP_

#include <string>
#include <vector>

#include "rno/conic.hpp"
#include "rno/qmath.hpp"

// Models of the "free" (resourceless) state sets the workbench quantifies
// against:
//
//  * Incoherent(d): states diagonal in the computational basis.  Membership
//    is exact, and tensor copies collapse to Incoherent(d^n).
//
//  * SeparablePpt(dA, dB): separable bipartite states, handled through the
//    positive-partial-transpose relaxation.  The PPT test is exact (both
//    necessary and sufficient) only when dA*dB <= 6; in larger dimensions,
//    and for tensor copies of the set, passing the transpose battery is
//    necessary but not sufficient, which every verdict records explicitly.

namespace rno::freesets {

using qmath::Channel;
using qmath::DensityMatrix;
using qmath::Rng;

enum class FreeSetKind { Incoherent, SeparablePpt };

enum class Membership { Free, NotFree, NecessaryOnlyPass };

const char* membership_name(Membership verdict);

struct MembershipReport {
  Membership verdict = Membership::NotFree;
  bool exact = false;   // true when the verdict is definitive
  double margin = 0.0;  // >= -tol on pass; most violated check on fail
  std::string detail;
};

// Verdicts for channel-level freeness: a free channel maps every free state
// to a free state.  The incoherent model admits an exact test (every basis
// projector must map to a diagonal state); the separable model only admits
// falsification by sampling, so the affirmative verdict is NotFalsified.
enum class ChannelVerdict { Free, NotFree, NotFalsified };

const char* channel_verdict_name(ChannelVerdict verdict);

struct ChannelCertReport {
  ChannelVerdict verdict = ChannelVerdict::NotFree;
  bool exact = false;   // true when the verdict is definitive
  double margin = 0.0;  // worst constraint slack seen (negative = violated)
  std::string detail;
};

struct FreeSetModel {
  FreeSetKind kind = FreeSetKind::Incoherent;
  std::vector<int> factor_dims;  // one copy: {d} or {dA, dB}
  int copies = 1;

  static FreeSetModel incoherent(int d);
  static FreeSetModel separable_ppt(int da, int db);
  FreeSetModel tensor_power(int n) const;

  std::vector<int> state_dims() const;  // factor_dims repeated `copies` times
  int dim() const;
  bool membership_exact() const;
  std::string name() const;

  // Partial-transpose subsets over the full factor list that the membership
  // battery checks (empty for the incoherent model).  Subsets never contain
  // factor 0, since transposing a subset and its complement are equivalent.
  std::vector<std::vector<int>> pt_subsets() const;

  MembershipReport membership(const DensityMatrix& rho,
                              double tol = 1e-9) const;
  bool is_free(const DensityMatrix& rho, double tol = 1e-9) const;

  DensityMatrix sample_free(Rng& rng) const;
  DensityMatrix sample_not_free(Rng& rng, double margin = 0.01) const;

  // Resource-nonincreasing channels on the model's space: maps taking every
  // free state to a free state (and, for the incoherent model, members of
  // the maximal incoherence-preserving class).
  Channel sample_free_channel(Rng& rng) const;

  // The canonical maximally resourceful pure state on n fresh copies of this
  // model's space: the uniform superposition per copy (incoherent model) or
  // the maximally entangled state per copy (separable model), tensored.
  Vector max_resource_vector(int n) const;
  DensityMatrix max_resource_state(int n) const;

  // Upper bound c(n) on the overlap tr(rho phi+) between any free state and
  // the n-copy maximally resourceful state phi+; equals base^-n with base d
  // for Incoherent(d) and min(dA,dB) for the separable model (per copy of
  // this model).  Strictly decreasing in n.  The inverse solves c(x) = y.
  double overlap_bound_c(int n) const;
  double overlap_bound_c_inverse(double y) const;

  // Channel-level freeness certificate for a square channel on this model's
  // space.  Incoherent: exact via the input-diagonal Choi blocks.  Separable:
  // falsification over `samples` sampled free inputs.
  ChannelCertReport is_rno_channel(const Channel& ch, double tol = 1e-9,
                                   int samples = 500,
                                   std::uint64_t seed = 1) const;

  // Largest overlap |<phi|psi>| over free pure states phi.  Exact for the
  // incoherent model and single-copy separable model; for tensor copies of
  // the separable model this is a multi-start alternating maximization and
  // is reported as a lower bound on the true maximum.
  double max_free_overlap(const Vector& psi, Rng& rng, int restarts = 8) const;
};

// Adds rows forcing block `blk_pt` to equal the partial transpose of block
// `blk_src` over `subset` of the tensor factors described by `dims`.
void add_partial_transpose_link(conic::SdpProblem& problem, int blk_pt,
                                int blk_src, const std::vector<int>& dims,
                                const std::vector<int>& subset);

// Freeness certificate for a channel between two (possibly different) model
// spaces: every free input of `in_model` must map to a free state of
// `out_model`.  Exact when both models are incoherent; sampling-based
// falsification otherwise.
ChannelCertReport certify_channel_free(const FreeSetModel& in_model,
                                       const FreeSetModel& out_model,
                                       const Channel& ch, double tol = 1e-9,
                                       int samples = 500,
                                       std::uint64_t seed = 1);

}  // namespace rno::freesets

#endif  // RNO_FREESETS_HPP_
