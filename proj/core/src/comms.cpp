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

#include "rno/comms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rno/conic.hpp"
#include "rno/errors.hpp"
#include "rno/freesets.hpp"

namespace rno::comms {

using conic::SdpProblem;
using conic::SolveResult;
using conic::SolveStatus;
using freesets::ChannelVerdict;
using freesets::FreeSetModel;
using qmath::adjoint_apply;
using qmath::apply_channel_matrix;
using qmath::basis_vector;
using qmath::Rng;

namespace {

conic::SolverOptions solver_options(const dynamic_measures::SolveOptions& o) {
  conic::SolverOptions s;
  s.tol = o.tol;
  s.max_iter = o.max_iter;
  return s;
}

int flat(int i, int a, int dout) { return i * dout + a; }

// Off-diagonal coordinates of the diagonal input blocks: the entries a free
// (incoherence-preserving) Choi must vanish on.
std::vector<std::pair<int, int>> free_zero_mask(int din, int dout) {
  std::vector<std::pair<int, int>> mask;
  for (int i = 0; i < din; ++i) {
    for (int a = 0; a < dout; ++a) {
      for (int b = a + 1; b < dout; ++b) {
        mask.emplace_back(flat(i, a, dout), flat(i, b, dout));
      }
    }
  }
  return mask;
}

// Exact freeness certificate; one-dimensional ends fall back to the direct
// Choi mask test (the model constructor requires d >= 2, but the criterion
// itself degenerates gracefully: a trace map is always free, a preparation
// is free exactly when the prepared state is diagonal).
bool certifies_free(const Channel& ch, double tol) {
  if (ch.in_dim() >= 2 && ch.out_dim() >= 2) {
    const auto report = freesets::certify_channel_free(
        FreeSetModel::incoherent(ch.in_dim()),
        FreeSetModel::incoherent(ch.out_dim()), ch, tol);
    return report.verdict == ChannelVerdict::Free;
  }
  for (const auto& [r, c] : free_zero_mask(ch.in_dim(), ch.out_dim())) {
    if (std::abs(ch.choi(r, c)) > tol) return false;
  }
  return true;
}

Matrix basis_projector(int dim, int k) {
  Matrix p = Matrix::Zero(dim, dim);
  p(k, k) = Complex(1, 0);
  return p;
}

// Measure the message register in its basis and prepare the k-th diagonal
// state of the joint channel input.  Diagonal outputs on every input make
// the channel free by construction.
Channel prepare_encoder(int m, const std::vector<int>& out_dims,
                        const std::vector<std::vector<double>>& preps) {
  int dout = 1;
  for (int d : out_dims) dout *= d;
  std::vector<Matrix> kraus;
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < dout; ++i) {
      const double w = preps[k][i];
      if (w <= 0.0) continue;
      Matrix op = Matrix::Zero(dout, m);
      op(i, k) = Complex(std::sqrt(w), 0);
      kraus.push_back(std::move(op));
    }
  }
  return Channel::from_kraus({m}, out_dims, kraus);
}

std::vector<std::vector<double>> classical_preps(int m, int dout, int join) {
  // join = dimension of the ancilla tail of the joint input; the message is
  // embedded cyclically on the channel factor with the ancilla at |0>.
  std::vector<std::vector<double>> preps(m, std::vector<double>(dout, 0.0));
  const int dchan = dout / join;
  for (int k = 0; k < m; ++k) preps[k][(k % dchan) * join] = 1.0;
  return preps;
}

// Best free decoder for fixed encoder outputs rho_k: maximize
// (1/m) sum_k <k| D(rho_k) |k> over free channels D, which is linear in the
// decoder Choi under linear freeness rows.
Channel solve_decoder(const std::vector<Matrix>& rho,
                      const std::vector<int>& in_dims, int m,
                      const dynamic_measures::SolveOptions& opts) {
  int din = 1;
  for (int d : in_dims) din *= d;
  const int side = din * m;

  SdpProblem prob;
  const int jb = prob.add_psd_block(side);
  prob.add_trace_second_rows(jb, din, m, Matrix::Identity(din, din));
  const auto mask = free_zero_mask(din, m);
  for (const auto& [r, c] : mask) {
    const int row_re = prob.new_row(0.0);
    prob.add_entry(row_re, jb, r, c, Complex(1, 0));
    const int row_im = prob.new_row(0.0);
    prob.add_entry(row_im, jb, r, c, Complex(0, -1));
  }

  // The 1/m average is deferred to the exact evaluation: the unscaled sum
  // keeps the objective well conditioned for the first-order solver.
  Matrix cost = Matrix::Zero(side, side);
  for (int k = 0; k < m; ++k) {
    cost += qmath::kron(rho[k].transpose(), basis_projector(m, k));
  }
  prob.add_objective(jb, cost);
  prob.set_maximize(true);

  const SolveResult res = conic::solve(prob, solver_options(opts));
  // A stalled solve with a primal-feasible iterate is still a usable ascent
  // direction: the caller evaluates the polished channel exactly and keeps
  // its incumbent when the candidate fails to improve, so only infeasible
  // or diverging runs are fatal here.
  const bool usable =
      res.status == SolveStatus::Optimal ||
      (res.status == SolveStatus::MaxIter && res.primal_residual <= 1e-5);
  if (!usable) {
    throw Error(ErrorCode::SolverError,
                std::string("decoder SDP ended ") +
                    conic::status_name(res.status));
  }

  const Matrix polished =
      qmath::polish_choi(prob.block_matrix(jb, res.x), din, m, mask);
  return Channel::from_choi(in_dims, {m}, polished);
}

// Heisenberg duals G_k = (N x W)^dag(D^dag(|k><k|)) of the decoder against
// the joint channel: the protocol value of a diagonal-prepping encoder is
// (1/m) sum_k sum_i preps[k][i] G_k(i, i), evaluated exactly.
std::vector<Matrix> decoder_duals(const Channel& middle,
                                  const Channel& decoder, int m) {
  std::vector<Matrix> duals;
  duals.reserve(m);
  for (int k = 0; k < m; ++k) {
    duals.push_back(adjoint_apply(
        middle, adjoint_apply(decoder, basis_projector(m, k))));
  }
  return duals;
}

double prep_value(const std::vector<std::vector<double>>& preps,
                  const std::vector<Matrix>& duals, int m, int din) {
  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < din; ++i) {
      total += preps[k][i] * duals[k](i, i).real();
    }
  }
  return total / m;
}

}  // namespace

double protocol_simulate(const ProtocolSpec& spec, double tol) {
  if (spec.m < 1)
    throw Error(ErrorCode::InvalidRequest, "protocol needs m >= 1 messages");
  if (spec.ancilla_dim < 1)
    throw Error(ErrorCode::InvalidRequest, "protocol needs ancilla_dim >= 1");
  if (spec.w.in_dim() != spec.ancilla_dim ||
      spec.w.out_dim() != spec.ancilla_dim)
    throw Error(ErrorCode::InvalidShape,
                "ancilla channel dims do not match ancilla_dim");
  if (spec.encoder.in_dim() != spec.m)
    throw Error(ErrorCode::InvalidShape,
                "encoder input must be the m-dimensional message register");
  if (spec.decoder.out_dim() != spec.m)
    throw Error(ErrorCode::InvalidShape,
                "decoder output must be the m-dimensional message register");
  if (spec.encoder.out_dim() != spec.n.in_dim() * spec.w.in_dim())
    throw Error(ErrorCode::InvalidShape,
                "encoder output does not match the joint channel input");
  if (spec.decoder.in_dim() != spec.n.out_dim() * spec.w.out_dim())
    throw Error(ErrorCode::InvalidShape,
                "decoder input does not match the joint channel output");

  if (!certifies_free(spec.encoder, tol))
    throw Error(ErrorCode::NotFreeComponent, "encoder does not certify free");
  if (!certifies_free(spec.decoder, tol))
    throw Error(ErrorCode::NotFreeComponent, "decoder does not certify free");
  if (!certifies_free(spec.w, tol))
    throw Error(ErrorCode::NotFreeComponent,
                "ancilla channel does not certify free");

  const Channel middle = qmath::tensor_channels(spec.n, spec.w);
  double total = 0.0;
  for (int k = 0; k < spec.m; ++k) {
    const Matrix sent =
        apply_channel_matrix(spec.encoder, basis_projector(spec.m, k));
    const Matrix received = apply_channel_matrix(middle, sent);
    const Matrix decoded = apply_channel_matrix(spec.decoder, received);
    total += decoded(k, k).real();
  }
  return std::clamp(total / spec.m, 0.0, 1.0);
}

SeesawResult seesaw_success_probability(const Channel& n, int m,
                                        int ancilla_dim,
                                        const SeesawConfig& cfg) {
  if (m < 2)
    throw Error(ErrorCode::InvalidRequest, "see-saw needs m >= 2 messages");
  if (ancilla_dim < 1)
    throw Error(ErrorCode::InvalidRequest, "see-saw needs ancilla_dim >= 1");
  const Channel w = qmath::identity_channel({ancilla_dim});
  const Channel middle = qmath::tensor_channels(n, w);
  const int din = middle.in_dim();
  const int dout = middle.out_dim();
  if (std::max(m * din, dout * m) > 64)
    throw Error(ErrorCode::TooLarge,
                "see-saw Choi side exceeds the supported guard");

  const int restarts = std::max(1, cfg.restarts);
  const int rounds = std::max(1, cfg.rounds);

  SeesawResult best;
  best.f_hat = -1.0;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(r));
    std::vector<std::vector<double>> preps;
    if (r == 0) {
      preps = classical_preps(m, din, w.in_dim());
    } else {
      preps.reserve(m);
      for (int k = 0; k < m; ++k) preps.push_back(qmath::sample_simplex(din, rng));
    }
    Channel decoder;
    std::vector<Matrix> duals;
    std::vector<double> history;
    double previous = -1.0;
    for (int round = 0; round < rounds; ++round) {
      std::vector<Matrix> rho;
      rho.reserve(m);
      const Channel encoder = prepare_encoder(m, middle.in_dims, preps);
      for (int k = 0; k < m; ++k) {
        const Matrix sent =
            apply_channel_matrix(encoder, basis_projector(m, k));
        Matrix received = apply_channel_matrix(middle, sent);
        received = 0.5 * (received + received.adjoint()).eval();
        rho.push_back(std::move(received));
      }

      // The SDP reaches the optimum only to solver accuracy, so a re-solve
      // can land a hair below the incumbent; evaluating both exactly and
      // keeping the better one makes the half-step monotone outright.
      const Channel candidate =
          solve_decoder(rho, middle.out_dims, m, cfg.solve);
      const std::vector<Matrix> candidate_duals =
          decoder_duals(middle, candidate, m);
      const double candidate_value =
          prep_value(preps, candidate_duals, m, din);
      if (round == 0 || candidate_value > previous) {
        decoder = candidate;
        duals = candidate_duals;
      }
      const double decoder_value =
          std::max(candidate_value, round == 0 ? candidate_value : previous);
      if (decoder_value < previous - 1e-9)
        throw Error(ErrorCode::SolverError,
                    "see-saw objective decreased on the decoder half-step");

      // With the decoder fixed, the objective only reads the encoder's
      // diagonal input blocks, and freeness forces those diagonal, so the
      // optimal half-step prepares the best basis state per message.
      double value = 0.0;
      std::vector<std::vector<double>> next(m, std::vector<double>(din, 0.0));
      for (int k = 0; k < m; ++k) {
        int pick = 0;
        double pick_value = duals[k](0, 0).real();
        for (int i = 1; i < din; ++i) {
          if (duals[k](i, i).real() > pick_value) {
            pick = i;
            pick_value = duals[k](i, i).real();
          }
        }
        next[k][pick] = 1.0;
        value += pick_value / m;
      }
      if (value < decoder_value - 1e-9)
        throw Error(ErrorCode::SolverError,
                    "see-saw objective decreased on the encoder half-step");
      preps = std::move(next);

      history.push_back(value);
      const bool converged = previous >= 0.0 &&
                             value - previous < cfg.convergence_gain;
      previous = value;
      if (converged) break;
    }

    if (previous > best.f_hat) {
      best.f_hat = previous;
      best.spec.n = n;
      best.spec.m = m;
      best.spec.ancilla_dim = ancilla_dim;
      best.spec.encoder = prepare_encoder(m, middle.in_dims, preps);
      best.spec.decoder = decoder;
      best.spec.w = w;
      best.round_values = history;
    }
  }
  best.f_hat = std::clamp(best.f_hat, 0.0, 1.0);
  return best;
}

const char* consistency_verdict_name(ConsistencyVerdict verdict) {
  switch (verdict) {
    case ConsistencyVerdict::Consistent:
      return "Consistent";
    case ConsistencyVerdict::Violation:
      return "Violation";
  }
  return "Unknown";
}

CapacityReport capacity_bound(const Channel& n, double theta, double delta,
                              const CapacityConfig& cfg) {
  if (!(theta > 0.0 && theta < 1.0))
    throw Error(ErrorCode::InvalidRequest, "theta must lie in (0, 1)");
  if (!(delta >= 0.0 && delta < 1.0))
    throw Error(ErrorCode::InvalidRequest, "delta must lie in [0, 1)");
  if (!(theta + delta < 1.0))
    throw Error(ErrorCode::InvalidRequest, "theta + delta must stay below 1");

  CapacityReport report;
  report.theta = theta;
  report.delta = delta;

  const auto smoothed =
      dynamic_measures::smoothed_channel_robustness(n, delta, cfg.smoothing);
  report.l_delta_estimate = smoothed.upper_estimate;
  report.l_estimate_heuristic = delta > 0.0;
  report.notes.push_back(
      "bound_on_m uses an upper estimate of the smoothed robustness, so it "
      "can only undershoot the theorem's right-hand side; a consistent "
      "achievability result is sound evidence for the inequality here");

  const double slack = 1.0 - theta - delta;
  if (report.l_delta_estimate <= 0.0) {
    report.bound_on_m = std::numeric_limits<double>::infinity();
    report.c_theta_bits = std::numeric_limits<double>::infinity();
    report.notes.push_back(
        "the robustness estimate vanished, so the bound is vacuous");
  } else {
    report.bound_on_m = 1.0 / (report.l_delta_estimate * slack);
    report.c_theta_bits = std::log2(report.bound_on_m);
  }

  // Achievability scan: a single message always arrives, and the see-saw
  // value is nonincreasing in m, so the first failure ends the scan.
  report.achieved_m = 1;
  report.achieved_f = 1.0;
  for (int m = 2; m <= cfg.max_messages; ++m) {
    const int din = n.in_dim();
    const int dout = n.out_dim();
    if (std::max(m * din, dout * m) > 64) {
      report.notes.push_back(
          "the achievability scan stopped at the dimension guard");
      break;
    }
    const SeesawResult run =
        seesaw_success_probability(n, m, 1, cfg.seesaw);
    if (1.0 - run.f_hat <= theta + 1e-9) {
      report.achieved_m = m;
      report.achieved_f = run.f_hat;
    } else {
      break;
    }
  }

  if (static_cast<double>(report.achieved_m) <= report.bound_on_m + 1e-9) {
    report.verdict = ConsistencyVerdict::Consistent;
  } else {
    report.verdict = ConsistencyVerdict::Violation;
    report.notes.push_back(
        "the protocol delivered more messages than the bound allows on this "
        "instance; the finding is recorded verbatim");
  }
  return report;
}

}  // namespace rno::comms
