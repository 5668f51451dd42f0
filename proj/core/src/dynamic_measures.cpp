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

#include "rno/dynamic_measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "rno/freesets.hpp"

namespace rno::dynamic_measures {

using conic::SdpProblem;
using conic::SolveResult;
using conic::SolveStatus;
using freesets::ChannelVerdict;
using freesets::FreeSetModel;
using qmath::apply_channel_matrix;
using qmath::Rng;

namespace {

conic::SolverOptions solver_options(const SolveOptions& opts) {
  conic::SolverOptions s;
  s.tol = opts.tol;
  s.max_iter = opts.max_iter;
  return s;
}

double worst_residual(const SolveResult& r) {
  return std::max({r.primal_residual, r.dual_residual, std::abs(r.gap)});
}

// Flat Choi coordinate of input index i, output index a.
int flat(int i, int a, int dout) { return i * dout + a; }

// Coordinate pairs that an incoherence-preserving Choi must vanish on: the
// off-diagonal entries of every diagonal input block.
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

// Exact freeness certificate for a (possibly rectangular) channel between
// computational-basis models.
freesets::ChannelCertReport certify(const Channel& e, double tol = 1e-9) {
  return freesets::certify_channel_free(FreeSetModel::incoherent(e.in_dim()),
                                        FreeSetModel::incoherent(e.out_dim()),
                                        e, tol);
}

Channel free_placeholder(const Channel& like) {
  return qmath::replacement_channel(qmath::maximally_mixed(like.out_dims),
                                    like.in_dims);
}

}  // namespace

double diamond_lower_bound(const Channel& e1, const Channel& e2,
                           const Matrix& a) {
  const int din = e1.in_dim();
  const int dout = e1.out_dim();
  if (a.rows() != din || a.cols() != din) {
    throw Error(ErrorCode::InvalidShape,
                "reference preparation must be d_in x d_in");
  }
  const double fro = a.norm();
  if (fro < 1e-15) {
    throw Error(ErrorCode::InvalidShape, "reference preparation is zero");
  }
  const Matrix big = qmath::kron(a / fro, Matrix::Identity(dout, dout));
  return 0.5 * qmath::trace_norm(big * (e1.choi - e2.choi) * big.adjoint());
}

double diamond_distance(const Channel& e1, const Channel& e2,
                        const SolveOptions& opts) {
  if (e1.in_dims != e2.in_dims || e1.out_dims != e2.out_dims) {
    throw Error(ErrorCode::InvalidShape,
                "diamond distance needs matching channel dimensions");
  }
  const int din = e1.in_dim();
  const int dout = e1.out_dim();
  const int side = din * dout;
  const Matrix delta = e1.choi - e2.choi;
  if (delta.cwiseAbs().maxCoeff() < 1e-14) {
    return 0.0;
  }

  // ||delta||_diamond = min mu  over  Z1, Z2 >= 0  with  Z1 - Z2 = J_delta
  // and tr_out(Z1 + Z2) = mu * I  (dual of the usual maximization over
  // stabilized inputs; the Jordan split of J_delta is an interior start).
  SdpProblem prob;
  const int z1 = prob.add_psd_block(side);
  const int z2 = prob.add_psd_block(side);
  const int mu = prob.add_nonneg_block(1);

  for (int r = 0; r < side; ++r) {
    for (int c = r; c < side; ++c) {
      const Complex dv = delta(r, c);
      const int row_re = prob.new_row(dv.real());
      prob.add_entry(row_re, z1, r, c, Complex(1, 0));
      prob.add_entry(row_re, z2, r, c, Complex(-1, 0));
      if (r != c) {
        const int row_im = prob.new_row(dv.imag());
        prob.add_entry(row_im, z1, r, c, Complex(0, -1));
        prob.add_entry(row_im, z2, r, c, Complex(0, 1));
      }
    }
  }
  for (int r = 0; r < din; ++r) {
    for (int c = r; c < din; ++c) {
      const int row_re = prob.new_row(0.0);
      for (int a = 0; a < dout; ++a) {
        prob.add_entry(row_re, z1, flat(r, a, dout), flat(c, a, dout),
                       Complex(1, 0));
        prob.add_entry(row_re, z2, flat(r, a, dout), flat(c, a, dout),
                       Complex(1, 0));
      }
      if (r == c) {
        prob.add_scalar_entry(row_re, mu, 0, -1.0);
      } else {
        const int row_im = prob.new_row(0.0);
        for (int a = 0; a < dout; ++a) {
          prob.add_entry(row_im, z1, flat(r, a, dout), flat(c, a, dout),
                         Complex(0, -1));
          prob.add_entry(row_im, z2, flat(r, a, dout), flat(c, a, dout),
                         Complex(0, -1));
        }
      }
    }
  }
  prob.add_scalar_objective(mu, 0, 1.0);

  const SolveResult res = conic::solve(prob, solver_options(opts));
  if (res.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::SolverError,
                std::string("diamond SDP ended ") +
                    conic::status_name(res.status));
  }
  const double value =
      std::clamp(0.5 * prob.block_vector(mu, res.x)(0), 0.0, 1.0);

  // The SDP value must dominate every variational sample; a violation means
  // the solve silently went wrong.
  Rng rng(7);
  double best_lb =
      diamond_lower_bound(e1, e2, Matrix::Identity(din, din));
  for (int t = 0; t < 6; ++t) {
    best_lb = std::max(
        best_lb, diamond_lower_bound(e1, e2, qmath::sample_ginibre(din, din, rng)));
  }
  if (best_lb > value + 1e-6) {
    throw Error(ErrorCode::SolverError,
                "diamond SDP value contradicted by a variational lower bound");
  }
  return value;
}

ChannelRobustnessResult channel_rno_robustness(const Channel& e,
                                               const SolveOptions& opts) {
  const int din = e.in_dim();
  const int dout = e.out_dim();
  const int side = din * dout;
  const Matrix& j = e.choi;

  ChannelRobustnessResult out;
  if (certify(e).verdict == ChannelVerdict::Free) {
    // Already free: p = 1 and the companion never gets any weight.
    out.p_star = 1.0;
    out.status = SolveStatus::Optimal;
    out.companion = free_placeholder(e);
    out.resulting_free = e;
    return out;
  }

  // maximize p subject to  Y >= 0,  tr_out Y + p I = I,  and pJ + Y carrying
  // only diagonal entries on diagonal input blocks.
  SdpProblem prob;
  const int yb = prob.add_psd_block(side);
  const int pb = prob.add_nonneg_block(1);

  for (int r = 0; r < din; ++r) {
    for (int c = r; c < din; ++c) {
      const int row_re = prob.new_row(r == c ? 1.0 : 0.0);
      for (int a = 0; a < dout; ++a) {
        prob.add_entry(row_re, yb, flat(r, a, dout), flat(c, a, dout),
                       Complex(1, 0));
      }
      if (r == c) {
        prob.add_scalar_entry(row_re, pb, 0, 1.0);
      } else {
        const int row_im = prob.new_row(0.0);
        for (int a = 0; a < dout; ++a) {
          prob.add_entry(row_im, yb, flat(r, a, dout), flat(c, a, dout),
                         Complex(0, -1));
        }
      }
    }
  }
  for (const auto& [r, c] : free_zero_mask(din, dout)) {
    const Complex jv = j(r, c);
    const int row_re = prob.new_row(0.0);
    prob.add_entry(row_re, yb, r, c, Complex(1, 0));
    prob.add_scalar_entry(row_re, pb, 0, jv.real());
    const int row_im = prob.new_row(0.0);
    prob.add_entry(row_im, yb, r, c, Complex(0, -1));
    prob.add_scalar_entry(row_im, pb, 0, jv.imag());
  }
  prob.add_scalar_objective(pb, 0, 1.0);
  prob.set_maximize(true);

  const SolveResult res = conic::solve(prob, solver_options(opts));
  if (res.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::SolverError,
                std::string("channel robustness SDP ended ") +
                    conic::status_name(res.status));
  }
  const double p = std::clamp(prob.block_vector(pb, res.x)(0), 0.0, 1.0);
  out.p_star = p;
  out.status = res.status;
  out.solver_residual = worst_residual(res);

  const Matrix y = prob.block_matrix(yb, res.x);
  const Matrix m_free = qmath::polish_choi(p * j + y, din, dout,
                                           free_zero_mask(din, dout));
  out.resulting_free =
      Channel::from_choi(e.in_dims, e.out_dims, m_free);
  if (1.0 - p < 1e-9) {
    out.companion = free_placeholder(e);
  } else {
    const Matrix g =
        qmath::polish_choi((m_free - p * j) / (1.0 - p), din, dout);
    out.companion = Channel::from_choi(e.in_dims, e.out_dims, g);
    out.reconstruction_residual =
        (p * j + (1.0 - p) * g - m_free).cwiseAbs().maxCoeff();
  }
  if (certify(out.resulting_free, 1e-6).verdict != ChannelVerdict::Free) {
    throw Error(ErrorCode::SolverError,
                "mixed channel failed its freeness certificate after polish");
  }
  return out;
}

namespace {

// Candidate directions for the smoothing line search: the discrete Fourier
// unitary (a strong coherence generator), then sampled unitaries and
// channels.  Directions depend only on dims and seed, so sweeps at several
// radii can share them.
std::vector<Channel> smoothing_directions(const Channel& e,
                                          const SmoothingConfig& cfg) {
  const int din = e.in_dim();
  const int dout = e.out_dim();
  // restarts == 0 disables the search entirely (the caller keeps the exact
  // unsmoothed value); negative values fall back to the single seed direction.
  const int want = cfg.restarts == 0 ? 0 : std::max(1, cfg.restarts);
  std::vector<Channel> dirs;
  Rng rng(cfg.seed);
  if (want == 0) return dirs;
  if (din == dout) {
    Matrix f(din, din);
    const double tau = 2.0 * std::numbers::pi / din;
    for (int a = 0; a < din; ++a) {
      for (int b = 0; b < din; ++b) {
        f(a, b) = std::polar(1.0 / std::sqrt(double(din)), tau * a * b);
      }
    }
    dirs.push_back(qmath::unitary_channel(f));
  }
  while (static_cast<int>(dirs.size()) < want) {
    if (din == dout && dirs.size() % 2 == 1) {
      dirs.push_back(qmath::unitary_channel(qmath::sample_unitary(din, rng)));
    } else {
      dirs.push_back(qmath::sample_channel(e.in_dims, e.out_dims, 2, rng));
    }
  }
  return dirs;
}

}  // namespace

std::vector<SmoothedChannelResult> smoothed_channel_sweep(
    const Channel& e, const std::vector<double>& eps_grid,
    const SmoothingConfig& cfg) {
  for (double eps : eps_grid) {
    if (!(eps >= 0.0 && eps < 1.0)) {
      throw Error(ErrorCode::InvalidRequest,
                  "smoothing radius must lie in [0, 1)");
    }
  }
  const ChannelRobustnessResult base = channel_rno_robustness(e, cfg.solve);

  SmoothedChannelResult running;
  running.upper_estimate = base.p_star;
  running.witness = e;
  running.witness_distance = 0.0;

  std::vector<int> order(eps_grid.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return eps_grid[a] < eps_grid[b]; });

  std::vector<Channel> dirs;
  std::vector<double> dist;
  std::vector<SmoothedChannelResult> results(eps_grid.size());
  for (int idx : order) {
    const double eps = eps_grid[idx];
    if (eps > 0.0) {
      if (dirs.empty()) {
        dirs = smoothing_directions(e, cfg);
        dist.reserve(dirs.size());
        for (const Channel& d : dirs) {
          dist.push_back(diamond_distance(d, e, cfg.solve));
        }
      }
      for (size_t k = 0; k < dirs.size(); ++k) {
        if (dist[k] < 1e-12) continue;  // direction coincides with e
        const double t = std::min(1.0, eps / dist[k]);
        const Channel moved =
            qmath::mix_channels({e, dirs[k]}, {1.0 - t, t});
        const double val = channel_rno_robustness(moved, cfg.solve).p_star;
        if (val < running.upper_estimate) {
          running.upper_estimate = val;
          running.witness = moved;
          running.witness_distance = t * dist[k];
        }
      }
    }
    results[idx] = running;
  }
  return results;
}

SmoothedChannelResult smoothed_channel_robustness(const Channel& e,
                                                  double eps,
                                                  const SmoothingConfig& cfg) {
  return smoothed_channel_sweep(e, {eps}, cfg).front();
}

double channel_divergence_to_free(const Channel& e, const SolveOptions& opts) {
  const int din = e.in_dim();
  const int dout = e.out_dim();
  const int side = din * dout;
  const Matrix& j = e.choi;
  if (certify(e).verdict == ChannelVerdict::Free) {
    return 0.0;
  }

  // minimize lambda over K = S + J with S >= 0, K in the free Choi cone:
  // zero off-diagonals on diagonal input blocks and tr_out K = lambda I.
  SdpProblem prob;
  const int sb = prob.add_psd_block(side);
  const int lb = prob.add_nonneg_block(1);

  for (const auto& [r, c] : free_zero_mask(din, dout)) {
    const Complex jv = j(r, c);
    const int row_re = prob.new_row(-jv.real());
    prob.add_entry(row_re, sb, r, c, Complex(1, 0));
    const int row_im = prob.new_row(-jv.imag());
    prob.add_entry(row_im, sb, r, c, Complex(0, -1));
  }
  const Matrix jtr = qmath::partial_trace(j, {din, dout}, {0});
  for (int r = 0; r < din; ++r) {
    for (int c = r; c < din; ++c) {
      const Complex tv = jtr(r, c);
      const int row_re = prob.new_row(-tv.real());
      for (int a = 0; a < dout; ++a) {
        prob.add_entry(row_re, sb, flat(r, a, dout), flat(c, a, dout),
                       Complex(1, 0));
      }
      if (r == c) {
        prob.add_scalar_entry(row_re, lb, 0, -1.0);
      } else {
        const int row_im = prob.new_row(-tv.imag());
        for (int a = 0; a < dout; ++a) {
          prob.add_entry(row_im, sb, flat(r, a, dout), flat(c, a, dout),
                         Complex(0, -1));
        }
      }
    }
  }
  prob.add_scalar_objective(lb, 0, 1.0);

  const SolveResult res = conic::solve(prob, solver_options(opts));
  if (res.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::SolverError,
                std::string("divergence SDP ended ") +
                    conic::status_name(res.status));
  }
  const double lambda = std::max(1.0, prob.block_vector(lb, res.x)(0));
  return std::log2(lambda);
}

}  // namespace rno::dynamic_measures
