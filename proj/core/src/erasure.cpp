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

#include "rno/erasure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rno/errors.hpp"
#include "rno/freesets.hpp"

namespace rno::erasure {
namespace {

using qmath::ChoiNorm;
using rno::Complex;
using rno::Matrix;
using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

constexpr double kPi = std::numbers::pi;

// Reconstructs p as num/den with den <= 1000 when the double is within 1e-9
// of such a fraction (smallest denominator wins, so 0.5 maps to 1/2).
std::optional<BigRat> small_rational(double p) {
  for (long den = 1; den <= 1000; ++den) {
    const double scaled = p * static_cast<double>(den);
    const double num = std::round(scaled);
    if (std::abs(scaled - num) < 1e-9) {
      const long n = static_cast<long>(num);
      if (n <= 0 || n >= den) return std::nullopt;  // outside (0,1)
      return BigRat(n, den);
    }
  }
  return std::nullopt;
}

BigInt binomial_coeff(int n, int k) {
  BigInt c = 1;
  for (int i = 0; i < k; ++i) {
    c *= n - i;
    c /= i + 1;  // always divides exactly at this point
  }
  return c;
}

double to_double(const BigRat& r) {
  return static_cast<double>(r);
}

// C(n,k) p^k (1-p)^(n-k) exactly.
BigRat rational_pmf(int n, const BigRat& p, int k) {
  BigRat term(binomial_coeff(n, k));
  const BigRat q = 1 - p;
  for (int i = 0; i < k; ++i) term *= p;
  for (int i = 0; i < n - k; ++i) term *= q;
  return term;
}

long double fallback_pmf(int n, double p, int k) {
  // Iterate the ratio recurrence from (1-p)^n; exactness is not claimed on
  // this path, determinism is.
  long double term = 1.0L;
  const long double lp = p, lq = 1.0L - static_cast<long double>(p);
  for (int i = 0; i < n; ++i) term *= lq;
  for (int i = 0; i < k; ++i)
    term *= lp * static_cast<long double>(n - i) /
            (lq * static_cast<long double>(i + 1));
  return term;
}

int floor_np(int n, double p, const std::optional<BigRat>& pr) {
  if (pr) {
    const BigRat v = *pr * n;
    const BigInt fl = numerator(v) / denominator(v);  // both positive
    return static_cast<int>(fl);
  }
  return static_cast<int>(std::floor(static_cast<double>(n) * p));
}

void check_probability(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw Error(ErrorCode::InvalidRequest,
                "mixing weight must satisfy 0 < p < 1");
}

// Trace-one Chois of qubit channels that are diagonal in the Bell basis have
// four real eigenvalues that tensor multiplicatively; detect that structure.
std::optional<std::array<double, 4>> bell_diagonal_spectrum(const Matrix& j) {
  if (j.rows() != 4) return std::nullopt;
  static const Matrix bell = [] {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix b = Matrix::Zero(4, 4);
    const Complex i(0.0, 1.0);
    b.col(0) << s, 0, 0, s;        // identity
    b.col(1) << 0, s, s, 0;        // X
    b.col(2) << 0, i * s, -i * s, 0;  // Y
    b.col(3) << s, 0, 0, -s;       // Z
    return b;
  }();
  const Matrix d = bell.adjoint() * j * bell;
  std::array<double, 4> eig{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r == c) continue;
      if (std::abs(d(r, c)) > 1e-12) return std::nullopt;
    }
    if (std::abs(d(r, r).imag()) > 1e-12) return std::nullopt;
    eig[static_cast<std::size_t>(r)] = d(r, r).real();
  }
  return eig;
}

// ||J(Gamma_n) - J(theta^n)||_1 for Bell-diagonal factors: every eigenvalue
// of the n-copy Chois is a product over factors, so the norm is a sum over
// 4^n base-4 words without any matrix being formed.
double bell_fast_trace_norm(const std::array<double, 4>& s,
                            const std::array<double, 4>& t, int n) {
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) total *= 4;
  std::vector<int> word(static_cast<std::size_t>(n), 0);
  std::vector<double> pre(static_cast<std::size_t>(n) + 1, 1.0);
  std::vector<double> suf(static_cast<std::size_t>(n) + 1, 1.0);
  double dist = 0.0;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rem = idx;
    for (int i = n - 1; i >= 0; --i) {
      word[static_cast<std::size_t>(i)] = static_cast<int>(rem % 4);
      rem /= 4;
    }
    for (int i = 0; i < n; ++i)
      pre[static_cast<std::size_t>(i) + 1] =
          pre[static_cast<std::size_t>(i)] *
          t[static_cast<std::size_t>(word[static_cast<std::size_t>(i)])];
    suf[static_cast<std::size_t>(n)] = 1.0;
    for (int i = n - 1; i >= 0; --i)
      suf[static_cast<std::size_t>(i)] =
          suf[static_cast<std::size_t>(i) + 1] *
          t[static_cast<std::size_t>(word[static_cast<std::size_t>(i)])];
    const double theta_eig = pre[static_cast<std::size_t>(n)];
    double gamma_eig = 0.0;
    for (int i = 0; i < n; ++i)
      gamma_eig += pre[static_cast<std::size_t>(i)] *
                   s[static_cast<std::size_t>(word[static_cast<std::size_t>(i)])] *
                   suf[static_cast<std::size_t>(i) + 1];
    gamma_eig /= static_cast<double>(n);
    dist += std::abs(gamma_eig - theta_eig);
  }
  return dist;
}

// Entry of the n-fold tensor Choi in the (inputs..., outputs...) layout used
// throughout: row = (i_1..i_n, a_1..a_n), and factor k contributes its
// (i_k*dout + a_k, j_k*dout + b_k) entry.
struct ChoiIndexer {
  int n, din, dout;
  long long dim_in_total, dim_out_total;

  ChoiIndexer(int copies, int d_in, int d_out)
      : n(copies), din(d_in), dout(d_out), dim_in_total(1), dim_out_total(1) {
    for (int i = 0; i < n; ++i) {
      dim_in_total *= din;
      dim_out_total *= dout;
    }
  }

  long long side() const { return dim_in_total * dim_out_total; }

  // Decomposes a flat Choi index into per-factor (i*dout + a) indices.
  void split(long long flat, std::vector<int>& factor) const {
    long long in_part = flat / dim_out_total;
    long long out_part = flat % dim_out_total;
    for (int k = n - 1; k >= 0; --k) {
      const int i = static_cast<int>(in_part % din);
      const int a = static_cast<int>(out_part % dout);
      factor[static_cast<std::size_t>(k)] = i * dout + a;
      in_part /= din;
      out_part /= dout;
    }
  }
};

// J(Gamma_n) - J(theta^n) assembled entrywise from the single-copy Chois.
Matrix dense_difference(const Matrix& jpsi, const Matrix& jtheta, int n,
                        int din, int dout) {
  const ChoiIndexer ix(n, din, dout);
  const long long side = ix.side();
  Matrix diff(side, side);
  std::vector<int> row_f(static_cast<std::size_t>(n));
  std::vector<int> col_f(static_cast<std::size_t>(n));
  std::vector<Complex> pre(static_cast<std::size_t>(n) + 1);
  std::vector<Complex> suf(static_cast<std::size_t>(n) + 1);
  for (long long r = 0; r < side; ++r) {
    ix.split(r, row_f);
    for (long long c = 0; c < side; ++c) {
      ix.split(c, col_f);
      pre[0] = Complex(1.0, 0.0);
      for (int k = 0; k < n; ++k)
        pre[static_cast<std::size_t>(k) + 1] =
            pre[static_cast<std::size_t>(k)] *
            jtheta(row_f[static_cast<std::size_t>(k)],
                   col_f[static_cast<std::size_t>(k)]);
      suf[static_cast<std::size_t>(n)] = Complex(1.0, 0.0);
      for (int k = n - 1; k >= 0; --k)
        suf[static_cast<std::size_t>(k)] =
            suf[static_cast<std::size_t>(k) + 1] *
            jtheta(row_f[static_cast<std::size_t>(k)],
                   col_f[static_cast<std::size_t>(k)]);
      Complex gamma(0.0, 0.0);
      for (int k = 0; k < n; ++k)
        gamma += pre[static_cast<std::size_t>(k)] *
                 jpsi(row_f[static_cast<std::size_t>(k)],
                      col_f[static_cast<std::size_t>(k)]) *
                 suf[static_cast<std::size_t>(k) + 1];
      diff(r, c) = gamma / static_cast<double>(n) -
                   pre[static_cast<std::size_t>(n)];
    }
  }
  return diff;
}

double theta_copy_count(double eps, double p) {
  return 2.0 * (1.0 - p) * std::exp(1.0 / 6.0) / (eps * eps * kPi * p) +
         1.0 / (p * (1.0 - p));
}

}  // namespace

BinomialBoundResult binomial_pmf_bound(int n, double p, int k) {
  if (n < 1) throw Error(ErrorCode::InvalidRequest, "n must be at least 1");
  check_probability(p);
  const double variance = static_cast<double>(n) * p * (1.0 - p);
  if (!(variance > 1.0))
    throw Error(ErrorCode::InvalidRequest,
                "the envelope needs n*p*(1-p) > 1; got n*p*(1-p) = " +
                    std::to_string(variance));
  const auto pr = small_rational(p);
  const int cap = floor_np(n, p, pr);
  if (k < 0 || k > cap)
    throw Error(ErrorCode::InvalidRequest,
                "k must satisfy 0 <= k <= floor(n*p) = " + std::to_string(cap));

  BinomialBoundResult out;
  out.pmf = pr ? to_double(rational_pmf(n, *pr, k))
               : static_cast<double>(fallback_pmf(n, p, k));
  out.bound =
      std::exp(1.0 / 12.0) / std::sqrt(2.0 * kPi * variance - 2.0 * kPi);
  if (out.pmf > out.bound + 1e-12)
    throw Error(ErrorCode::SolverError,
                "binomial mass exceeded its envelope; the arithmetic is wrong");
  return out;
}

int threshold_n(double eps, double p) {
  if (!(eps > 0.0))
    throw Error(ErrorCode::InvalidRequest, "deviation target must be positive");
  check_probability(p);
  const double rhs = theta_copy_count(eps, p);
  if (!(rhs < 2.0e9))
    throw Error(ErrorCode::TooLarge,
                "threshold copy count does not fit a 32-bit integer");
  int n = static_cast<int>(std::ceil(rhs + 1.0));
  while (static_cast<double>(n) - 1.0 < rhs) ++n;
  while (n >= 2 && static_cast<double>(n) - 2.0 >= rhs) --n;
  return n;
}

double exact_deviation_sum(int n, double p) {
  if (n < 1) throw Error(ErrorCode::InvalidRequest, "n must be at least 1");
  check_probability(p);
  const auto pr = small_rational(p);
  if (pr) {
    const BigRat q = 1 - *pr;
    // term tracks C(n,k) p^k (1-p)^(n-k) incrementally.
    BigRat term = 1;
    for (int i = 0; i < n; ++i) term *= q;
    BigRat sum = 0;
    for (int k = 0; k <= n; ++k) {
      BigRat dev = *pr - BigRat(k, n);
      if (dev < 0) dev = -dev;
      sum += term * dev;
      if (k < n) term = term * (n - k) * *pr / ((k + 1) * q);
    }
    return to_double(sum / *pr);
  }
  long double sum = 0.0L;
  for (int k = 0; k <= n; ++k) {
    const long double dev = std::abs(static_cast<long double>(p) -
                                     static_cast<long double>(k) / n);
    sum += fallback_pmf(n, p, k) * dev;
  }
  return static_cast<double>(sum / static_cast<long double>(p));
}

double closed_form_deviation(int n, double p) {
  if (n < 1) throw Error(ErrorCode::InvalidRequest, "n must be at least 1");
  check_probability(p);
  const double radicand = kPi * p * (1.0 - p) * static_cast<double>(n - 1) - kPi;
  if (!(radicand > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0) * (1.0 - p) * std::exp(1.0 / 12.0) /
         std::sqrt(radicand);
}

Channel build_gamma_n(const Channel& psi, const Channel& theta, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidRequest, "n must be at least 1");
  if (psi.in_dims != theta.in_dims || psi.out_dims != theta.out_dims)
    throw Error(ErrorCode::InvalidShape,
                "the mixed channels must share input and output dimensions");
  const int din = psi.in_dim(), dout = psi.out_dim();
  long long side = 1;
  for (int i = 0; i < n; ++i) {
    side *= static_cast<long long>(din) * dout;
    if (side > rno::kMaxChoiSide)
      throw Error(ErrorCode::TooLarge,
                  "n-copy Choi side exceeds the matrix cap");
  }
  if (n == 1) return psi;

  // Assemble the averaged Choi entrywise from the trace-d_in factors; their
  // products carry the correct n-copy normalization automatically.
  const Matrix& jpsi = psi.choi;
  const Matrix& jtheta = theta.choi;
  const ChoiIndexer ix(n, din, dout);
  Matrix choi(side, side);
  std::vector<int> row_f(static_cast<std::size_t>(n));
  std::vector<int> col_f(static_cast<std::size_t>(n));
  std::vector<Complex> pre(static_cast<std::size_t>(n) + 1);
  std::vector<Complex> suf(static_cast<std::size_t>(n) + 1);
  for (long long r = 0; r < side; ++r) {
    ix.split(r, row_f);
    for (long long c = 0; c < side; ++c) {
      ix.split(c, col_f);
      pre[0] = Complex(1.0, 0.0);
      for (int k = 0; k < n; ++k)
        pre[static_cast<std::size_t>(k) + 1] =
            pre[static_cast<std::size_t>(k)] *
            jtheta(row_f[static_cast<std::size_t>(k)],
                   col_f[static_cast<std::size_t>(k)]);
      suf[static_cast<std::size_t>(n)] = Complex(1.0, 0.0);
      for (int k = n - 1; k >= 0; --k)
        suf[static_cast<std::size_t>(k)] =
            suf[static_cast<std::size_t>(k) + 1] *
            jtheta(row_f[static_cast<std::size_t>(k)],
                   col_f[static_cast<std::size_t>(k)]);
      Complex gamma(0.0, 0.0);
      for (int k = 0; k < n; ++k)
        gamma += pre[static_cast<std::size_t>(k)] *
                 jpsi(row_f[static_cast<std::size_t>(k)],
                      col_f[static_cast<std::size_t>(k)]) *
                 suf[static_cast<std::size_t>(k) + 1];
      choi(r, c) = gamma / static_cast<double>(n);
    }
  }

  std::vector<int> in_dims, out_dims;
  for (int i = 0; i < n; ++i) {
    in_dims.insert(in_dims.end(), psi.in_dims.begin(), psi.in_dims.end());
    out_dims.insert(out_dims.end(), psi.out_dims.begin(), psi.out_dims.end());
  }
  return Channel::from_choi(std::move(in_dims), std::move(out_dims), choi);
}

ErasureReport mixing_deviation_bound(const Channel& psi, const Channel& phi,
                                     double p, int n, bool compute_diamond) {
  if (n < 1) throw Error(ErrorCode::InvalidRequest, "n must be at least 1");
  check_probability(p);
  if (psi.in_dims != phi.in_dims || psi.out_dims != phi.out_dims)
    throw Error(ErrorCode::InvalidShape,
                "the mixed channels must share input and output dimensions");

  const Channel theta = qmath::mix_channels({psi, phi}, {p, 1.0 - p});
  const auto cert = freesets::certify_channel_free(
      freesets::FreeSetModel::incoherent(theta.in_dim()),
      freesets::FreeSetModel::incoherent(theta.out_dim()), theta, 1e-9);
  if (cert.verdict != freesets::ChannelVerdict::Free)
    throw Error(ErrorCode::HypothesisViolated,
                "the mixture p*psi + (1-p)*phi is not a free channel");

  ErasureReport report;
  report.n = n;
  report.p = p;
  report.exact_sum_bound = exact_deviation_sum(n, p);
  report.closed_form_bound = closed_form_deviation(n, p);
  if (std::isfinite(report.closed_form_bound) &&
      report.exact_sum_bound > report.closed_form_bound + 1e-9)
    throw Error(ErrorCode::SolverError,
                "exact deviation sum exceeded its closed form");

  const int din = psi.in_dim(), dout = psi.out_dim();
  long long side = 1;
  bool fits = true;
  for (int i = 0; i < n && fits; ++i) {
    side *= static_cast<long long>(din) * dout;
    if (side > rno::kMaxChoiSide) fits = false;
  }

  if (fits) {
    const Matrix jpsi = psi.choi_matrix(ChoiNorm::TraceOne);
    const Matrix jtheta = theta.choi_matrix(ChoiNorm::TraceOne);
    double measured = 0.0;
    const auto spsi = bell_diagonal_spectrum(jpsi);
    const auto stheta = bell_diagonal_spectrum(jtheta);
    if (spsi && stheta) {
      measured = bell_fast_trace_norm(*spsi, *stheta, n);
    } else {
      measured = qmath::trace_norm(dense_difference(jpsi, jtheta, n, din, dout));
    }
    report.measured_choi_trace_distance = measured;
    double din_total = 1.0;
    for (int i = 0; i < n; ++i) din_total *= static_cast<double>(din);
    report.measured_choi_trace_distance_raw = measured * din_total;
    if (measured > report.exact_sum_bound + 1e-6)
      throw Error(ErrorCode::SolverError,
                  "measured Choi deviation exceeded the binomial sum bound");

    if (compute_diamond && n <= 2) {
      const Channel gamma = build_gamma_n(psi, theta, n);
      const Channel theta_n =
          n == 1 ? theta : qmath::tensor_channels(theta, theta);
      report.measured_diamond_distance =
          dynamic_measures::diamond_distance(gamma, theta_n);
    }
  } else {
    report.notes.push_back(
        "n-copy Choi exceeds the matrix cap; scalar bounds only");
  }

  report.threshold_n = threshold_n(report.exact_sum_bound, p);
  if (report.exact_sum_bound >= 1.0)
    report.notes.push_back(
        "deviation bound is vacuous at this copy count (>= 1)");

  report.cost_upper =
      std::log2(theta_copy_count(report.exact_sum_bound, p) + 1.0);
  const double radius =
      std::sqrt(report.exact_sum_bound * (2.0 - report.exact_sum_bound));
  if (radius < 1.0) {
    dynamic_measures::SmoothingConfig light;
    light.restarts = 4;
    light.seed = 2;
    report.cost_lower =
        dynamic_measures::smoothed_channel_robustness(psi, radius, light)
            .upper_estimate;
  } else {
    report.cost_lower = 0.0;
    report.notes.push_back(
        "smoothing radius for the cost lower bound is out of range; set to 0");
  }
  report.cost_lower_weak = true;
  return report;
}

double destruction_upper_from(double l_inner, double eta) {
  if (!(l_inner >= 0.0) || !(l_inner <= 1.0))
    throw Error(ErrorCode::InvalidRequest,
                "smoothed robustness must lie in [0,1]");
  if (!(eta > 0.0))
    throw Error(ErrorCode::InvalidRequest, "eta must be positive");
  if (l_inner >= 1.0 - 1e-12) return 0.0;
  if (l_inner <= 1e-12) return std::numeric_limits<double>::infinity();
  return std::log2(2.0 * (1.0 - l_inner) * std::exp(1.0 / 6.0) /
                       (eta * eta * kPi * l_inner) +
                   1.0 / (l_inner * (1.0 - l_inner)) + 1.0);
}

CostBoundReport destruction_cost_bounds(const Channel& e, double eps,
                                        double eta,
                                        const DestructionConfig& cfg) {
  if (!(eta > 0.0) || !(eta < eps) || !(eps < 1.0))
    throw Error(ErrorCode::InvalidRequest,
                "the radii must satisfy 0 < eta < eps < 1");

  CostBoundReport report;
  report.eps = eps;
  report.eta = eta;
  report.robustness_inner =
      dynamic_measures::smoothed_channel_robustness(e, eps - eta,
                                                    cfg.smoothing)
          .upper_estimate;
  report.robustness_outer =
      dynamic_measures::smoothed_channel_robustness(
          e, std::sqrt(eps * (2.0 - eps)), cfg.smoothing)
          .upper_estimate;
  report.lower = report.robustness_outer;
  report.lower_weak = true;
  report.notes.push_back(
      "lower bound compares a probability to a log-count and uses a "
      "heuristic smoothing estimate; treat as indicative only");
  report.upper = destruction_upper_from(report.robustness_inner, eta);
  if (report.robustness_inner >= 1.0 - 1e-12) {
    report.degenerate = true;
    report.notes.push_back(
        "smoothed robustness reached 1: the channel erases for free");
  } else if (report.robustness_inner <= 1e-12) {
    report.degenerate = true;
    report.notes.push_back(
        "smoothed robustness reached 0: the upper bound is infinite");
  }
  if (report.lower > report.upper)
    report.notes.push_back(
        "heuristic lower estimate exceeds the upper bound; the smoothing "
        "search found no improvement and the bracket is not tight");
  return report;
}

}  // namespace rno::erasure
