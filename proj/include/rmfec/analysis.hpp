#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "rmfec/rm_code.hpp"

namespace rmfec {

// Upper tail of the standard normal distribution.
inline double q_function(double x) {
  return 0.5 * std::erfc(x * 0.70710678118654752440);
}

namespace detail {

inline void require_decodable_order(int m, int r, const char* who) {
  if (m < 2 || m > kMaxM || r < 1 || r > m - 1)
    throw std::invalid_argument(std::string(who) + ": need 1 <= r <= m-1");
}

}  // namespace detail

struct BscErrorBound {
  double mu = 0.0;
  double bound = 0.0;  // Q(mu), in [0, 0.5]
};

// Output bit error bound for hard-decision recursive decoding on BSC(p):
// with h = 1 - 2p, mu = 2^((m-r)/2) h^(2^(r-1)) / sqrt(1 - h^(2^r)) and the
// bound is Q(mu). p = 0 saturates to mu = +inf, bound = 0. The bound is an
// asymptotic (large-m) statement; at short lengths it can be optimistic.
inline BscErrorBound bsc_error_bound(int m, int r, double p) {
  detail::require_decodable_order(m, r, "bsc_error_bound");
  if (p < 0.0 || p > 0.5)
    throw std::invalid_argument("bsc_error_bound: p must be in [0, 0.5]");
  if (p == 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
  const double h = 1.0 - 2.0 * p;
  const double numerator = std::exp2(0.5 * (m - r)) * std::pow(h, std::exp2(r - 1));
  const double denominator = std::sqrt(1.0 - std::pow(h, std::exp2(r)));
  const double mu = numerator / denominator;
  return {mu, q_function(mu)};
}

enum class RateRegime { fixed_order, fixed_rate };

struct WeightThreshold {
  double t = 0.0;
  bool degenerate = false;  // formula gave a nonpositive threshold
};

// Hamming weight up to which the recursive decoder corrects most error
// patterns, asymptotically: n(1 - (cm/d)^(1/2^r))/2 for fixed order r
// (any c > ln 2), d(ln d - ln 2m)/2 for fixed rate.
inline WeightThreshold correctable_weight_threshold(int m, int r, RateRegime regime,
                                                    double c = 0.7) {
  detail::require_decodable_order(m, r, "correctable_weight_threshold");
  const auto params = code_params(m, r);
  const double n = static_cast<double>(params.n);
  const double d = static_cast<double>(params.d);
  if (regime == RateRegime::fixed_order) {
    if (!(c > std::log(2.0)))
      throw std::invalid_argument("correctable_weight_threshold: c must exceed ln 2");
    const double x = c * m / d;
    if (x >= 1.0) return {0.0, true};
    return {0.5 * n * (1.0 - std::pow(x, std::exp2(-r))), false};
  }
  const double t = 0.5 * d * (std::log(d) - std::log(2.0 * m));
  if (t <= 0.0) return {0.0, true};
  return {t, false};
}

struct EuclideanThresholds {
  double rho_low = 0.0;   // fixed order:  sqrt(n) (d/2m)^(1/2^r)
  double rho_high = 0.0;  // fixed rate:   sqrt(n / (m ln 2))
};

// Euclidean weights of error patterns virtually all of which are corrected
// by soft-decision recursive decoding (asymptotic). Bounded-distance
// decoding reaches sqrt(d); these exceed it when rho / sqrt(d) > 1.
inline EuclideanThresholds euclidean_thresholds(int m, int r) {
  detail::require_decodable_order(m, r, "euclidean_thresholds");
  const auto params = code_params(m, r);
  const double n = static_cast<double>(params.n);
  const double d = static_cast<double>(params.d);
  EuclideanThresholds out;
  out.rho_low = std::sqrt(n) * std::pow(d / (2.0 * m), std::exp2(-r));
  out.rho_high = std::sqrt(n / (m * std::log(2.0)));
  return out;
}

// Asymptotic decoding-capacity comparison of three algorithm families.
// The residual term h is defined by correcting n(1-h)/2 errors; smaller is
// better. The prior recursive algorithms only reach bounded distance (t=d/2,
// rho^2 = sqrt(d), quoted verbatim including its unit oddity).
struct CapacityComparison {
  double prior_recursive_t = 0.0;
  double prior_recursive_rho_sq = 0.0;
  double majority_h = 0.0;
  double majority_t = 0.0;
  double recursive_h = 0.0;
  double recursive_t = 0.0;
};

inline CapacityComparison capacity_comparison(int m, int r) {
  detail::require_decodable_order(m, r, "capacity_comparison");
  const auto params = code_params(m, r);
  const double n = static_cast<double>(params.n);
  const double d = static_cast<double>(params.d);
  CapacityComparison out;
  out.prior_recursive_t = 0.5 * d;
  out.prior_recursive_rho_sq = std::sqrt(d);
  out.majority_h = std::pow(m / n, std::exp2(-(r + 1)));
  out.recursive_h = std::pow(m / n, std::exp2(-r));  // equals majority_h squared
  out.majority_t = d * std::log(d) / 4.0;
  out.recursive_t = d * std::log(d) / 2.0;  // exactly twice the majority value
  return out;
}

// Asymptotic soft-over-hard gains at any fixed output error rate: noise
// power ratio pi/2 for fixed order (about 2.0 dB), crossover probability
// ratio 4/pi for fixed rate.
struct AsymptoticGains {
  double noise_power_ratio = 0.0;
  double crossover_ratio = 0.0;
  double gain_db = 0.0;
};

inline AsymptoticGains asymptotic_gains() {
  constexpr double pi = 3.14159265358979323846;
  return {pi / 2.0, 4.0 / pi, 10.0 * std::log10(pi / 2.0)};
}

// Aggregate report behind the `analyze` CLI subcommand.
struct ThresholdReport {
  int m = 0;
  int r = 0;
  RateRegime regime = RateRegime::fixed_order;
  double c = 0.7;
  double t_hard = 0.0;
  bool t_degenerate = false;
  double h_residual = 0.0;
  double rho_euclidean = 0.0;
  std::optional<double> p;
  double mu = 0.0;
  double bound_alpha = 0.0;
};

inline ThresholdReport threshold_report(int m, int r, RateRegime regime,
                                        std::optional<double> p = std::nullopt,
                                        double c = 0.7) {
  detail::require_decodable_order(m, r, "threshold_report");
  const auto params = code_params(m, r);
  ThresholdReport rep;
  rep.m = m;
  rep.r = r;
  rep.regime = regime;
  rep.c = c;
  const auto wt = correctable_weight_threshold(m, r, regime, c);
  rep.t_hard = wt.t;
  rep.t_degenerate = wt.degenerate;
  const auto euc = euclidean_thresholds(m, r);
  if (regime == RateRegime::fixed_order) {
    rep.h_residual = std::pow(c * m / static_cast<double>(params.d), std::exp2(-r));
    rep.rho_euclidean = euc.rho_low;
  } else {
    rep.h_residual = std::pow(m / static_cast<double>(params.n), std::exp2(-r));
    rep.rho_euclidean = euc.rho_high;
  }
  if (p) {
    rep.p = p;
    const auto b = bsc_error_bound(m, r, *p);
    rep.mu = b.mu;
    rep.bound_alpha = b.bound;
  }
  return rep;
}

}  // namespace rmfec
