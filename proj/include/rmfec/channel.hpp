#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rmfec/rm_code.hpp"
#include "rmfec/rng.hpp"

namespace rmfec {

// Likelihood clamp. Beyond |g| = 40 the spread tanh(g/2) is within 2e-18 of
// +-1, so larger magnitudes carry no information and only risk overflow.
inline constexpr double kDefaultGMax = 40.0;

// The three interchangeable metric forms for a received vector:
// raw channel outputs y, log-likelihoods g = log(q/p), spreads h = q - p.
enum class MetricForm { received_y, likelihood_g, spread_h };

struct MetricVector {
  MetricForm form = MetricForm::received_y;
  std::vector<double> values;
};

struct ChannelModel {
  enum class Kind { bsc, awgn };
  Kind kind = Kind::awgn;
  double p = 0.0;       // BSC crossover probability, (0, 1/2]
  double sigma2 = 0.0;  // AWGN noise power, > 0

  static ChannelModel bsc(double p) {
    if (!(p > 0.0) || p > 0.5)
      throw std::invalid_argument("ChannelModel: BSC p must be in (0, 0.5]");
    ChannelModel c;
    c.kind = Kind::bsc;
    c.p = p;
    return c;
  }

  static ChannelModel awgn(double sigma2) {
    if (!(sigma2 > 0.0))
      throw std::invalid_argument("ChannelModel: AWGN sigma2 must be positive");
    ChannelModel c;
    c.kind = Kind::awgn;
    c.sigma2 = sigma2;
    return c;
  }
};

struct SeedSpec {
  std::uint64_t master_seed = 0;
};

inline double clamp_llr(double g, double g_max = kDefaultGMax) {
  if (g > g_max) return g_max;
  if (g < -g_max) return -g_max;
  return g;
}

// Antipodal mapping: bit 0 -> +1.0, bit 1 -> -1.0.
inline MetricVector transmit_bpsk(std::span<const std::uint8_t> word) {
  MetricVector out;
  out.form = MetricForm::received_y;
  out.values.resize(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) out.values[i] = word[i] ? -1.0 : 1.0;
  return out;
}

inline MetricVector awgn_sample(const MetricVector& x, double sigma2, SeedSpec seed,
                                std::uint64_t trial) {
  if (x.form != MetricForm::received_y)
    throw std::invalid_argument("awgn_sample: input must be in received_y form");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("awgn_sample: sigma2 must be positive");
  GaussianStream noise(derive_stream(seed.master_seed, trial));
  const double sigma = std::sqrt(sigma2);
  MetricVector out;
  out.form = MetricForm::received_y;
  out.values.resize(x.values.size());
  for (std::size_t i = 0; i < x.values.size(); ++i) out.values[i] = x.values[i] + sigma * noise.next();
  return out;
}

inline Bits bsc_sample(std::span<const std::uint8_t> word, double p, SeedSpec seed,
                       std::uint64_t trial) {
  if (p < 0.0 || p > 0.5) throw std::invalid_argument("bsc_sample: p must be in [0, 0.5]");
  SplitMix64 stream(derive_stream(seed.master_seed, trial));
  Bits out(word.begin(), word.end());
  for (auto& b : out)
    if (stream.next_unit() <= p) b ^= 1;
  return out;
}

// g = log(q/p) = 2y / sigma^2, clamped.
inline double likelihood(double y, double sigma2, double g_max = kDefaultGMax) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("likelihood: sigma2 must be positive");
  return clamp_llr(2.0 * y / sigma2, g_max);
}

// Posterior probabilities (p(1|y), p(0|y)) of the transmitted symbol.
inline std::pair<double, double> posterior(double y, double sigma2, double g_max = kDefaultGMax) {
  const double g = likelihood(y, sigma2, g_max);
  const double p1 = 1.0 / (1.0 + std::exp(g));
  const double p0 = 1.0 / (1.0 + std::exp(-g));
  return {p1, p0};
}

// Spread h = q - p = tanh(g/2). The ratio (e^{g/2}-e^{-g/2})/(e^{g/2}+e^{-g/2})
// is the hyperbolic tangent of g/2; we use that form throughout since it is
// what the posterior definition gives.
inline double spread(double g) { return std::tanh(0.5 * g); }

inline std::uint8_t hard_decision(double y) { return y < 0.0 ? 1 : 0; }

// Constant-magnitude likelihoods for a BSC-received word:
// +log((1-p)/p) for bit 0, the negative for bit 1. p = 0 is only meaningful
// with allow_p0, which substitutes +-g_max.
inline MetricVector bsc_metrics(std::span<const std::uint8_t> word, double p,
                                bool allow_p0 = false, double g_max = kDefaultGMax) {
  double magnitude = 0.0;
  if (p == 0.0) {
    if (!allow_p0)
      throw std::invalid_argument("bsc_metrics: p = 0 requires allow_p0");
    magnitude = g_max;
  } else if (p > 0.0 && p < 0.5) {
    magnitude = clamp_llr(std::log((1.0 - p) / p), g_max);
  } else {
    throw std::invalid_argument("bsc_metrics: p must be in (0, 0.5)");
  }
  MetricVector out;
  out.form = MetricForm::likelihood_g;
  out.values.resize(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) out.values[i] = word[i] ? -magnitude : magnitude;
  return out;
}

inline MetricVector to_likelihood(const MetricVector& v, double sigma2,
                                  double g_max = kDefaultGMax) {
  MetricVector out;
  out.form = MetricForm::likelihood_g;
  out.values.resize(v.values.size());
  switch (v.form) {
    case MetricForm::received_y:
      for (std::size_t i = 0; i < v.values.size(); ++i)
        out.values[i] = likelihood(v.values[i], sigma2, g_max);
      break;
    case MetricForm::likelihood_g:
      out.values = v.values;
      break;
    case MetricForm::spread_h:
      for (std::size_t i = 0; i < v.values.size(); ++i)
        out.values[i] = clamp_llr(2.0 * std::atanh(v.values[i]), g_max);
      break;
  }
  return out;
}

inline MetricVector to_spread(const MetricVector& v, double sigma2 = 0.0,
                              double g_max = kDefaultGMax) {
  MetricVector out;
  out.form = MetricForm::spread_h;
  out.values.resize(v.values.size());
  switch (v.form) {
    case MetricForm::received_y:
      // direct y -> h map: tanh(y / sigma2), clamped consistently with the
      // likelihood route
      if (!(sigma2 > 0.0)) throw std::invalid_argument("to_spread: sigma2 must be positive");
      for (std::size_t i = 0; i < v.values.size(); ++i)
        out.values[i] = std::tanh(clamp_llr(v.values[i] / sigma2, 0.5 * g_max));
      break;
    case MetricForm::likelihood_g:
      for (std::size_t i = 0; i < v.values.size(); ++i) out.values[i] = spread(v.values[i]);
      break;
    case MetricForm::spread_h:
      out.values = v.values;
      break;
  }
  return out;
}

// Monte-Carlo estimates of E[h] and E[h^2] for the spread of a transmitted +1
// observed through AWGN(sigma2). Both fall off like 1/sigma^2 for large noise.
inline std::pair<double, double> moment_estimate(double sigma2, std::uint64_t trials,
                                                 SeedSpec seed) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("moment_estimate: sigma2 must be positive");
  if (trials < 10000) throw std::invalid_argument("moment_estimate: need at least 10^4 trials");
  const double sigma = std::sqrt(sigma2);
  double sum_h = 0.0;
  double sum_h2 = 0.0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    GaussianStream noise(derive_stream(seed.master_seed, i));
    const double y = 1.0 + sigma * noise.next();
    const double h = spread(likelihood(y, sigma2));
    sum_h += h;
    sum_h2 += h * h;
  }
  const double inv = 1.0 / static_cast<double>(trials);
  return {sum_h * inv, sum_h2 * inv};
}

enum class SnrConvention { eb_n0, es_n0 };

// Noise power for unit-energy antipodal signaling at the given SNR.
// Eb/N0 folds in the code rate; Es/N0 does not.
inline double snr_to_sigma2(double snr_db, double rate, SnrConvention convention) {
  if (!(rate > 0.0) || rate > 1.0)
    throw std::invalid_argument("snr_to_sigma2: rate must be in (0, 1]");
  const double snr_linear = std::pow(10.0, snr_db / 10.0);
  switch (convention) {
    case SnrConvention::eb_n0:
      return 1.0 / (2.0 * rate * snr_linear);
    case SnrConvention::es_n0:
      return 1.0 / (2.0 * snr_linear);
  }
  throw std::invalid_argument("snr_to_sigma2: unknown convention");
}

}  // namespace rmfec
