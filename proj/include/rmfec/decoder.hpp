#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rmfec/channel.hpp"
#include "rmfec/fht.hpp"
#include "rmfec/rm_code.hpp"

namespace rmfec {

// End-node decisions within this margin of the runner-up are flagged as ties.
// Callers that compare against exhaustive oracles exclude flagged results.
inline constexpr double kTieTolerance = 1e-10;

// End nodes whose information bits are forced to zero. Freezing the least
// protected nodes expurgates the code down to a better-performing subcode.
class FrozenSpec {
 public:
  enum class Mode { none, leftmost, leftmost_pair, custom };

  FrozenSpec() = default;

  static FrozenSpec none() { return FrozenSpec{}; }

  // The leftmost end node (m-r+1, 1) is the first node in depth-first order
  // and sees the weakest recalculated metrics.
  static FrozenSpec leftmost() {
    FrozenSpec f;
    f.mode_ = Mode::leftmost;
    return f;
  }

  // The leftmost node plus every end node labeled (m-r, 1), the next weakest
  // group after it.
  static FrozenSpec leftmost_pair() {
    FrozenSpec f;
    f.mode_ = Mode::leftmost_pair;
    return f;
  }

  static FrozenSpec custom(std::vector<std::string> paths) {
    FrozenSpec f;
    f.mode_ = Mode::custom;
    f.paths_ = std::move(paths);
    return f;
  }

  Mode mode() const { return mode_; }
  const std::vector<std::string>& paths() const { return paths_; }
  bool empty() const { return mode_ == Mode::none; }

  // Layout-node indexes covered by this spec; every custom path must name an
  // end node of the layout.
  std::vector<std::size_t> resolve(const InfoLayout& layout) const {
    std::vector<std::size_t> idx;
    if (mode_ == Mode::none) return idx;
    if (mode_ == Mode::leftmost) {
      idx.push_back(0);
      return idx;
    }
    if (mode_ == Mode::leftmost_pair) {
      const int m = layout.params.m;
      const int r = layout.params.r;
      if (r < 1 || r > m - 1)
        throw std::invalid_argument("FrozenSpec: leftmost_pair needs 1 <= r <= m-1");
      for (std::size_t i = 0; i < layout.nodes.size(); ++i) {
        const auto& node = layout.nodes[i];
        if (node.s == 1 && (node.j == m - r + 1 || node.j == m - r)) idx.push_back(i);
      }
      return idx;
    }
    for (const auto& p : paths_) {
      bool found = false;
      for (std::size_t i = 0; i < layout.nodes.size(); ++i) {
        if (layout.nodes[i].path == p) {
          idx.push_back(i);
          found = true;
          break;
        }
      }
      if (!found)
        throw std::invalid_argument("FrozenSpec: path '" + p + "' is not an end node");
    }
    return idx;
  }

 private:
  Mode mode_ = Mode::none;
  std::vector<std::string> paths_;
};

struct DecodeResult {
  Bits codeword;  // length n; always equals encode_recursive(params, info)
  Bits info;      // length k
  struct NodeBits {
    std::string path;
    int j = 0;
    int s = 0;
    Bits bits;
  };
  std::vector<NodeBits> node_outputs;  // one entry per layout end node
  int tie_count = 0;                   // end nodes decided within kTieTolerance
};

// Pairwise spread recalculation for the V-descent: the spread of v = z' + z''
// is the product of the pair spreads, h*_s = h_{2s-1} h_{2s}.
inline std::vector<double> spread_combine(std::span<const double> h) {
  if (h.size() % 2 != 0)
    throw std::invalid_argument("spread_combine: length must be even");
  std::vector<double> out(h.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h[2 * i] * h[2 * i + 1];
  return out;
}

// Likelihood recalculation for the U-descent: flip the sign of the even-pair
// member wherever the decoded v bit is 1, then add the repeated observations.
inline std::vector<double> likelihood_fold(std::span<const double> g,
                                           std::span<const std::uint8_t> v) {
  if (g.size() != 2 * v.size())
    throw std::invalid_argument("likelihood_fold: g length must be twice v length");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = g[2 * i] + (v[i] ? -g[2 * i + 1] : g[2 * i + 1]);
  return out;
}

namespace detail {

// g-image of the pair spread product: 2 artanh(tanh(g1/2) tanh(g2/2)).
// atanh saturates to +-inf when the product rounds to +-1; the clamp keeps
// the result finite.
inline double llr_pair_combine(double g1, double g2, double g_max) {
  const double h = std::tanh(0.5 * g1) * std::tanh(0.5 * g2);
  const double g = 2.0 * std::atanh(h);
  if (g > g_max) return g_max;
  if (g < -g_max) return -g_max;
  return g;
}

struct FirstOrderDecision {
  std::uint32_t mask = 0;
  std::uint8_t a0 = 0;
  bool tie = false;
};

// ML decision for a first-order node: the Walsh spectrum of g scores every
// linear mask at once; the affine constant is the sign of the best entry.
// Ties pick the smallest mask.
inline FirstOrderDecision first_order_ml(std::span<double> g) {
  hadamard_inplace(g);
  std::size_t best_w = 0;
  double best = std::abs(g[0]);
  double second = -1.0;
  for (std::size_t w = 1; w < g.size(); ++w) {
    const double a = std::abs(g[w]);
    if (a > best) {
      second = best;
      best = a;
      best_w = w;
    } else if (a > second) {
      second = a;
    }
  }
  FirstOrderDecision out;
  out.mask = static_cast<std::uint32_t>(best_w);
  out.a0 = g[best_w] < 0.0 ? 1 : 0;
  out.tie = (best - second) <= kTieTolerance * std::max(1.0, best);
  return out;
}

struct WagnerDecision {
  bool tie = false;
};

// Wagner rule, ML for the single parity check code: take per-position hard
// decisions; if their parity is odd, flip the least reliable position
// (smallest index on ties).
inline WagnerDecision wagner_ml(std::span<const double> g, std::uint8_t* out_cw) {
  std::uint8_t parity = 0;
  std::size_t min_pos = 0;
  double min_abs = std::abs(g[0]);
  double second_abs = -1.0;
  double max_abs = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    const std::uint8_t bit = g[t] < 0.0 ? 1 : 0;
    out_cw[t] = bit;
    parity ^= bit;
    const double a = std::abs(g[t]);
    max_abs = std::max(max_abs, a);
    if (t == 0) continue;
    if (a < min_abs) {
      second_abs = min_abs;
      min_abs = a;
      min_pos = t;
    } else if (second_abs < 0.0 || a < second_abs) {
      second_abs = a;
    }
  }
  WagnerDecision out;
  const double scale = std::max(1.0, max_abs);
  if (parity) {
    out_cw[min_pos] ^= 1;
    out.tie = (second_abs - min_abs) <= kTieTolerance * scale;
  } else {
    // the zero-discrepancy word only ties if two flips are nearly free
    out.tie = (min_abs + std::max(second_abs, 0.0)) <= kTieTolerance * scale;
  }
  return out;
}

}  // namespace detail

struct EndNodeResult {
  Bits codeword;
  Bits info;
  bool tie = false;
};

// ML decoding of the first-order code RM(1,j) from likelihoods, via the fast
// Hadamard transform. Returns the codeword and its j+1 affine coefficients.
inline EndNodeResult decode_first_order(int j, std::span<const double> g) {
  if (j < 1 || g.size() != (std::size_t{1} << j))
    throw std::invalid_argument("decode_first_order: g length must be 2^j, j >= 1");
  std::vector<double> spectrum(g.begin(), g.end());
  const auto d = detail::first_order_ml(spectrum);
  EndNodeResult out;
  out.tie = d.tie;
  out.info.resize(static_cast<std::size_t>(j) + 1);
  out.info[0] = d.a0;
  for (int i = 1; i <= j; ++i)
    out.info[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((d.mask >> (i - 1)) & 1);
  out.codeword.resize(g.size());
  first_order_codeword(j, out.info, out.codeword);
  return out;
}

// ML decoding of the single-parity-check code of length 2^j (Wagner rule).
// Info bits are the first 2^j - 1 codeword positions.
inline EndNodeResult decode_spc(int j, std::span<const double> g) {
  if (j < 1 || g.size() != (std::size_t{1} << j))
    throw std::invalid_argument("decode_spc: g length must be 2^j, j >= 1");
  EndNodeResult out;
  out.codeword.resize(g.size());
  out.tie = detail::wagner_ml(g, out.codeword.data()).tie;
  out.info.assign(out.codeword.begin(), out.codeword.end() - 1);
  return out;
}

// Recursive decoder.
//
// A received metric vector enters the root (m,r) as likelihoods g. At each
// interior node of the Pascal triangle the decoder
//   1. descends the V edge with the pairwise spread products (carried in
//      g form as 2 artanh of the product) and decodes v = z' + z'',
//   2. folds the likelihoods with the decoded v (sign flip on even-pair
//      positions where v is 1, then pairwise sums) and descends the U edge,
//   3. reassembles z on adjacent pairs, z_{2s-1} = u_s, z_{2s} = u_s + v_s,
//      with the V-subtree's information bits preceding the U-subtree's.
// Descent terminates at the end nodes (j,1), decoded exactly by the fast
// Hadamard transform, and (j,j-1), decoded exactly by the Wagner rule.
// Frozen end nodes skip the ML search and take the all-zero decision.
//
// One instance owns its scratch buffers; create one instance per worker for
// concurrent decoding. No allocation happens inside a decode call.
class Decoder {
 public:
  explicit Decoder(const CodeParams& params, FrozenSpec frozen = FrozenSpec::none(),
                   double g_max = kDefaultGMax)
      : params_(params), layout_(info_layout(params)), g_max_(g_max) {
    frozen_node_.assign(layout_.nodes.size(), 0);
    for (const std::size_t idx : frozen.resolve(layout_)) frozen_node_[idx] = 1;
    g_root_.resize(params_.n);
    metric_arena_.resize(params_.n);
    cw_arena_.resize(2 * params_.n);
    result_.codeword.resize(params_.n);
    result_.info.resize(params_.k);
    result_.node_outputs.resize(layout_.nodes.size());
    for (std::size_t i = 0; i < layout_.nodes.size(); ++i) {
      const auto& node = layout_.nodes[i];
      result_.node_outputs[i] = {node.path, node.j, node.s, Bits(node.bit_count)};
    }
  }

  const CodeParams& params() const { return params_; }
  const InfoLayout& layout() const { return layout_; }
  bool node_frozen(std::size_t layout_index) const { return frozen_node_[layout_index] != 0; }

  // Core entry point: g holds log-likelihoods of symbol 0, length n.
  const DecodeResult& decode_llr(std::span<const double> g) {
    if (g.size() != params_.n)
      throw std::invalid_argument("decode_llr: metric length != n");
    for (std::size_t i = 0; i < params_.n; ++i) g_root_[i] = clamp_llr(g[i], g_max_);
    result_.tie_count = 0;
    node_cursor_ = 0;
    if (params_.r == 0) {
      decode_repetition_root();
    } else if (params_.r == params_.m) {
      decode_full_root();
    } else {
      recurse(params_.m, params_.r, g_root_.data(), result_.codeword.data(), params_.n, 0);
    }
    for (std::size_t i = 0; i < layout_.nodes.size(); ++i) {
      const auto& node = layout_.nodes[i];
      std::copy_n(result_.info.data() + node.offset, node.bit_count,
                  result_.node_outputs[i].bits.data());
    }
    return result_;
  }

  // Convert per the channel model, then decode. Accepts any metric form.
  const DecodeResult& decode(const MetricVector& received, const ChannelModel& channel) {
    if (received.values.size() != params_.n)
      throw std::invalid_argument("decode: metric length != n");
    switch (received.form) {
      case MetricForm::likelihood_g:
        return decode_llr(received.values);
      case MetricForm::spread_h: {
        scratch_llr_.resize(params_.n);
        for (std::size_t i = 0; i < params_.n; ++i)
          scratch_llr_[i] = clamp_llr(2.0 * std::atanh(received.values[i]), g_max_);
        return decode_llr(scratch_llr_);
      }
      case MetricForm::received_y:
        break;
    }
    scratch_llr_.resize(params_.n);
    if (channel.kind == ChannelModel::Kind::awgn) {
      for (std::size_t i = 0; i < params_.n; ++i)
        scratch_llr_[i] = likelihood(received.values[i], channel.sigma2, g_max_);
    } else {
      const double mag = clamp_llr(std::log((1.0 - channel.p) / channel.p), g_max_);
      for (std::size_t i = 0; i < params_.n; ++i)
        scratch_llr_[i] = hard_decision(received.values[i]) ? -mag : mag;
    }
    return decode_llr(scratch_llr_);
  }

  // Hard-decision entry point: same machinery, constant-magnitude metrics.
  const DecodeResult& decode_hard(std::span<const std::uint8_t> received, double p) {
    if (received.size() != params_.n)
      throw std::invalid_argument("decode_hard: received length != n");
    if (!(p > 0.0) || !(p < 0.5))
      throw std::invalid_argument("decode_hard: p must be in (0, 0.5)");
    const double mag = clamp_llr(std::log((1.0 - p) / p), g_max_);
    scratch_llr_.resize(params_.n);
    for (std::size_t i = 0; i < params_.n; ++i) scratch_llr_[i] = received[i] ? -mag : mag;
    return decode_llr(scratch_llr_);
  }

 private:
  void recurse(int j, int s, double* g, std::uint8_t* cw, std::size_t len, int depth) {
    if (s == 1) {
      decode_first_order_node(j, g, cw, len);
      return;
    }
    if (s == j - 1) {
      decode_spc_node(g, cw, len);
      return;
    }
    const std::size_t half = len / 2;
    double* child_g = metric_arena_.data() + (params_.n - (params_.n >> depth));
    std::uint8_t* vcw = cw_arena_.data() + 2 * (params_.n - (params_.n >> depth));
    std::uint8_t* ucw = vcw + half;

    for (std::size_t i = 0; i < half; ++i)
      child_g[i] = detail::llr_pair_combine(g[2 * i], g[2 * i + 1], g_max_);
    recurse(j - 1, s - 1, child_g, vcw, half, depth + 1);

    for (std::size_t i = 0; i < half; ++i)
      child_g[i] = g[2 * i] + (vcw[i] ? -g[2 * i + 1] : g[2 * i + 1]);
    recurse(j - 1, s, child_g, ucw, half, depth + 1);

    for (std::size_t i = 0; i < half; ++i) {
      cw[2 * i] = ucw[i];
      cw[2 * i + 1] = static_cast<std::uint8_t>(ucw[i] ^ vcw[i]);
    }
  }

  void decode_first_order_node(int j, double* g, std::uint8_t* cw, std::size_t len) {
    const LayoutNode& node = layout_.nodes[node_cursor_];
    std::uint8_t* info = result_.info.data() + node.offset;
    if (frozen_node_[node_cursor_]) {
      std::fill_n(cw, len, std::uint8_t{0});
      std::fill_n(info, node.bit_count, std::uint8_t{0});
      ++node_cursor_;
      return;
    }
    const auto d = detail::first_order_ml({g, len});
    info[0] = d.a0;
    for (int i = 1; i <= j; ++i)
      info[i] = static_cast<std::uint8_t>((d.mask >> (i - 1)) & 1);
    for (std::size_t t = 0; t < len; ++t)
      cw[t] = static_cast<std::uint8_t>(
          d.a0 ^ (std::popcount(d.mask & static_cast<std::uint32_t>(t)) & 1));
    result_.tie_count += d.tie ? 1 : 0;
    ++node_cursor_;
  }

  void decode_spc_node(const double* g, std::uint8_t* cw, std::size_t len) {
    const LayoutNode& node = layout_.nodes[node_cursor_];
    std::uint8_t* info = result_.info.data() + node.offset;
    if (frozen_node_[node_cursor_]) {
      std::fill_n(cw, len, std::uint8_t{0});
      std::fill_n(info, node.bit_count, std::uint8_t{0});
      ++node_cursor_;
      return;
    }
    const auto d = detail::wagner_ml({g, len}, cw);
    std::copy_n(cw, len - 1, info);
    result_.tie_count += d.tie ? 1 : 0;
    ++node_cursor_;
  }

  // order-0 root: repetition code, decided by the sign of the summed
  // likelihoods
  void decode_repetition_root() {
    double sum = 0.0;
    for (std::size_t i = 0; i < params_.n; ++i) sum += g_root_[i];
    std::uint8_t bit = sum < 0.0 ? 1 : 0;
    if (frozen_node_[0]) bit = 0;
    if (std::abs(sum) <= kTieTolerance) ++result_.tie_count;
    std::fill(result_.codeword.begin(), result_.codeword.end(), bit);
    result_.info[0] = bit;
    ++node_cursor_;
  }

  // order-m root: the full code, decided position by position
  void decode_full_root() {
    for (std::size_t i = 0; i < params_.n; ++i) {
      const std::uint8_t bit =
          frozen_node_[0] ? 0 : static_cast<std::uint8_t>(g_root_[i] < 0.0 ? 1 : 0);
      result_.codeword[i] = bit;
      result_.info[i] = bit;
    }
    ++node_cursor_;
  }

  CodeParams params_;
  InfoLayout layout_;
  double g_max_;
  std::vector<std::uint8_t> frozen_node_;
  std::vector<double> g_root_;
  std::vector<double> metric_arena_;
  std::vector<double> scratch_llr_;
  std::vector<std::uint8_t> cw_arena_;
  std::size_t node_cursor_ = 0;
  DecodeResult result_;
};

// One-shot wrappers.
inline DecodeResult decode(const CodeParams& params, const MetricVector& received,
                           const ChannelModel& channel,
                           const FrozenSpec& frozen = FrozenSpec::none()) {
  Decoder dec(params, frozen);
  return dec.decode(received, channel);
}

inline DecodeResult decode_hard(const CodeParams& params, std::span<const std::uint8_t> received,
                                double p, const FrozenSpec& frozen = FrozenSpec::none()) {
  Decoder dec(params, frozen);
  return dec.decode_hard(received, p);
}

// Exhaustive ML over all 2^k codewords: minimizes the discrepancy
// sum_{t: z_t != hard(g_t)} |g_t|. Ties pick the smallest information vector
// read as a binary integer (info[i] weighted 2^i). Enumeration is Gray-coded,
// one generator-row XOR per candidate.
inline Bits brute_force_ml(const CodeParams& params, std::span<const double> g) {
  if (params.k > 16)
    throw std::invalid_argument("brute_force_ml: k > 16 is not enumerable");
  if (g.size() != params.n)
    throw std::invalid_argument("brute_force_ml: metric length != n");

  const int k = static_cast<int>(params.k);
  std::vector<Bits> rows(static_cast<std::size_t>(k));
  Bits unit(params.k, 0);
  for (int i = 0; i < k; ++i) {
    unit[static_cast<std::size_t>(i)] = 1;
    rows[static_cast<std::size_t>(i)] = encode_recursive(params, unit);
    unit[static_cast<std::size_t>(i)] = 0;
  }

  Bits hard(params.n);
  for (std::size_t t = 0; t < params.n; ++t) hard[t] = hard_decision(g[t]);

  Bits cur(params.n, 0);
  auto discrepancy = [&]() {
    double s = 0.0;
    for (std::size_t t = 0; t < params.n; ++t)
      if (cur[t] != hard[t]) s += std::abs(g[t]);
    return s;
  };

  Bits best_cw = cur;
  double best = discrepancy();
  std::uint64_t best_value = 0;
  const std::uint64_t total = std::uint64_t{1} << k;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int bit = std::countr_zero(i);
    const Bits& row = rows[static_cast<std::size_t>(bit)];
    for (std::size_t t = 0; t < params.n; ++t) cur[t] ^= row[t];
    const std::uint64_t value = i ^ (i >> 1);  // Gray code = info vector as an integer
    const double d = discrepancy();
    if (d < best || (d == best && value < best_value)) {
      best = d;
      best_value = value;
      best_cw = cur;
    }
  }
  return best_cw;
}

}  // namespace rmfec
