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

namespace rmfec {

using Bits = std::vector<std::uint8_t>;

// Block lengths above 2^26 exceed the desk-scale memory budget.
inline constexpr int kMaxM = 26;

// Parameters of the Reed-Muller code RM(r,m): length n = 2^m, dimension
// k = sum_{i<=r} C(m,i), minimum distance d = 2^(m-r).
struct CodeParams {
  int m = 0;
  int r = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t d = 0;
};

inline std::size_t binomial(int n, int t) {
  if (t < 0 || t > n) return 0;
  t = std::min(t, n - t);
  std::uint64_t c = 1;
  for (int i = 1; i <= t; ++i) c = c * static_cast<std::uint64_t>(n - t + i) / i;
  return static_cast<std::size_t>(c);
}

// Dimension of the node (j,s) of the Pascal triangle, i.e. of RM(s,j).
inline std::size_t rm_dimension(int j, int s) {
  if (s < 0) return 0;
  std::size_t k = 0;
  for (int i = 0; i <= std::min(s, j); ++i) k += binomial(j, i);
  return k;
}

inline CodeParams code_params(int m, int r) {
  if (m < 1 || m > kMaxM)
    throw std::invalid_argument("code_params: m must be in [1, " + std::to_string(kMaxM) + "]");
  if (r < 0 || r > m)
    throw std::invalid_argument("code_params: r must be in [0, m]");
  CodeParams p;
  p.m = m;
  p.r = r;
  p.n = std::size_t{1} << m;
  p.d = std::size_t{1} << (m - r);
  p.k = rm_dimension(m, r);
  return p;
}

// Recursion over the Pascal triangle stops at first-order nodes (j,1) and
// single-parity-check nodes (j,j-1). Orders 0 and m never enter the
// recursion; they are handled as degenerate roots.
inline bool is_end_node(int j, int s) { return s == 1 || s == j - 1; }

// One end node of the information-bit tree. `path` is the branch sequence
// from the root: 'V' steps to (j-1,s-1), 'U' steps to (j-1,s).
struct LayoutNode {
  std::string path;
  int j = 0;
  int s = 0;
  std::size_t bit_count = 0;
  std::size_t offset = 0;
};

struct InfoLayout {
  CodeParams params;
  std::vector<LayoutNode> nodes;  // depth first, V-subtree before U-subtree
};

inline InfoLayout info_layout(const CodeParams& params) {
  InfoLayout layout;
  layout.params = params;
  if (params.r == 0 || params.r == params.m) {
    layout.nodes.push_back({"", params.m, params.r, params.k, 0});
    return layout;
  }
  std::size_t offset = 0;
  std::string path;
  auto walk = [&](auto&& self, int j, int s) -> void {
    if (s == 1) {
      layout.nodes.push_back({path, j, s, static_cast<std::size_t>(j) + 1, offset});
      offset += static_cast<std::size_t>(j) + 1;
      return;
    }
    if (s == j - 1) {
      const std::size_t bits = (std::size_t{1} << j) - 1;
      layout.nodes.push_back({path, j, s, bits, offset});
      offset += bits;
      return;
    }
    path.push_back('V');
    self(self, j - 1, s - 1);
    path.back() = 'U';
    self(self, j - 1, s);
    path.pop_back();
  };
  walk(walk, params.m, params.r);
  return layout;
}

// First-order end-node encoder: bit at 0-based position t is
// a0 + a1*x_1(t) + ... + aj*x_j(t) over F2, where x_i(t) is the i-th least
// significant bit of t. Coefficients come ordered (a0, a1, ..., aj).
inline void first_order_codeword(int j, std::span<const std::uint8_t> coeffs,
                                 std::span<std::uint8_t> out) {
  std::uint32_t mask = 0;
  for (int i = 1; i <= j; ++i)
    if (coeffs[static_cast<std::size_t>(i)]) mask |= std::uint32_t{1} << (i - 1);
  const std::size_t len = std::size_t{1} << j;
  for (std::size_t t = 0; t < len; ++t)
    out[t] = static_cast<std::uint8_t>(coeffs[0] ^ (std::popcount(mask & static_cast<std::uint32_t>(t)) & 1));
}

// Systematic single-parity-check encoder: info bits fill the first 2^j - 1
// positions, the last position makes the overall parity even.
inline void spc_codeword(int j, std::span<const std::uint8_t> info, std::span<std::uint8_t> out) {
  const std::size_t len = std::size_t{1} << j;
  std::uint8_t parity = 0;
  for (std::size_t t = 0; t + 1 < len; ++t) {
    out[t] = info[t];
    parity ^= info[t];
  }
  out[len - 1] = parity;
}

namespace detail {

// Recursive (u, u+v) encoder on adjacent position pairs: the u-subcodeword
// occupies odd (1-based) positions and even positions carry u+v, so that
// v = (z1+z2, z3+z4, ...).
inline Bits encode_node(int j, int s, std::span<const std::uint8_t> info) {
  const std::size_t len = std::size_t{1} << j;
  Bits out(len);
  if (s <= 0) {
    std::fill(out.begin(), out.end(), info[0]);
    return out;
  }
  if (s == j) {
    std::copy(info.begin(), info.end(), out.begin());
    return out;
  }
  if (s == 1) {
    first_order_codeword(j, info, out);
    return out;
  }
  if (s == j - 1) {
    spc_codeword(j, info, out);
    return out;
  }
  const std::size_t kv = rm_dimension(j - 1, s - 1);
  const Bits v = encode_node(j - 1, s - 1, info.first(kv));
  const Bits u = encode_node(j - 1, s, info.subspan(kv));
  for (std::size_t i = 0; i < len / 2; ++i) {
    out[2 * i] = u[i];
    out[2 * i + 1] = static_cast<std::uint8_t>(u[i] ^ v[i]);
  }
  return out;
}

}  // namespace detail

inline Bits encode_recursive(const CodeParams& params, std::span<const std::uint8_t> info) {
  if (info.size() != params.k)
    throw std::invalid_argument("encode_recursive: info length " + std::to_string(info.size()) +
                                " != k = " + std::to_string(params.k));
  return detail::encode_node(params.m, params.r, info);
}

// Masks of all monomials of degree <= r over m variables, ordered by total
// degree and then lexicographically by the sorted variable-index tuple.
// Bit i-1 of a mask marks variable x_i.
inline std::vector<std::uint32_t> monomial_masks(int m, int r) {
  std::vector<std::uint32_t> masks;
  if (r < 0) return masks;
  masks.push_back(0);
  for (int deg = 1; deg <= std::min(r, m); ++deg) {
    std::vector<int> idx(static_cast<std::size_t>(deg));
    for (int i = 0; i < deg; ++i) idx[static_cast<std::size_t>(i)] = i + 1;
    while (true) {
      std::uint32_t mask = 0;
      for (int i : idx) mask |= std::uint32_t{1} << (i - 1);
      masks.push_back(mask);
      int pos = deg - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - (deg - 1 - pos)) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int i = pos + 1; i < deg; ++i)
        idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return masks;
}

// Evaluation-based construction: codeword of the Boolean polynomial with the
// given monomial coefficients over all 2^m points, x_i(t) = i-th LSB of t.
// Independent of encode_recursive; the two must generate the same code set.
inline Bits encode_monomial(const CodeParams& params, std::span<const std::uint8_t> coeffs) {
  const auto masks = monomial_masks(params.m, params.r);
  if (coeffs.size() != masks.size())
    throw std::invalid_argument("encode_monomial: coefficient count != k");
  Bits out(params.n);
  for (std::size_t t = 0; t < params.n; ++t) {
    std::uint8_t bit = 0;
    for (std::size_t i = 0; i < masks.size(); ++i)
      if (coeffs[i] && (static_cast<std::uint32_t>(t) & masks[i]) == masks[i]) bit ^= 1;
    out[t] = bit;
  }
  return out;
}

// Membership test via duality: RM(r,m)^perp = RM(m-r-1, m). A word is in the
// code iff it has even overlap with every monomial generator of the dual.
// For r = m the dual is trivial and every word passes.
inline bool dual_check(const CodeParams& params, std::span<const std::uint8_t> word) {
  if (word.size() != params.n)
    throw std::invalid_argument("dual_check: word length != n");
  const auto duals = monomial_masks(params.m, params.m - params.r - 1);
  for (const std::uint32_t mask : duals) {
    std::uint8_t parity = 0;
    for (std::size_t t = 0; t < params.n; ++t)
      if ((static_cast<std::uint32_t>(t) & mask) == mask) parity ^= word[t];
    if (parity) return false;
  }
  return true;
}

// Minimum Hamming weight over all nonzero recursive-encoder codewords,
// enumerated in Gray-code order (one generator-row XOR per step).
inline std::size_t min_distance_bruteforce(const CodeParams& params) {
  if (params.k > 32)
    throw std::invalid_argument("min_distance_bruteforce: k > 32 is not enumerable");
  const long double work = static_cast<long double>(params.n) * std::exp2(static_cast<long double>(params.k));
  if (work > 0x1p42)
    throw std::invalid_argument("min_distance_bruteforce: n * 2^k exceeds the work budget");

  const int k = static_cast<int>(params.k);
  const std::size_t words = (params.n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> rows(static_cast<std::size_t>(k),
                                               std::vector<std::uint64_t>(words, 0));
  Bits unit(params.k, 0);
  for (int i = 0; i < k; ++i) {
    unit[static_cast<std::size_t>(i)] = 1;
    const Bits cw = encode_recursive(params, unit);
    unit[static_cast<std::size_t>(i)] = 0;
    for (std::size_t t = 0; t < params.n; ++t)
      if (cw[t]) rows[static_cast<std::size_t>(i)][t / 64] |= std::uint64_t{1} << (t % 64);
  }

  std::size_t best = params.n + 1;
  if (words == 1) {
    std::uint64_t cur = 0;
    std::vector<std::uint64_t> flat(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) flat[static_cast<std::size_t>(i)] = rows[static_cast<std::size_t>(i)][0];
    const std::uint64_t total = std::uint64_t{1} << k;
    for (std::uint64_t i = 1; i < total; ++i) {
      cur ^= flat[static_cast<std::size_t>(std::countr_zero(i))];
      const auto wt = static_cast<std::size_t>(std::popcount(cur));
      if (wt < best) best = wt;
    }
  } else {
    std::vector<std::uint64_t> cur(words, 0);
    const std::uint64_t total = std::uint64_t{1} << k;
    for (std::uint64_t i = 1; i < total; ++i) {
      const auto& row = rows[static_cast<std::size_t>(std::countr_zero(i))];
      std::size_t wt = 0;
      for (std::size_t w = 0; w < words; ++w) {
        cur[w] ^= row[w];
        wt += static_cast<std::size_t>(std::popcount(cur[w]));
      }
      if (wt < best) best = wt;
    }
  }
  return best;
}

// Text form used by codeword and info-bit files: one word per line as a
// '0'/'1' string, position 1 leftmost.
inline Bits parse_bit_string(std::string_view line) {
  Bits out;
  out.reserve(line.size());
  for (const char c : line) {
    if (c == '0' || c == '1')
      out.push_back(static_cast<std::uint8_t>(c - '0'));
    else if (c == '\r')
      continue;
    else
      throw std::invalid_argument("parse_bit_string: invalid character '" + std::string(1, c) + "'");
  }
  return out;
}

inline std::string format_bit_string(std::span<const std::uint8_t> bits) {
  std::string s;
  s.reserve(bits.size());
  for (const std::uint8_t b : bits) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace rmfec
