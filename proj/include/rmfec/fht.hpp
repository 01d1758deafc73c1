#pragma once

#include <cstddef>
#include <span>

namespace rmfec {

// In-place Walsh-Hadamard transform in natural binary index order:
// x[w] <- sum_t (-1)^{popcount(w & t)} x[t]. Length must be a power of two.
// Used to score all first-order codeword correlations in O(n log n).
inline void hadamard_inplace(std::span<double> x) {
  const std::size_t n = x.size();
  for (std::size_t half = 1; half < n; half <<= 1) {
    for (std::size_t block = 0; block < n; block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        const double a = x[i];
        const double b = x[i + half];
        x[i] = a + b;
        x[i + half] = a - b;
      }
    }
  }
}

}  // namespace rmfec
