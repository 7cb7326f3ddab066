#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

namespace hadola::detail {

inline std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

// round(fraction * n), clamped to [0, n].
inline std::size_t fraction_count(double fraction, std::size_t n) {
  const auto v = std::llround(fraction * static_cast<double>(n));
  return std::min<std::size_t>(static_cast<std::size_t>(std::max<long long>(v, 0)), n);
}

// ceil(fraction * n), tolerant of representation error in the product.
inline std::size_t ceil_count(double fraction, std::size_t n) {
  const double x = fraction * static_cast<double>(n);
  const auto v = static_cast<std::size_t>(std::ceil(x - 1e-9));
  return std::min(v, n);
}

}  // namespace hadola::detail
