#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wsmatch {

// Pool-adjacent-violators: in-place L2 projection of v onto the cone of
// nondecreasing sequences (uniform weights).
inline void isotonic_nondecreasing(std::span<double> v) {
  const std::size_t n = v.size();
  if (n < 2) return;
  // Blocks carry (mean, count); violators merge leftward.
  std::vector<double> mean;
  std::vector<std::size_t> count;
  mean.reserve(n);
  count.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = v[i];
    std::size_t c = 1;
    while (!mean.empty() && mean.back() >= m) {
      m = (m * static_cast<double>(c) + mean.back() * static_cast<double>(count.back())) /
          static_cast<double>(c + count.back());
      c += count.back();
      mean.pop_back();
      count.pop_back();
    }
    mean.push_back(m);
    count.push_back(c);
  }
  std::size_t pos = 0;
  for (std::size_t b = 0; b < mean.size(); ++b) {
    for (std::size_t k = 0; k < count[b]; ++k) v[pos++] = mean[b];
  }
}

}  // namespace wsmatch
