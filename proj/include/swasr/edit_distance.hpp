#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace swasr {

/// Unit-cost edit distance (insert, delete, substitute) between two
/// random-access sequences. Two-row dynamic programme, O(|a|*|b|) time.
template <typename Sequence>
std::size_t edit_distance(const Sequence& a, const Sequence& b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (m == 0) return n;
  if (n == 0) return m;

  std::vector<std::size_t> prev(n + 1);
  std::vector<std::size_t> curr(n + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= m; ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, substitute});
    }
    std::swap(prev, curr);
  }
  return prev[n];
}

}  // namespace swasr
