#pragma once

// Brute-force references for the string and word metrics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

/// Exhaustive recursion on suffixes, no memo. Exponential, so only for short inputs.
template <typename Seq>
std::size_t edit_distance_rec(const Seq& a, std::size_t i, const Seq& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return edit_distance_rec(a, i + 1, b, j + 1);
  const std::size_t sub = edit_distance_rec(a, i + 1, b, j + 1);
  const std::size_t del = edit_distance_rec(a, i + 1, b, j);
  const std::size_t ins = edit_distance_rec(a, i, b, j + 1);
  return 1 + std::min(sub, std::min(del, ins));
}

template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  return edit_distance_rec(a, 0, b, 0);
}

/// The same recursion, memoized on (i, j). Only for inputs up to 15 long.
template <typename Seq>
std::size_t edit_distance_memo(const Seq& a, const Seq& b) {
  constexpr std::size_t kMax = 16;
  std::size_t memo[kMax][kMax];
  for (auto& row : memo)
    for (auto& v : row) v = ~std::size_t{0};
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    std::size_t& m = memo[i][j];
    if (m != ~std::size_t{0}) return m;
    const std::size_t sub = self(self, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    const std::size_t del = self(self, i + 1, j) + 1;
    const std::size_t ins = self(self, i, j + 1) + 1;
    return m = std::min(sub, std::min(del, ins));
  };
  return rec(rec, 0, 0);
}

/// Every string over `alphabet` with length <= max_len, shortest first.
inline std::vector<std::string> all_strings(std::string_view alphabet, std::size_t max_len) {
  std::vector<std::string> out{""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (char c : alphabet) out.push_back(out[i] + c);
    begin = end;
  }
  return out;
}

/// Bag of boundary-marked character trigrams of one lowercase ASCII word.
inline std::map<std::string, int> trigram_bag(const std::string& word) {
  const std::string padded = "\x02" + word + "\x03";
  std::map<std::string, int> bag;
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) ++bag[padded.substr(i, 3)];
  return bag;
}

/// Cosine of two trigram bags, assuming no hash collisions.
inline double bag_cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, v] : a) {
    na += double(v) * v;
    if (const auto it = b.find(k); it != b.end()) dot += double(v) * it->second;
  }
  for (const auto& [_, v] : b) nb += double(v) * v;
  return dot / std::sqrt(na * nb);
}

}  // namespace oracle
