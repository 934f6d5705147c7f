#pragma once

// Preimage counts |s^{-1}(pi)| through hook decompositions at a tail-bound
// descent, memoised on standardisations.

#include <map>
#include <optional>
#include <stdexcept>

#include "stacksort/oracle/permutation.hpp"

namespace stacksort::oracle {

struct HookSplit {
  Perm unsheltered;  // pi_1..pi_i pi_{j+1}..pi_n
  Perm sheltered;    // pi_{i+1}..pi_{j-1}
};

/// Unsheltered/sheltered parts for the hook from position i to j (1-based).
inline HookSplit split_at_hook(const Perm& p, int i, int j) {
  if (!(1 <= i && i < j && j <= static_cast<int>(p.size())) || p[static_cast<std::size_t>(i) - 1] > p[static_cast<std::size_t>(j) - 1])
    throw std::invalid_argument("split_at_hook: (i, j) is not a hook");
  HookSplit h;
  h.unsheltered.assign(p.begin(), p.begin() + i);
  h.unsheltered.insert(h.unsheltered.end(), p.begin() + j, p.end());
  h.sheltered.assign(p.begin() + i, p.begin() + j - 1);
  return h;
}

class DecompositionCounter {
 public:
  /// |s^{-1}(pi)|. Identity permutations (including the empty one) give
  /// Catalan numbers; everything else is decomposed at `descent`, which
  /// defaults to c(pi).
  std::uint64_t count(const Perm& pi, std::optional<int> descent = std::nullopt) {
    Perm key = standardize(pi);
    if (is_identity(key)) return catalan(static_cast<int>(key.size()));
    if (!descent) {
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    PermStats st = stats(key);
    const int d = descent.value_or(st.c_index);
    bool ok = false;
    for (int t : st.tail_bound_descents) ok |= t == d;
    if (!ok) throw std::invalid_argument("decomposition: position " + std::to_string(d) + " is not a tail-bound descent");
    std::uint64_t total = 0;
    for (int j = d + 1; j <= st.n; ++j) {
      if (key[static_cast<std::size_t>(j) - 1] < key[static_cast<std::size_t>(d) - 1]) continue;
      HookSplit h = split_at_hook(key, d, j);
      total += count(h.unsheltered) * count(h.sheltered);
    }
    if (!descent) memo_.emplace(std::move(key), total);
    return total;
  }

 private:
  std::map<Perm, std::uint64_t> memo_;
};

inline std::uint64_t preimage_count_decomposition(const Perm& pi, std::optional<int> descent = std::nullopt) {
  if (is_identity(standardize(pi))) throw std::invalid_argument("decomposition needs a non-identity permutation");
  DecompositionCounter c;
  return c.count(pi, descent);
}

}  // namespace stacksort::oracle
