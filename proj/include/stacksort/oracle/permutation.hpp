#pragma once

// Permutations, the stack-sorting map and the statistics used by the
// functional equation. Everything here is brute force and meant as ground
// truth for the fast code paths.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "stacksort/grid_engine.hpp"

namespace stacksort::oracle {

using Perm = std::vector<int>;

inline Perm identity(int n) {
  Perm p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 1);
  return p;
}

inline bool is_identity(const Perm& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != static_cast<int>(i) + 1) return false;
  return true;
}

inline bool is_increasing(const Perm& p) { return std::is_sorted(p.begin(), p.end()); }

/// Replaces the i-th smallest entry by i.
inline Perm standardize(const Perm& p) {
  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  Perm out(p.size());
  for (std::size_t r = 0; r < idx.size(); ++r) out[idx[r]] = static_cast<int>(r) + 1;
  return out;
}

/// "326451" -> {3,2,6,4,5,1}; single digits only.
inline Perm parse(const std::string& s) {
  Perm p;
  for (char c : s) p.push_back(c - '0');
  return p;
}

inline std::string to_string(const Perm& p) {
  std::string s;
  for (int v : p) s += std::to_string(v);
  return s;
}

/// s(L m R) = s(L) s(R) m, with m the largest entry.
inline Perm stack_sort(const Perm& p) {
  if (p.size() <= 1) return p;
  auto it = std::max_element(p.begin(), p.end());
  Perm left(p.begin(), it);
  Perm right(it + 1, p.end());
  Perm out = stack_sort(left);
  Perm r = stack_sort(right);
  out.insert(out.end(), r.begin(), r.end());
  out.push_back(*it);
  return out;
}

/// The same map computed by a single pass through a stack.
inline void stack_sort_fast(const int* in, std::size_t n, int* out, int* stack) {
  std::size_t top = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (top > 0 && stack[top - 1] < in[i]) out[k++] = stack[--top];
    stack[top++] = in[i];
  }
  while (top > 0) out[k++] = stack[--top];
}

inline Perm stack_sort_fast(const Perm& p) {
  Perm out(p.size());
  Perm st(p.size());
  stack_sort_fast(p.data(), p.size(), out.data(), st.data());
  return out;
}

inline Perm stack_sort_iterate(Perm p, int k) {
  for (int i = 0; i < k; ++i) p = stack_sort(p);
  return p;
}

inline bool is_k_stack_sortable(const Perm& p, int k) { return is_increasing(stack_sort_iterate(p, k)); }

/// Calls fn(perm) for every permutation of 1..n in lexicographic order.
template <class Fn>
void for_each_permutation(int n, Fn&& fn) {
  Perm p = identity(n);
  do {
    fn(static_cast<const Perm&>(p));
  } while (std::next_permutation(p.begin(), p.end()));
}

inline constexpr int kMaxEnumeration = 10;

/// |W_k(n)| by exhaustive enumeration of S_n.
inline std::uint64_t count_sortable(int n, int k, int cap = kMaxEnumeration) {
  if (n > cap) throw ResourceError("count_sortable: n=" + std::to_string(n) + " exceeds enumeration cap " +
                                   std::to_string(cap));
  if (n <= 0) return 1;
  std::uint64_t count = 0;
  Perm a(static_cast<std::size_t>(n));
  Perm b(a.size());
  Perm st(a.size());
  for_each_permutation(n, [&](const Perm& p) {
    std::copy(p.begin(), p.end(), a.begin());
    for (int i = 0; i < k; ++i) {
      stack_sort_fast(a.data(), a.size(), b.data(), st.data());
      std::swap(a, b);
    }
    if (is_increasing(a)) ++count;
  });
  return count;
}

/// #{sigma : s(sigma) = pi} by exhaustive search over S_n.
inline std::uint64_t preimage_count_brute(const Perm& pi, int cap = 9) {
  const int n = static_cast<int>(pi.size());
  if (n > cap) throw ResourceError("preimage_count_brute: length " + std::to_string(n) + " exceeds cap");
  Perm target = standardize(pi);
  std::uint64_t count = 0;
  Perm out(pi.size());
  Perm st(pi.size());
  for_each_permutation(n, [&](const Perm& sigma) {
    stack_sort_fast(sigma.data(), sigma.size(), out.data(), st.data());
    if (out == target) ++count;
  });
  return count;
}

/// Preimage counts of every permutation of 1..n in one sweep, indexed by
/// the lexicographic rank of the image.
inline std::vector<std::uint64_t> preimage_table(int n, int cap = kMaxEnumeration) {
  if (n > cap) throw ResourceError("preimage_table: n exceeds enumeration cap");
  std::vector<std::uint64_t> fact(static_cast<std::size_t>(n) + 1, 1);
  for (int i = 1; i <= n; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i) - 1] * i;
  std::vector<std::uint64_t> table(fact[static_cast<std::size_t>(n)], 0);
  Perm out(static_cast<std::size_t>(n));
  Perm st(out.size());
  for_each_permutation(n, [&](const Perm& sigma) {
    stack_sort_fast(sigma.data(), sigma.size(), out.data(), st.data());
    // Lehmer rank.
    std::uint64_t r = 0;
    for (int i = 0; i < n; ++i) {
      int smaller = 0;
      for (int j = i + 1; j < n; ++j) smaller += out[static_cast<std::size_t>(j)] < out[static_cast<std::size_t>(i)];
      r += static_cast<std::uint64_t>(smaller) * fact[static_cast<std::size_t>(n - 1 - i)];
    }
    ++table[r];
  });
  return table;
}

/// Catalan number C_n as an unsigned 64-bit value (n <= 33).
inline std::uint64_t catalan(int n) {
  std::uint64_t c = 1;
  for (int k = 0; k < n; ++k) c = c * 2 * (2 * static_cast<std::uint64_t>(k) + 1) / (static_cast<std::uint64_t>(k) + 2);
  return c;
}

struct PermStats {
  int n = 0;
  int leg = 0;
  int tl = 0;
  std::vector<int> tail_bound_descents;  // 1-based descent positions
  int c_index = 0;                        // 1-based; 0 for the identity
};

/// Number of a in {0..n} such that no i1 < i2 < i3 has
/// pi_{i3} <= a < pi_{i1} < pi_{i2}.
inline int legal_spaces(const Perm& p) {
  const int n = static_cast<int>(p.size());
  int count = 0;
  for (int a = 0; a <= n; ++a) {
    bool legal = true;
    for (int i1 = 0; i1 < n && legal; ++i1) {
      if (p[static_cast<std::size_t>(i1)] <= a) continue;
      for (int i2 = i1 + 1; i2 < n && legal; ++i2) {
        if (p[static_cast<std::size_t>(i2)] <= p[static_cast<std::size_t>(i1)]) continue;
        for (int i3 = i2 + 1; i3 < n; ++i3) {
          if (p[static_cast<std::size_t>(i3)] <= a) {
            legal = false;
            break;
          }
        }
      }
    }
    count += legal;
  }
  return count;
}

inline int tail_length(const Perm& p) {
  const int n = static_cast<int>(p.size());
  int l = 0;
  while (l < n && p[static_cast<std::size_t>(n - 1 - l)] == n - l) ++l;
  return l;
}

/// Descents d (1-based) all of whose hooks end in the tail.
inline std::vector<int> tail_bound_descents(const Perm& p) {
  const int n = static_cast<int>(p.size());
  const int tail_start = n - tail_length(p);  // 0-based first tail index
  std::vector<int> out;
  for (int d = 0; d + 1 < n; ++d) {
    if (p[static_cast<std::size_t>(d)] < p[static_cast<std::size_t>(d) + 1]) continue;
    bool bound = true;
    for (int j = d + 1; j < n; ++j) {
      if (p[static_cast<std::size_t>(j)] > p[static_cast<std::size_t>(d)] && j < tail_start) {
        bound = false;
        break;
      }
    }
    if (bound) out.push_back(d + 1);
  }
  return out;
}

inline PermStats stats(const Perm& p) {
  PermStats s;
  s.n = static_cast<int>(p.size());
  s.leg = legal_spaces(p);
  s.tl = tail_length(p);
  s.tail_bound_descents = tail_bound_descents(p);
  if (!is_identity(p)) {
    for (int i = 0; i < s.n; ++i)
      if (p[static_cast<std::size_t>(i)] == s.n - s.tl) s.c_index = i + 1;
  }
  return s;
}

/// 2-stack-sortability by patterns: avoid 2341, and every 3241 must extend
/// to a 35241.
inline bool west_check(const Perm& p) {
  const int n = static_cast<int>(p.size());
  auto v = [&](int i) { return p[static_cast<std::size_t>(i)]; };
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = i1 + 1; i2 < n; ++i2)
      for (int i3 = i2 + 1; i3 < n; ++i3)
        for (int i4 = i3 + 1; i4 < n; ++i4) {
          if (v(i4) < v(i1) && v(i1) < v(i2) && v(i2) < v(i3)) return false;
          if (v(i4) < v(i2) && v(i2) < v(i1) && v(i1) < v(i3)) {
            bool extends = false;
            for (int q = i1 + 1; q < i2 && !extends; ++q) extends = v(q) > v(i3);
            if (!extends) return false;
          }
        }
  return true;
}

/// True when p is not a direct sum of two non-empty permutations.
inline bool is_sum_indecomposable(const Perm& p) {
  int mx = 0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    mx = std::max(mx, p[k]);
    if (mx == static_cast<int>(k) + 1) return false;
  }
  return !p.empty();
}

}  // namespace stacksort::oracle
