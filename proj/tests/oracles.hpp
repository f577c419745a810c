#pragma once

// Independent brute-force oracles for the tests. They share no code with the
// library beyond the Rational type: assignments and allocations are
// enumerated exhaustively instead of going through the DP solvers.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mechsimp/rational.hpp"

namespace oracle {

using mechsimp::Rational;
using Row = std::vector<Rational>;

inline Rational Q(const char* s) { return mechsimp::parse_rational(s); }

inline std::vector<Rational> Qs(std::initializer_list<const char*> xs) {
  std::vector<Rational> out;
  for (const auto* s : xs) out.push_back(Q(s));
  return out;
}

inline constexpr std::size_t none = static_cast<std::size_t>(-1);

/// Visits every injective map agents -> slots or none.
inline void for_each_assignment(std::size_t n, std::size_t k,
                                const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> a(n, none);
  std::vector<bool> used(k, false);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      fn(a);
      return;
    }
    a[i] = none;
    rec(i + 1);
    for (std::size_t j = 0; j < k; ++j) {
      if (used[j]) continue;
      used[j] = true;
      a[i] = j;
      rec(i + 1);
      used[j] = false;
    }
    a[i] = none;
  };
  rec(0);
}

inline Rational assignment_welfare(const std::vector<Row>& w, const std::vector<std::size_t>& a,
                                   std::size_t skip = none) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i != skip && a[i] != none) s += w[i][a[i]];
  }
  return s;
}

inline Rational brute_max_welfare(const std::vector<Row>& w, std::size_t skip = none) {
  Rational best = 0;
  for_each_assignment(w.size(), w[0].size(), [&](const std::vector<std::size_t>& a) {
    best = std::max(best, assignment_welfare(w, a, skip));
  });
  return best;
}

/// Clarke payments for a given assignment, by brute force.
inline std::vector<Rational> brute_vcg_payments(const std::vector<Row>& w, const std::vector<std::size_t>& a) {
  std::vector<Rational> p;
  for (std::size_t i = 0; i < w.size(); ++i) p.push_back(brute_max_welfare(w, i) - assignment_welfare(w, a, i));
  return p;
}

/// Max welfare over all maps items -> agent or unallocated.
inline Rational brute_ca_welfare(const std::vector<std::vector<Rational>>& tables, std::size_t k) {
  const std::size_t n = tables.size();
  std::vector<std::size_t> owner(k, 0);
  Rational best = 0;
  while (true) {
    std::vector<std::uint32_t> bundle(n, 0);
    for (std::size_t g = 0; g < k; ++g) {
      if (owner[g] < n) bundle[owner[g]] |= 1u << g;
    }
    Rational w = 0;
    for (std::size_t i = 0; i < n; ++i) w += tables[i][bundle[i]];
    best = std::max(best, w);
    std::size_t g = 0;
    while (g < k && ++owner[g] == n + 1) owner[g++] = 0;
    if (g == k) break;
  }
  return best;
}

/// Random monotone table over k items; each bundle adds 0..top to its best subset.
inline std::vector<Rational> random_monotone(std::mt19937& rng, std::size_t k, int top) {
  std::uniform_int_distribution<int> d(0, top);
  std::vector<Rational> v(std::size_t{1} << k, Rational(0));
  for (std::uint32_t b = 1; b < v.size(); ++b) {
    Rational lo = 0;
    for (std::size_t g = 0; g < k; ++g) {
      if (b >> g & 1u) lo = std::max(lo, v[b & ~(1u << g)]);
    }
    v[b] = lo + d(rng);
  }
  return v;
}

/// Sorted-decreasing random rationals p/den with p in [lo, hi].
inline std::vector<Rational> random_sorted(std::mt19937& rng, std::size_t n, int lo, int hi, int den, bool distinct) {
  std::uniform_int_distribution<int> d(lo, hi);
  while (true) {
    std::vector<Rational> v;
    for (std::size_t i = 0; i < n; ++i) v.emplace_back(d(rng), den);
    std::sort(v.begin(), v.end(), std::greater<>());
    if (!distinct || std::adjacent_find(v.begin(), v.end()) == v.end()) return v;
  }
}

/// Random strictly decreasing CTR vector starting at 1, entries p/den.
inline std::vector<Rational> random_ctr(std::mt19937& rng, std::size_t k, int den) {
  std::uniform_int_distribution<int> d(1, den - 1);
  while (true) {
    std::vector<int> picks;
    for (std::size_t j = 1; j < k; ++j) picks.push_back(d(rng));
    std::sort(picks.begin(), picks.end(), std::greater<>());
    if (std::adjacent_find(picks.begin(), picks.end()) != picks.end()) continue;
    std::vector<Rational> out{Rational(1)};
    for (const int p : picks) out.emplace_back(p, den);
    return out;
  }
}

}  // namespace oracle
