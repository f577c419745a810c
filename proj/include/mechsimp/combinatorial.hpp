#pragma once

// Combinatorial auctions over at most 12 items: exact winner determination,
// VCG, quasi-fields and projections, Sigma-VCG and n-VCG.

#include <algorithm>
#include <functional>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mechsimp/equilibria.hpp"
#include "mechsimp/error.hpp"
#include "mechsimp/mechanism.hpp"
#include "mechsimp/rational.hpp"

namespace mechsimp::ca {

/// Items are bits: A = bit 0, B = bit 1, ...
using Bundle = std::uint32_t;
inline constexpr std::size_t max_items = 12;

inline Bundle grand(std::size_t k) { return (Bundle{1} << k) - 1; }
inline Bundle complement(Bundle b, std::size_t k) { return grand(k) & ~b; }
inline bool subset(Bundle a, Bundle b) { return (a & b) == a; }

inline void check_items(std::size_t k) {
  if (k == 0 || k > max_items) {
    throw Error(ErrorKind::invalid_input, "item count must be in 1.." + std::to_string(max_items));
  }
}

/// "AD" style name; the empty bundle prints as "{}".
inline std::string bundle_name(Bundle b) {
  if (b == 0) return "{}";
  std::string s;
  for (std::size_t g = 0; g < max_items; ++g) {
    if (b >> g & 1u) s.push_back(static_cast<char>('A' + g));
  }
  return s;
}

inline Bundle parse_bundle(std::string_view text, std::size_t k) {
  if (text == "{}" || text.empty()) return 0;
  Bundle b = 0;
  for (const char c : text) {
    const int g = c - 'A';
    if (g < 0 || static_cast<std::size_t>(g) >= k) {
      throw Error(ErrorKind::parse, "bad item '" + std::string(1, c) + "' in bundle '" + std::string(text) + "'");
    }
    b |= Bundle{1} << g;
  }
  return b;
}

/// Dense, monotone valuation over all 2^k bundles with v({}) = 0.
class ValuationTable {
 public:
  ValuationTable() = default;
  ValuationTable(std::size_t k, std::vector<Rational> values) : k_(k), v_(std::move(values)) {
    check_items(k);
    if (v_.size() != (std::size_t{1} << k)) throw Error(ErrorKind::invalid_valuation, "table size is not 2^k");
    if (v_[0] != 0) throw Error(ErrorKind::invalid_valuation, "value of the empty bundle must be 0");
    for (Bundle b = 1; b < v_.size(); ++b) {
      if (v_[b] < 0) throw Error(ErrorKind::invalid_valuation, "negative value on " + bundle_name(b));
      for (std::size_t g = 0; g < k; ++g) {
        if ((b >> g & 1u) && v_[b & ~(Bundle{1} << g)] > v_[b]) {
          throw Error(ErrorKind::invalid_valuation, "not monotone at " + bundle_name(b));
        }
      }
    }
  }

  static ValuationTable zero(std::size_t k) { return {k, std::vector<Rational>(std::size_t{1} << k)}; }

  /// Table from a rule on bundles; the rule must yield a monotone table.
  template <class F>
  static ValuationTable from(std::size_t k, F&& f) {
    check_items(k);
    std::vector<Rational> v;
    for (Bundle b = 0; b < (Bundle{1} << k); ++b) v.push_back(b == 0 ? Rational(0) : Rational(f(b)));
    return {k, std::move(v)};
  }

  std::size_t items() const { return k_; }
  const Rational& operator()(Bundle b) const { return v_.at(b); }
  const std::vector<Rational>& values() const { return v_; }
  bool operator==(const ValuationTable&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<Rational> v_;
};

/// Explicit bids, possibly non-monotone; bundles without a bid read as 0.
/// Evaluation uses the monotone completion (max over contained bids).
class BidTable {
 public:
  BidTable() = default;
  explicit BidTable(std::size_t k) : k_(k), x_(std::size_t{1} << k) { check_items(k); }
  BidTable(std::size_t k, const std::vector<std::pair<Bundle, Rational>>& bids) : BidTable(k) {
    for (const auto& [b, v] : bids) set(b, v);
  }

  static BidTable from(const ValuationTable& v) {
    BidTable t(v.items());
    t.x_ = v.values();
    return t;
  }

  void set(Bundle b, const Rational& value) {
    if (b > grand(k_)) throw Error(ErrorKind::invalid_input, "bundle outside the item set");
    if (value < 0) throw Error(ErrorKind::invalid_valuation, "negative bid on " + bundle_name(b));
    if (b == 0 && value != 0) throw Error(ErrorKind::invalid_valuation, "bid on the empty bundle");
    x_[b] = value;
  }

  std::size_t items() const { return k_; }
  const Rational& explicit_bid(Bundle b) const { return x_.at(b); }

  std::size_t nonzeros() const {
    return static_cast<std::size_t>(std::count_if(x_.begin(), x_.end(), [](const Rational& r) { return r != 0; }));
  }

  ValuationTable completion() const {
    std::vector<Rational> c = x_;
    for (Bundle b = 1; b < c.size(); ++b) {
      for (std::size_t g = 0; g < k_; ++g) {
        if ((b >> g & 1u) && c[b & ~(Bundle{1} << g)] > c[b]) c[b] = c[b & ~(Bundle{1} << g)];
      }
    }
    return {k_, std::move(c)};
  }

  /// Nonzero entries in bundle order.
  std::vector<std::pair<Bundle, Rational>> entries() const {
    std::vector<std::pair<Bundle, Rational>> out;
    for (Bundle b = 0; b < x_.size(); ++b) {
      if (x_[b] != 0) out.emplace_back(b, x_[b]);
    }
    return out;
  }

  bool operator==(const BidTable&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<Rational> x_;
};

/// Bundle per agent.
using Allocation = std::vector<Bundle>;

struct CaResult {
  Allocation allocation;
  std::vector<Rational> payments;

  Rational revenue() const { return sum(payments); }
  bool operator==(const CaResult&) const = default;
};

namespace detail {

/// best[a][S]: max welfare of agents a..n-1 on item set S, by enumerating
/// the bundle of each agent as a submask (n * 3^k).
class WelfareTable {
 public:
  WelfareTable(const std::vector<ValuationTable>& t, std::size_t skip) : t_(t), skip_(skip) {
    n_ = t.size();
    k_ = t[0].items();
    size_ = std::size_t{1} << k_;
    best_.assign((n_ + 1) * size_, Rational(0));
    for (std::size_t a = n_; a-- > 0;) {
      for (Bundle s = 0; s < size_; ++s) {
        if (a == skip_) {
          best_[a * size_ + s] = at(a + 1, s);
          continue;
        }
        Rational b = at(a + 1, s);
        for (Bundle sub = s; sub; sub = (sub - 1) & s) {
          const Rational c = t_[a](sub) + at(a + 1, s & ~sub);
          if (c > b) b = c;
        }
        best_[a * size_ + s] = b;
      }
    }
  }

  const Rational& at(std::size_t a, Bundle s) const { return best_[a * size_ + s]; }

  /// Lexicographically smallest optimal allocation on item set s.
  Allocation allocation(Bundle s) const {
    Allocation out(n_, 0);
    for (std::size_t a = 0; a < n_; ++a) {
      if (a == skip_) continue;
      const Rational& target = at(a, s);
      for (Bundle b = 0; b <= s; ++b) {
        if (!subset(b, s)) continue;
        if (t_[a](b) + at(a + 1, s & ~b) == target) {
          out[a] = b;
          s &= ~b;
          break;
        }
      }
    }
    return out;
  }

 private:
  const std::vector<ValuationTable>& t_;
  std::size_t skip_, n_ = 0, k_ = 0, size_ = 0;
  std::vector<Rational> best_;
};

inline std::size_t validate_profile(const std::vector<ValuationTable>& t) {
  if (t.empty()) throw Error(ErrorKind::invalid_input, "no agents");
  const std::size_t k = t[0].items();
  for (const auto& v : t) {
    if (v.items() != k) throw Error(ErrorKind::invalid_input, "tables over different item sets");
  }
  return k;
}

inline std::vector<ValuationTable> complete(const std::vector<BidTable>& bids) {
  std::vector<ValuationTable> out;
  for (const auto& b : bids) out.push_back(b.completion());
  return out;
}

}  // namespace detail

inline Rational max_welfare(const std::vector<ValuationTable>& t, std::size_t excluded = static_cast<std::size_t>(-1),
                            std::optional<Bundle> items = std::nullopt) {
  const std::size_t k = detail::validate_profile(t);
  return detail::WelfareTable(t, excluded).at(0, items.value_or(grand(k)));
}

inline Rational welfare_of(const std::vector<ValuationTable>& t, const Allocation& a) {
  Rational w = 0;
  for (std::size_t i = 0; i < a.size(); ++i) w += t[i](a[i]);
  return w;
}

/// Efficient allocation; ties go to the lexicographically smallest vector of
/// bundle masks, so items nobody needs stay unallocated.
inline Allocation winner_determination(const std::vector<ValuationTable>& t) {
  const std::size_t k = detail::validate_profile(t);
  return detail::WelfareTable(t, static_cast<std::size_t>(-1)).allocation(grand(k));
}

inline CaResult vcg_ca(const std::vector<ValuationTable>& t) {
  const std::size_t k = detail::validate_profile(t);
  CaResult r;
  r.allocation = detail::WelfareTable(t, static_cast<std::size_t>(-1)).allocation(grand(k));
  const Rational total = welfare_of(t, r.allocation);
  for (std::size_t i = 0; i < t.size(); ++i) {
    r.payments.push_back(max_welfare(t, i) - (total - t[i](r.allocation[i])));
  }
  return r;
}

inline CaResult vcg_ca(const std::vector<BidTable>& bids) { return vcg_ca(detail::complete(bids)); }

/// A set of bundles over k items, kept sorted.
struct BundleFamily {
  std::size_t k = 0;
  std::vector<Bundle> sets;

  BundleFamily() = default;
  BundleFamily(std::size_t items, std::vector<Bundle> s) : k(items), sets(std::move(s)) {
    check_items(k);
    for (const auto b : sets) {
      if (b > grand(k)) throw Error(ErrorKind::invalid_input, "bundle outside the item set");
    }
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  }

  bool contains(Bundle b) const { return std::binary_search(sets.begin(), sets.end(), b); }
  std::size_t size() const { return sets.size(); }
  bool operator==(const BundleFamily&) const = default;
  bool operator<(const BundleFamily& o) const { return sets < o.sets; }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < sets.size(); ++i) s += (i ? ", " : "") + bundle_name(sets[i]);
    return s + "}";
  }
};

struct QuasiFieldViolation {
  enum class Kind { missing_empty, complement, disjoint_union } kind;
  Bundle first = 0, second = 0, missing = 0;
};

struct QuasiFieldCheck {
  bool holds = true;
  std::optional<QuasiFieldViolation> violation;
};

inline QuasiFieldCheck is_quasi_field(const BundleFamily& sigma) {
  using K = QuasiFieldViolation::Kind;
  if (!sigma.contains(0)) return {false, QuasiFieldViolation{K::missing_empty, 0, 0, 0}};
  for (const auto b : sigma.sets) {
    const Bundle c = complement(b, sigma.k);
    if (!sigma.contains(c)) return {false, QuasiFieldViolation{K::complement, b, b, c}};
  }
  for (const auto b : sigma.sets) {
    for (const auto c : sigma.sets) {
      if (!(b & c) && !sigma.contains(b | c)) return {false, QuasiFieldViolation{K::disjoint_union, b, c, b | c}};
    }
  }
  return {};
}

/// Smallest quasi-field containing the seed.
inline BundleFamily quasi_field_closure(const BundleFamily& seed) {
  std::set<Bundle> s(seed.sets.begin(), seed.sets.end());
  s.insert(0);
  bool grew = true;
  while (grew) {
    grew = false;
    const std::vector<Bundle> cur(s.begin(), s.end());
    for (const auto b : cur) {
      grew |= s.insert(complement(b, seed.k)).second;
      for (const auto c : cur) {
        if (!(b & c)) grew |= s.insert(b | c).second;
      }
    }
  }
  return {seed.k, {s.begin(), s.end()}};
}

/// Every quasi-field with at most max_size bundles, in lexicographic order of
/// the sorted bundle lists. Grown from {{}, G} by adding one bundle at a time
/// and closing.
inline std::vector<BundleFamily> enumerate_quasi_fields(std::size_t k, std::size_t max_size) {
  check_items(k);
  if (k > 5) throw Error(ErrorKind::invalid_input, "quasi-field enumeration is capped at 5 items");
  std::set<BundleFamily> seen;
  std::vector<BundleFamily> frontier{quasi_field_closure(BundleFamily(k, {}))};
  if (frontier[0].size() > max_size) return {};
  seen.insert(frontier[0]);
  while (!frontier.empty()) {
    std::vector<BundleFamily> next;
    for (const auto& f : frontier) {
      for (Bundle b = 1; b < grand(k); ++b) {
        if (f.contains(b)) continue;
        auto grown = f;
        grown.sets.push_back(b);
        auto closed = quasi_field_closure(BundleFamily(k, grown.sets));
        if (closed.size() <= max_size && seen.insert(closed).second) next.push_back(std::move(closed));
      }
    }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

/// x^Sigma(B) = max over Sigma-bundles contained in B.
inline ValuationTable project(const ValuationTable& x, const BundleFamily& sigma) {
  if (x.items() != sigma.k) throw Error(ErrorKind::invalid_input, "table and family over different item sets");
  std::vector<Rational> out(x.values().size(), Rational(0));
  for (Bundle b = 0; b < out.size(); ++b) {
    for (const auto s : sigma.sets) {
      if (subset(s, b) && x(s) > out[b]) out[b] = x(s);
    }
  }
  return {x.items(), std::move(out)};
}

/// The message as a Sigma-bid table: explicit bids only on Sigma-bundles.
inline BidTable project_bids(const ValuationTable& x, const BundleFamily& sigma) {
  BidTable t(x.items());
  for (const auto s : sigma.sets) {
    if (s != 0) t.set(s, x(s));
  }
  return t;
}

/// First bundle on which the completed message differs from its projection.
inline std::optional<Bundle> sigma_violation(const ValuationTable& x, const BundleFamily& sigma) {
  const auto p = project(x, sigma);
  for (Bundle b = 0; b < x.values().size(); ++b) {
    if (p(b) != x(b)) return b;
  }
  return std::nullopt;
}

inline CaResult sigma_vcg(const std::vector<ValuationTable>& bids, const BundleFamily& sigma) {
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (const auto b = sigma_violation(bids[i], sigma)) {
      throw Error(ErrorKind::message_rejected,
                  "agent " + std::to_string(i + 1) + " bids outside Sigma on bundle " + bundle_name(*b));
    }
  }
  return vcg_ca(bids);
}

inline CaResult sigma_vcg(const std::vector<BidTable>& bids, const BundleFamily& sigma) {
  return sigma_vcg(detail::complete(bids), sigma);
}

/// Exact best response in VCG: max over bundles B of
/// v_i(B) + W_{-i}(G \ B) - W_{-i}. The witness bids W_{-i} + 1 on the
/// maximizing bundle only; its replay attains the value.
inline BestResponse<BidTable> best_response_ca(std::size_t agent, const std::vector<ValuationTable>& profile,
                                               const ValuationTable& type) {
  if (agent >= profile.size()) throw Error(ErrorKind::invalid_input, "agent index out of range");
  const std::size_t k = detail::validate_profile(profile);
  const detail::WelfareTable others(profile, agent);
  const Rational w = others.at(0, grand(k));
  std::optional<Rational> best;
  Bundle arg = 0;
  for (Bundle b = 0; b <= grand(k); ++b) {
    const Rational u = type(b) + others.at(0, complement(b, k)) - w;
    if (!best || u > *best) best = u, arg = b;
  }
  BidTable msg(k);
  if (arg != 0) msg.set(arg, w + 1);
  auto replay = profile;
  replay[agent] = msg.completion();
  const auto r = vcg_ca(replay);
  const Rational got = type(r.allocation[agent]) - r.payments[agent];
  if (got != *best) throw Error(ErrorKind::model, "best-response witness does not attain its value");
  return {*best, std::move(msg)};
}

inline Rational utility(const ValuationTable& type, const CaResult& r, std::size_t agent) {
  return type(r.allocation.at(agent)) - r.payments.at(agent);
}

/// Exact best response inside Sigma-VCG. The agent can only end up with a
/// Sigma-bundle, and bidding W_{-i} + 1 on the supersets of S secures exactly
/// S, so the maximum runs over S in Sigma. Others must send Sigma-messages.
inline BestResponse<BidTable> best_response_sigma(std::size_t agent, const std::vector<ValuationTable>& profile,
                                                  const ValuationTable& type, const BundleFamily& sigma) {
  if (agent >= profile.size()) throw Error(ErrorKind::invalid_input, "agent index out of range");
  const std::size_t k = detail::validate_profile(profile);
  const detail::WelfareTable others(profile, agent);
  const Rational w = others.at(0, grand(k));
  std::optional<Rational> best;
  Bundle arg = 0;
  for (const auto s : sigma.sets) {
    const Rational u = type(s) + others.at(0, complement(s, k)) - w;
    if (!best || u > *best) best = u, arg = s;
  }
  BidTable msg(k);
  if (arg != 0) msg.set(arg, w + 1);
  auto replay = profile;
  replay[agent] = msg.completion();
  const auto r = sigma_vcg(replay, sigma);
  if (utility(type, r, agent) != *best) throw Error(ErrorKind::model, "Sigma best-response witness does not attain its value");
  return {*best, std::move(msg)};
}

/// Continuum-exact Nash check in (unrestricted) VCG.
inline Certificate<BidTable, ValuationTable> is_nash(const std::vector<ValuationTable>& messages,
                                                     const std::vector<ValuationTable>& types) {
  const auto r = vcg_ca(messages);
  Certificate<BidTable, ValuationTable> cert;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    auto br = best_response_ca(i, messages, types[i]);
    const Rational gain = br.utility - utility(types[i], r, i);
    if (gain > 0) {
      cert.verdict = Verdict::refuted;
      cert.witness = Deviation<BidTable>{i, std::move(br.message), gain};
      return cert;
    }
  }
  return cert;
}

/// Zeroes every bid except those on bundles won in the VCG outcome or in an
/// agent-removed outcome. Outcome and payments are unchanged (verified).
inline std::vector<BidTable> n_vcg_reduce(const std::vector<BidTable>& bids) {
  const auto full = detail::complete(bids);
  const std::size_t n = bids.size();
  const std::size_t k = detail::validate_profile(full);
  std::vector<BidTable> out(n, BidTable(k));
  auto mark = [&](const Allocation& a) {
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] != 0 && full[i](a[i]) != 0) out[i].set(a[i], full[i](a[i]));
    }
  };
  const auto r = vcg_ca(full);
  mark(r.allocation);
  for (std::size_t j = 0; j < n; ++j) mark(detail::WelfareTable(full, j).allocation(grand(k)));
  if (vcg_ca(out) != r) throw Error(ErrorKind::construction_failed, "reduction changed the VCG outcome");
  return out;
}

inline bool n_vcg_membership(const BidTable& t, std::size_t agents) { return t.nonzeros() <= agents; }

/// Generic handles over bid tables for the simplification checks.
inline Mechanism<BidTable, Allocation> vcg_handle() {
  return {"VCG", [](std::size_t, const BidTable&) { return true; },
          [](const std::vector<BidTable>& x) {
            auto r = vcg_ca(x);
            return Result<Allocation>{std::move(r.allocation), std::move(r.payments)};
          }};
}

inline Mechanism<BidTable, Allocation> sigma_vcg_handle(const BundleFamily& sigma) {
  return {"Sigma-VCG " + sigma.to_string(),
          [sigma](std::size_t, const BidTable& m) { return !sigma_violation(m.completion(), sigma).has_value(); },
          [sigma](const std::vector<BidTable>& x) {
            auto r = sigma_vcg(x, sigma);
            return Result<Allocation>{std::move(r.allocation), std::move(r.payments)};
          }};
}

inline Mechanism<BidTable, Allocation> n_vcg_handle(std::size_t agents) {
  return {std::to_string(agents) + "-VCG",
          [agents](std::size_t, const BidTable& m) { return n_vcg_membership(m, agents); },
          [](const std::vector<BidTable>& x) {
            auto r = vcg_ca(x);
            return Result<Allocation>{std::move(r.allocation), std::move(r.payments)};
          }};
}

inline Valuation<ValuationTable, Allocation> valuation() {
  return [](std::size_t i, const ValuationTable& t, const Allocation& a) { return t(a.at(i)); };
}

struct WelfareRatio {
  std::size_t k = 0, m = 0;
  std::vector<Bundle> blocks, shifted;  // G_1..G_m and G'_1..G'_m
  BundleFamily sigma, sigma_shifted;
  std::vector<ValuationTable> types;
  Rational welfare, welfare_shifted;
  Rational bound;  // m / ceil(m^2 / k)
};

/// Singleton-desire agents whose desired items sit in distinct blocks of one
/// partition but are packed together by the shifted partition.
inline WelfareRatio welfare_ratio_instance(std::size_t k, std::size_t m) {
  check_items(k);
  if (m == 0 || m > k) throw Error(ErrorKind::invalid_input, "need 1 <= m <= k");
  WelfareRatio w;
  w.k = k;
  w.m = m;
  const std::size_t base = k / m, extra = k % m;
  std::vector<std::size_t> sizes(m);
  std::vector<std::size_t> desired(m);
  std::size_t next = 0;
  for (std::size_t j = 0; j < m; ++j) {
    sizes[j] = base + (j < extra ? 1 : 0);
    Bundle b = 0;
    desired[j] = next;
    for (std::size_t t = 0; t < sizes[j]; ++t) b |= Bundle{1} << next++;
    w.blocks.push_back(b);
  }
  // Block j of the shifted partition holds the desired items of agents
  // j*base .. (j+1)*base - 1; leftover items fill the blocks in order.
  w.shifted.assign(m, 0);
  Bundle used = 0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = j * base; i < std::min(m, (j + 1) * base); ++i) {
      w.shifted[j] |= Bundle{1} << desired[i];
      used |= Bundle{1} << desired[i];
    }
  }
  std::size_t item = 0;
  for (std::size_t j = 0; j < m; ++j) {
    while (static_cast<std::size_t>(__builtin_popcount(w.shifted[j])) < sizes[j]) {
      while (used >> item & 1u) ++item;
      w.shifted[j] |= Bundle{1} << item;
      used |= Bundle{1} << item;
    }
  }
  w.sigma = quasi_field_closure(BundleFamily(k, w.blocks));
  w.sigma_shifted = quasi_field_closure(BundleFamily(k, w.shifted));
  for (std::size_t i = 0; i < m; ++i) {
    const Bundle g = Bundle{1} << desired[i];
    w.types.push_back(ValuationTable::from(k, [g](Bundle x) { return (x & g) ? 1 : 0; }));
  }
  std::vector<ValuationTable> p, q;
  for (const auto& t : w.types) {
    p.push_back(project(t, w.sigma));
    q.push_back(project(t, w.sigma_shifted));
  }
  w.welfare = max_welfare(p);
  w.welfare_shifted = max_welfare(q);
  w.bound = Rational(m) / Rational((m * m + k - 1) / k);
  if (w.welfare != m) throw Error(ErrorKind::construction_failed, "bundled welfare is not m");
  if (w.welfare_shifted > Rational((m * m + k - 1) / k)) {
    throw Error(ErrorKind::construction_failed, "shifted welfare exceeds ceil(m^2/k)");
  }
  return w;
}

/// Agent 1's type with distinct values along every chain: v(X) = sum of 2^pos.
inline ValuationTable appf_first_type(std::size_t k) {
  if (k < 3 || k > 6) throw Error(ErrorKind::invalid_input, "need 3 <= k <= 6");
  return ValuationTable::from(k, [](Bundle x) { return static_cast<long>(x); });
}

/// Agent 2's type for X strictly inside Y: H on supersets of Y^c plus d on
/// supersets of X^c, with H = v1(G) + 1 (0 when Y = G) and
/// d = (v1(Y) - v1(X)) / 2. (Y, Y^c) is then the unique efficient outcome
/// while agent 2 strictly prefers X^c to Y^c.
inline ValuationTable appf_second_type(const ValuationTable& first, Bundle x, Bundle y) {
  const std::size_t k = first.items();
  if (!subset(x, y) || x == y) throw Error(ErrorKind::invalid_input, "X must be a strict subset of Y");
  const Rational h = y == grand(k) ? Rational(0) : first(grand(k)) + 1;
  const Rational d = (first(y) - first(x)) / 2;
  const Bundle yc = complement(y, k), xc = complement(x, k);
  return ValuationTable::from(k, [&](Bundle z) {
    Rational v = 0;
    if (subset(yc, z)) v += h;
    if (subset(xc, z)) v += d;
    return v;
  });
}

struct AppFInstance {
  ValuationTable first;
  std::function<ValuationTable(Bundle, Bundle)> second;  // (X, Y) with X strictly inside Y
};

inline AppFInstance appf_instance(std::size_t k) {
  auto first = appf_first_type(k);
  return {first, [first](Bundle x, Bundle y) { return appf_second_type(first, x, y); }};
}

struct AppFCheck {
  bool efficient_unique = false;  // (Y, Y^c) is the only efficient outcome
  Rational best_response;         // agent 2's best utility against m1
  Rational efficient_utility;     // agent 2's utility at (Y, Y^c) against m1
  bool refuted = false;           // efficient_utility < best_response
};

/// Against any agent-1 message with m1(X) = m1(Y), agent 2 cannot be best
/// responding at the efficient outcome.
inline AppFCheck appf_refute(const ValuationTable& first, Bundle x, Bundle y, const ValuationTable& m1) {
  const std::size_t k = first.items();
  if (m1(x) != m1(y)) throw Error(ErrorKind::invalid_input, "message must bid equally on X and Y");
  const auto second = appf_second_type(first, x, y);
  AppFCheck c;
  const std::vector<ValuationTable> truth{first, second};
  const Rational opt = max_welfare(truth);
  std::size_t optimal = 0;
  for (Bundle a = 0; a <= grand(k); ++a) {
    for (Bundle b = complement(a, k);; b = (b - 1) & complement(a, k)) {
      if (first(a) + second(b) == opt) ++optimal;
      if (b == 0) break;
    }
  }
  c.efficient_unique = first(y) + second(complement(y, k)) == opt && optimal == 1;
  const std::vector<ValuationTable> profile{m1, ValuationTable::zero(k)};
  c.best_response = best_response_ca(1, profile, second).utility;
  c.efficient_utility = second(complement(y, k)) - (m1(grand(k)) - m1(y));
  c.refuted = c.efficient_utility < c.best_response;
  return c;
}

}  // namespace mechsimp::ca
