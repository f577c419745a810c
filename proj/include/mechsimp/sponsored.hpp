#pragma once

// Slot auctions: fully expressive VCG and GSP over per-slot bid matrices, the
// scalar (alpha-restricted) message space and closed-form VCG prices.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mechsimp/error.hpp"
#include "mechsimp/mechanism.hpp"
#include "mechsimp/rational.hpp"

namespace mechsimp::slots {

using Row = std::vector<Rational>;
using BidMatrix = std::vector<Row>;

inline constexpr std::size_t unassigned = static_cast<std::size_t>(-1);

/// Slot per agent (0-based), or `unassigned`.
using Assignment = std::vector<std::size_t>;

/// Click-through rates for slots 1..k: alpha_1 = 1, strictly decreasing,
/// positive. Entries past k read as 0.
class CtrVector {
 public:
  CtrVector() = default;
  explicit CtrVector(std::vector<Rational> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw Error(ErrorKind::model, "CTR vector is empty");
    if (entries_[0] != 1) throw Error(ErrorKind::model, "CTR vector must start with 1");
    for (std::size_t j = 0; j < entries_.size(); ++j) {
      if (entries_[j] <= 0) throw Error(ErrorKind::model, "CTR entries must be positive");
      if (j > 0 && entries_[j] >= entries_[j - 1]) {
        throw Error(ErrorKind::model, "CTR vector must be strictly decreasing");
      }
    }
  }

  std::size_t slots() const { return entries_.size(); }
  Rational operator[](std::size_t j) const { return j < entries_.size() ? entries_[j] : Rational(0); }
  const std::vector<Rational>& entries() const { return entries_; }
  bool operator==(const CtrVector&) const = default;

 private:
  std::vector<Rational> entries_;
};

/// Multiplier of the scalar message space. Unlike CtrVector it may be flat
/// (the all-ones vector gives 1-GSP), but it stays positive and nonincreasing.
class BidMultiplier {
 public:
  BidMultiplier() = default;
  explicit BidMultiplier(std::vector<Rational> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw Error(ErrorKind::model, "multiplier is empty");
    if (entries_[0] != 1) throw Error(ErrorKind::model, "multiplier must start with 1");
    for (std::size_t j = 0; j < entries_.size(); ++j) {
      if (entries_[j] <= 0) throw Error(ErrorKind::model, "multiplier entries must be positive");
      if (j > 0 && entries_[j] > entries_[j - 1]) {
        throw Error(ErrorKind::model, "multiplier must be nonincreasing");
      }
    }
  }
  BidMultiplier(const CtrVector& ctr) : entries_(ctr.entries()) {}  // NOLINT(implicit)

  static BidMultiplier ones(std::size_t k) { return BidMultiplier(std::vector<Rational>(k, Rational(1))); }

  std::size_t slots() const { return entries_.size(); }
  Rational operator[](std::size_t j) const { return j < entries_.size() ? entries_[j] : Rational(0); }
  const std::vector<Rational>& entries() const { return entries_; }
  bool is_ones() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Rational& a) { return a == 1; });
  }
  bool operator==(const BidMultiplier&) const = default;

 private:
  std::vector<Rational> entries_;
};

/// n agents, k slots, v_i(j) per agent and slot. The proportional form keeps
/// beta and per-click values alongside the table.
class SlotInstance {
 public:
  static SlotInstance from_table(std::vector<Row> values) {
    if (values.empty()) throw Error(ErrorKind::model, "instance has no agents");
    const std::size_t k = values[0].size();
    if (k == 0) throw Error(ErrorKind::model, "instance has no slots");
    if (k > values.size()) throw Error(ErrorKind::model, "more slots than agents");
    for (const auto& row : values) {
      if (row.size() != k) throw Error(ErrorKind::model, "value table is not rectangular");
      for (const auto& v : row) {
        if (v < 0) throw Error(ErrorKind::model, "negative slot value");
      }
    }
    SlotInstance s;
    s.values_ = std::move(values);
    return s;
  }

  static SlotInstance proportional(CtrVector beta, std::vector<Rational> per_click) {
    if (per_click.empty()) throw Error(ErrorKind::model, "instance has no agents");
    if (beta.slots() > per_click.size()) throw Error(ErrorKind::model, "more slots than agents");
    SlotInstance s;
    for (const auto& v : per_click) {
      if (v < 0) throw Error(ErrorKind::model, "negative per-click value");
      Row row;
      for (std::size_t j = 0; j < beta.slots(); ++j) row.push_back(beta[j] * v);
      s.values_.push_back(std::move(row));
    }
    s.beta_ = std::move(beta);
    s.per_click_ = std::move(per_click);
    return s;
  }

  std::size_t agents() const { return values_.size(); }
  std::size_t slots() const { return values_[0].size(); }
  const std::vector<Row>& values() const { return values_; }
  const Row& values(std::size_t agent) const { return values_.at(agent); }

  bool is_proportional() const { return beta_.has_value(); }
  const CtrVector& beta() const {
    if (!beta_) throw Error(ErrorKind::model, "instance is not in proportional form");
    return *beta_;
  }
  const std::vector<Rational>& per_click() const {
    if (!beta_) throw Error(ErrorKind::model, "instance is not in proportional form");
    return per_click_;
  }

  /// Theta^>: every agent strictly prefers higher slots.
  bool is_decreasing() const {
    for (const auto& row : values_) {
      for (std::size_t j = 1; j < row.size(); ++j) {
        if (!(row[j - 1] > row[j])) return false;
      }
    }
    return true;
  }

  /// Membership in Theta^alpha: proportional with beta = alpha.
  bool in_theta(const CtrVector& alpha) const { return beta_ && *beta_ == alpha; }

  /// Per-click values sorted decreasingly (ties by index).
  bool is_sorted() const {
    const auto& v = per_click();
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[i - 1]) return false;
    }
    return true;
  }

 private:
  std::vector<Row> values_;
  std::optional<CtrVector> beta_;
  std::vector<Rational> per_click_;
};

struct SlotResult {
  Assignment assignment;
  std::vector<Rational> payments;

  Rational revenue() const { return sum(payments); }
  bool operator==(const SlotResult&) const = default;
};

inline Rational value_of(const Row& values, std::size_t slot) {
  return slot == unassigned || slot >= values.size() ? Rational(0) : values[slot];
}

inline Rational utility(const Row& values, const SlotResult& r, std::size_t agent) {
  return value_of(values, r.assignment.at(agent)) - r.payments.at(agent);
}

inline std::size_t validate_bids(const BidMatrix& bids) {
  if (bids.empty()) throw Error(ErrorKind::invalid_input, "bid matrix has no agents");
  const std::size_t k = bids[0].size();
  if (k == 0) throw Error(ErrorKind::invalid_input, "bid matrix has no slots");
  for (const auto& row : bids) {
    if (row.size() != k) throw Error(ErrorKind::invalid_input, "bid matrix is not rectangular");
    for (const auto& b : row) {
      if (b < 0) throw Error(ErrorKind::invalid_input, "negative bid " + to_string(b));
    }
  }
  return k;
}

namespace detail {

/// Max-weight injective assignment of agents to slots by DP over (agent,
/// used-slot mask). Excluded agents and slots take no part. Among optimal
/// assignments the lexicographically smallest slot vector wins, with
/// "unassigned" ordered after every slot.
class AssignmentSolver {
 public:
  AssignmentSolver(const BidMatrix& w, std::size_t excluded_agent = unassigned, unsigned excluded_slots = 0)
      : w_(w), n_(w.size()), k_(w[0].size()), skip_(excluded_agent), full_(1u << k_), excluded_(excluded_slots) {
    if (k_ > 20) throw Error(ErrorKind::invalid_input, "too many slots for exact assignment");
    best_.assign((n_ + 1) * full_, Rational(0));
    for (std::size_t i = n_; i-- > 0;) {
      for (unsigned mask = 0; mask < full_; ++mask) {
        if (mask & excluded_slots) continue;
        Rational b = at(i + 1, mask);
        if (i != skip_) {
          for (std::size_t j = 0; j < k_; ++j) {
            if (mask & (1u << j) || excluded_slots & (1u << j)) continue;
            const Rational cand = w_[i][j] + at(i + 1, mask | (1u << j));
            if (cand > b) b = cand;
          }
        }
        best_[i * full_ + mask] = b;
      }
    }
  }

  Rational welfare() const { return at(0, start_); }

  Assignment assignment() const {
    Assignment out(n_, unassigned);
    unsigned mask = start_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i == skip_) continue;
      const Rational& target = at(i, mask);
      bool placed = false;
      for (std::size_t j = 0; j < k_ && !placed; ++j) {
        if ((mask | excluded_) & (1u << j)) continue;
        if (w_[i][j] + at(i + 1, mask | (1u << j)) == target) {
          out[i] = j;
          mask |= 1u << j;
          placed = true;
        }
      }
    }
    return out;
  }

 private:
  const Rational& at(std::size_t i, unsigned mask) const { return best_[i * full_ + mask]; }

  const BidMatrix& w_;
  std::size_t n_, k_, skip_;
  unsigned full_, excluded_, start_ = 0;
  std::vector<Rational> best_;
};

}  // namespace detail

/// Max declared welfare over injective assignments, optionally without one
/// agent and without a set of slots (bitmask).
inline Rational max_welfare(const BidMatrix& bids, std::size_t excluded_agent = unassigned,
                            unsigned excluded_slots = 0) {
  return detail::AssignmentSolver(bids, excluded_agent, excluded_slots).welfare();
}

inline Rational welfare_of(const BidMatrix& w, const Assignment& a) {
  Rational total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) total += value_of(w[i], a[i]);
  return total;
}

inline SlotResult vcg_slots(const BidMatrix& bids) {
  validate_bids(bids);
  const detail::AssignmentSolver solver(bids);
  SlotResult r;
  r.assignment = solver.assignment();
  const Rational total = welfare_of(bids, r.assignment);
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const Rational others = total - value_of(bids[i], r.assignment[i]);
    r.payments.push_back(max_welfare(bids, i) - others);
  }
  return r;
}

inline SlotResult gsp_slots(const BidMatrix& bids) {
  const std::size_t k = validate_bids(bids);
  const std::size_t n = bids.size();
  SlotResult r{Assignment(n, unassigned), std::vector<Rational>(n, Rational(0))};
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t winner = unassigned;
    for (std::size_t i = 0; i < n; ++i) {
      if (r.assignment[i] != unassigned) continue;
      if (winner == unassigned || bids[i][j] > bids[winner][j]) winner = i;
    }
    if (winner == unassigned) break;
    Rational price = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != winner && r.assignment[i] == unassigned && bids[i][j] > price) price = bids[i][j];
    }
    r.assignment[winner] = j;
    r.payments[winner] = price;
  }
  return r;
}

inline Row expand_scalar(const Rational& bid, const BidMultiplier& multiplier) {
  Row row;
  for (const auto& a : multiplier.entries()) row.push_back(a * bid);
  return row;
}

inline BidMatrix expand_scalar(const std::vector<Rational>& bids, const BidMultiplier& multiplier) {
  BidMatrix m;
  for (const auto& b : bids) {
    if (b < 0) throw Error(ErrorKind::invalid_input, "negative scalar bid " + to_string(b));
    m.push_back(expand_scalar(b, multiplier));
  }
  return m;
}

/// The scalar bid behind a row, if the row lies in {multiplier * b : b >= 0}.
inline std::optional<Rational> scalar_of(const Row& row, const BidMultiplier& multiplier) {
  if (row.size() != multiplier.slots() || row[0] < 0) return std::nullopt;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] != multiplier[j] * row[0]) return std::nullopt;
  }
  return row[0];
}

/// Order of agents by decreasing per-click value, ties by index.
inline std::vector<std::size_t> value_order(const std::vector<Rational>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return order;
}

/// Per-position VCG prices for sorted per-click values v (decreasing):
/// p_i = sum_{j=i}^{min(k,n-1)} (c_j - c_{j+1}) v_{j+1}, with c_{k+1} = 0.
inline std::vector<Rational> sorted_vcg_prices(const std::vector<Rational>& ctr, const std::vector<Rational>& sorted) {
  const std::size_t n = sorted.size(), k = ctr.size();
  auto c = [&](std::size_t j) { return j < k ? ctr[j] : Rational(0); };
  std::vector<Rational> p(n, Rational(0));
  const std::size_t last = std::min(k, n - 1);  // 1-based upper index
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < last; ++j) p[i] += (c(j) - c(j + 1)) * sorted[j + 1];
  }
  return p;
}

/// Closed-form VCG prices of a proportional instance, in input agent order.
inline std::vector<Rational> vcg_slot_prices(const SlotInstance& inst) {
  const auto& v = inst.per_click();
  const auto order = value_order(v);
  std::vector<Rational> sorted;
  for (const auto i : order) sorted.push_back(v[i]);
  const auto p = sorted_vcg_prices(inst.beta().entries(), sorted);
  std::vector<Rational> out(v.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) out[order[pos]] = p[pos];
  return out;
}

inline Rational vcg_revenue(const SlotInstance& inst) { return sum(vcg_slot_prices(inst)); }

enum class Rule { vcg, gsp };

inline const char* to_string(Rule r) { return r == Rule::vcg ? "vcg" : "gsp"; }

/// A slot mechanism: VCG or GSP, over full bid rows or the scalar space.
struct SlotMechanism {
  Rule rule = Rule::vcg;
  std::size_t k = 1;
  std::optional<BidMultiplier> multiplier;  // set for the scalar variants

  static SlotMechanism full(Rule rule, std::size_t k) { return {rule, k, std::nullopt}; }
  static SlotMechanism scalar(Rule rule, BidMultiplier m) {
    const std::size_t k = m.slots();
    return {rule, k, std::move(m)};
  }

  bool is_scalar() const { return multiplier.has_value(); }

  std::string name() const {
    std::string base = rule == Rule::vcg ? "VCG" : "GSP";
    if (!multiplier) return "full " + base;
    return (multiplier->is_ones() ? "1-" : "alpha-") + base;
  }

  bool admits(const Row& row) const {
    if (row.size() != k) return false;
    if (multiplier) return scalar_of(row, *multiplier).has_value();
    return std::all_of(row.begin(), row.end(), [](const Rational& b) { return b >= 0; });
  }

  Row message(const Rational& scalar_bid) const {
    if (!multiplier) throw Error(ErrorKind::model, "scalar message for a full mechanism");
    return expand_scalar(scalar_bid, *multiplier);
  }

  SlotResult run(const BidMatrix& bids) const {
    for (std::size_t i = 0; i < bids.size(); ++i) {
      if (!admits(bids[i])) {
        throw Error(ErrorKind::message_rejected, name() + " rejects the message of agent " + std::to_string(i));
      }
    }
    return rule == Rule::vcg ? vcg_slots(bids) : gsp_slots(bids);
  }

  /// Generic handle for the core simplification checks.
  Mechanism<Row, Assignment> handle() const {
    const SlotMechanism self = *this;
    return {name(), [self](std::size_t, const Row& m) { return self.admits(m); },
            [self](const std::vector<Row>& profile) {
              const auto r = self.run(profile);
              return Result<Assignment>{r.assignment, r.payments};
            }};
  }
};

}  // namespace mechsimp::slots
