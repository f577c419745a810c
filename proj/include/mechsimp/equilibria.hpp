#pragma once

// Best responses over the continuous bid space and the solution concepts for
// slot auctions.
//
// Every best response is computed by replaying a finite set of candidate
// messages through the mechanism, so the reported value is always attained by
// the returned witness. Completeness of the candidate sets:
//  - full VCG: taking slot j costs at least W_{-i} - W_{-i}(without j); a bid
//    of W_{-i} + 1 on j alone attains it. The zero row covers opting out.
//  - full GSP: while agent i loses, the rounds play out as without i, so
//    winning round j costs exactly the highest remaining bid on j. Bidding 0
//    before j loses whenever any message does.
//  - scalar variants: outcome and own payment are constant between
//    consecutive distinct competitor bids, so 0, every competitor bid, the
//    midpoints and max + 1 cover every attainable utility.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mechsimp/error.hpp"
#include "mechsimp/parallel.hpp"
#include "mechsimp/rational.hpp"
#include "mechsimp/sponsored.hpp"

namespace mechsimp {

enum class Verdict { equilibrium, refuted };
enum class Regime { continuum_exact, grid_relative };

inline const char* to_string(Verdict v) { return v == Verdict::equilibrium ? "equilibrium" : "refuted"; }
inline const char* to_string(Regime r) { return r == Regime::continuum_exact ? "continuum-exact" : "grid-relative"; }

template <class Message>
struct Deviation {
  std::size_t agent = 0;
  Message message;
  Rational gain;
};

template <class Message, class Type = Message>
struct Certificate {
  Verdict verdict = Verdict::equilibrium;
  std::optional<Deviation<Message>> witness;
  Regime regime = Regime::continuum_exact;
  std::vector<Type> type_profile;  // set by ex-post checks on refutation

  bool holds() const { return verdict == Verdict::equilibrium; }
};

template <class Message>
struct BestResponse {
  Rational utility;
  Message message;
};

}  // namespace mechsimp

namespace mechsimp::slots {

using SlotCertificate = Certificate<Row>;

namespace detail {

inline std::vector<Row> candidate_messages(const SlotMechanism& mech, std::size_t agent, const BidMatrix& profile) {
  const std::size_t n = profile.size(), k = mech.k;
  std::vector<Row> out;
  if (mech.is_scalar()) {
    std::set<Rational> others;
    for (std::size_t l = 0; l < n; ++l) {
      if (l != agent) others.insert(profile[l][0]);
    }
    std::vector<Rational> cands{Rational(0)};
    std::optional<Rational> prev;
    for (const auto& b : others) {
      if (prev) cands.push_back((*prev + b) / 2);
      cands.push_back(b);
      prev = b;
    }
    cands.push_back((prev ? *prev : Rational(0)) + 1);
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    for (const auto& c : cands) out.push_back(mech.message(c));
    return out;
  }
  out.emplace_back(k, Rational(0));
  if (mech.rule == Rule::vcg) {
    const Rational w = max_welfare(profile, agent);
    for (std::size_t j = 0; j < k; ++j) {
      Row row(k, Rational(0));
      row[j] = w + 1;
      out.push_back(std::move(row));
    }
    return out;
  }
  // GSP: replay the rounds without the agent and bid just above the best
  // remaining competitor on the target slot.
  std::vector<bool> taken(n, false);
  taken[agent] = true;
  for (std::size_t j = 0; j < k; ++j) {
    Rational top = 0;
    std::size_t winner = unassigned;
    for (std::size_t l = 0; l < n; ++l) {
      if (taken[l]) continue;
      if (profile[l][j] > top) top = profile[l][j];
      if (winner == unassigned || profile[l][j] > profile[winner][j]) winner = l;
    }
    Row row(k, Rational(0));
    row[j] = top + 1;
    out.push_back(std::move(row));
    if (winner == unassigned) break;
    taken[winner] = true;
  }
  return out;
}

}  // namespace detail

/// Exact best response of `agent` with slot values `type` against the other
/// rows of `profile` (the agent's own row is ignored). Ties among candidates
/// keep the first one, which prefers the zero message.
inline BestResponse<Row> best_response_slots(const SlotMechanism& mech, std::size_t agent, const BidMatrix& profile,
                                             const Row& type) {
  if (agent >= profile.size()) {
    throw Error(ErrorKind::invalid_input, "agent index " + std::to_string(agent) + " out of range");
  }
  if (type.size() != mech.k) throw Error(ErrorKind::invalid_input, "type length differs from slot count");
  auto work = profile;
  std::optional<BestResponse<Row>> best;
  for (auto& msg : detail::candidate_messages(mech, agent, profile)) {
    work[agent] = msg;
    const Rational u = utility(type, mech.run(work), agent);
    if (!best || u > best->utility) best = BestResponse<Row>{u, std::move(msg)};
  }
  return *best;
}

/// Continuum-exact Nash check of `bids` for agents with slot values `values`.
inline SlotCertificate is_nash(const BidMatrix& bids, const std::vector<Row>& values, const SlotMechanism& mech) {
  if (values.size() != bids.size()) throw Error(ErrorKind::invalid_input, "type and bid profiles differ in size");
  const auto current = mech.run(bids);
  SlotCertificate cert;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const Rational u = utility(values[i], current, i);
    auto br = best_response_slots(mech, i, bids, values[i]);
    if (br.utility > u) {
      auto replay = bids;
      replay[i] = br.message;
      const Rational gain = utility(values[i], mech.run(replay), i) - u;
      if (gain != br.utility - u) throw Error(ErrorKind::model, "deviation replay disagrees with best response");
      cert.verdict = Verdict::refuted;
      cert.witness = Deviation<Row>{i, std::move(br.message), gain};
      return cert;
    }
  }
  return cert;
}

inline SlotCertificate is_nash(const BidMatrix& bids, const SlotInstance& inst, const SlotMechanism& mech) {
  return is_nash(bids, inst.values(), mech);
}

/// Welfare-maximal assignment check against exact assignment search.
inline bool is_efficient(const Assignment& a, const SlotInstance& inst) {
  if (a.size() != inst.agents()) throw Error(ErrorKind::invalid_input, "assignment size differs from agent count");
  return welfare_of(inst.values(), a) == max_welfare(inst.values());
}

namespace detail {

/// Occupant of each slot 1..min(n,k); model error on gaps or clashes.
inline std::vector<std::size_t> occupants(const Assignment& a, std::size_t k) {
  const std::size_t filled = std::min(a.size(), k);
  std::vector<std::size_t> occ(k, unassigned);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == unassigned) continue;
    if (a[i] >= k || occ[a[i]] != unassigned) throw Error(ErrorKind::model, "assignment is not injective on slots");
    occ[a[i]] = i;
  }
  for (std::size_t s = 0; s < filled; ++s) {
    if (occ[s] == unassigned) throw Error(ErrorKind::model, "slot " + std::to_string(s + 1) + " is empty");
  }
  occ.resize(filled);
  return occ;
}

}  // namespace detail

/// Local envy-freeness: the occupant of slot s does not prefer the slot and
/// payment of the occupant one slot above (value CTRs of the instance).
inline bool is_locally_envy_free(const Assignment& a, const std::vector<Rational>& payments, const SlotInstance& inst) {
  const auto occ = detail::occupants(a, inst.slots());
  const auto& v = inst.per_click();
  const auto& beta = inst.beta();
  for (std::size_t s = 1; s < occ.size(); ++s) {
    if (v[occ[s]] > v[occ[s - 1]]) throw Error(ErrorKind::model, "assignment is not assortative");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == unassigned && !occ.empty() && v[i] > v[occ.back()]) {
      throw Error(ErrorKind::model, "assignment is not assortative");
    }
  }
  for (std::size_t s = 1; s < occ.size(); ++s) {
    const std::size_t lower = occ[s], upper = occ[s - 1];
    if (beta[s] * v[lower] - payments[lower] < beta[s - 1] * v[lower] - payments[upper]) return false;
  }
  // The best unassigned agent sits one position below the last occupied slot.
  if (occ.empty()) return true;
  std::optional<Rational> next;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == unassigned && (!next || v[i] > *next)) next = v[i];
  }
  return !next || beta[occ.size() - 1] * *next <= payments[occ.back()];
}

struct ForcingDeviation {
  bool exists = false;
  std::size_t upper = unassigned, lower = unassigned;  // agents
  Rational low, high;                                   // open interval for b_lower
};

/// A lower agent can bid into ((c_s - c_{s+1}) v_upper + p_lower,
/// (c_s - c_{s+1}) v_lower + p_lower), forcing the upper agent out; the
/// interval is nonempty iff v_lower > v_upper. Unassigned agents sit at
/// virtual slot k+1 with rate 0 and payment 0.
inline ForcingDeviation forcing_deviation_exists(const Assignment& a, const std::vector<Rational>& payments,
                                                 const SlotInstance& inst) {
  const std::size_t k = inst.slots();
  const auto occ = detail::occupants(a, k);
  const auto& v = inst.per_click();
  const auto& beta = inst.beta();
  auto check = [&](std::size_t s, std::size_t upper, std::size_t lower, const Rational& p_lower) {
    const Rational gap = beta[s] - beta[s + 1];
    ForcingDeviation f{v[lower] > v[upper], upper, lower, gap * v[upper] + p_lower, gap * v[lower] + p_lower};
    return f;
  };
  for (std::size_t s = 0; s + 1 < occ.size(); ++s) {
    auto f = check(s, occ[s], occ[s + 1], payments[occ[s + 1]]);
    if (f.exists) return f;
  }
  if (occ.size() == k && k > 0) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] != unassigned) continue;
      auto f = check(k - 1, occ[k - 1], i, Rational(0));
      if (f.exists) return f;
    }
  }
  return {};
}

/// Per-agent map from types (slot-value rows) to messages.
class StrategyFamily {
 public:
  explicit StrategyFamily(std::size_t agents) : table_(agents) {}

  void set(std::size_t agent, Row type, Row message) {
    auto& t = table_.at(agent);
    for (auto& [ty, msg] : t) {
      if (ty == type) {
        msg = std::move(message);
        return;
      }
    }
    t.emplace_back(std::move(type), std::move(message));
  }

  const Row& at(std::size_t agent, const Row& type) const {
    for (const auto& [ty, msg] : table_.at(agent)) {
      if (ty == type) return msg;
    }
    throw Error(ErrorKind::invalid_input, "strategy of agent " + std::to_string(agent) + " has no entry for a type");
  }

  std::size_t agents() const { return table_.size(); }

 private:
  std::vector<std::vector<std::pair<Row, Row>>> table_;
};

/// Ex-post check: Nash at every type profile of the grid (grid-relative over
/// types, exact over messages). Type profiles are visited lexicographically
/// and the first refutation wins.
inline Certificate<Row> expost_check(const StrategyFamily& s, const std::vector<std::vector<Row>>& type_grid,
                                     const SlotMechanism& mech) {
  const std::size_t n = type_grid.size();
  if (s.agents() != n) throw Error(ErrorKind::invalid_input, "strategy family and type grid differ in agent count");
  std::size_t total = 1;
  for (const auto& t : type_grid) {
    if (t.empty()) throw Error(ErrorKind::invalid_input, "empty type list");
    total *= t.size();
  }
  auto profile_at = [&](std::size_t flat) {
    std::vector<Row> types(n);
    for (std::size_t i = n; i-- > 0;) {
      types[i] = type_grid[i][flat % type_grid[i].size()];
      flat /= type_grid[i].size();
    }
    return types;
  };
  // Missing entries and inadmissible messages surface before any search.
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : type_grid[i]) {
      if (!mech.admits(s.at(i, t))) {
        throw Error(ErrorKind::invalid_input, "strategy message of agent " + std::to_string(i) + " is inadmissible");
      }
    }
  }
  auto messages = [&](const std::vector<Row>& types) {
    BidMatrix bids;
    for (std::size_t i = 0; i < n; ++i) bids.push_back(s.at(i, types[i]));
    return bids;
  };
  const auto first = parallel_find_first(total, [&](std::size_t f) {
    const auto types = profile_at(f);
    return !is_nash(messages(types), types, mech).holds();
  });
  Certificate<Row> cert;
  cert.regime = Regime::grid_relative;
  if (!first) return cert;
  const auto types = profile_at(*first);
  auto refuted = is_nash(messages(types), types, mech);
  cert.verdict = Verdict::refuted;
  cert.witness = std::move(refuted.witness);
  cert.type_profile = types;
  return cert;
}

}  // namespace mechsimp::slots
