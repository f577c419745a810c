#pragma once

// Constructive witnesses for slot auctions. Every construction replays its
// output through the mechanisms and the exact best-response oracle before
// returning; a failed replay raises construction_failed instead of returning
// an unverified profile.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "mechsimp/equilibria.hpp"
#include "mechsimp/error.hpp"
#include "mechsimp/parallel.hpp"
#include "mechsimp/rational.hpp"
#include "mechsimp/sponsored.hpp"

namespace mechsimp::slots {

namespace detail {

inline void require_sorted(const SlotInstance& inst) {
  if (!inst.is_sorted()) throw Error(ErrorKind::model, "per-click values must be sorted in decreasing order");
}

inline Assignment identity_assignment(std::size_t n, std::size_t k) {
  Assignment a(n, unassigned);
  for (std::size_t i = 0; i < std::min(n, k); ++i) a[i] = i;
  return a;
}

}  // namespace detail

/// Row i bids its own value for slot i and nothing else. A Nash equilibrium
/// with zero revenue under both full VCG and full GSP.
inline BidMatrix zero_revenue_profile(const SlotInstance& inst) {
  detail::require_sorted(inst);
  const std::size_t n = inst.agents(), k = inst.slots();
  BidMatrix bids(n, Row(k, Rational(0)));
  for (std::size_t i = 0; i < std::min(n, k); ++i) bids[i][i] = inst.values(i)[i];
  for (const auto rule : {Rule::vcg, Rule::gsp}) {
    const auto mech = SlotMechanism::full(rule, k);
    if (mech.run(bids).revenue() != 0) {
      throw Error(ErrorKind::construction_failed, std::string("zero-revenue profile has revenue under ") + to_string(rule));
    }
    if (!is_nash(bids, inst, mech).holds()) {
      throw Error(ErrorKind::construction_failed, std::string("zero-revenue profile is not Nash under ") + to_string(rule));
    }
  }
  return bids;
}

struct MilgromSequence {
  bool decreasing = true;
  std::vector<Rational> prices;  // p_j, j = 1..k
  std::vector<Rational> ratios;  // p_j / alpha_j
  std::optional<std::size_t> violation;  // first j (0-based) with ratio_j < ratio_{j+1}
};

/// p_j = sum_{i=j}^k v_{i+1} (beta_i - beta_{i+1}) with beta_{k+1} = 0 and
/// v_{n+1} = 0; the condition asks p_j / alpha_j to be nonincreasing.
inline MilgromSequence milgrom_condition(const BidMultiplier& alpha, const CtrVector& beta,
                                         const std::vector<Rational>& sorted_values) {
  const std::size_t k = beta.slots();
  if (alpha.slots() != k) throw Error(ErrorKind::model, "alpha and beta differ in length");
  for (std::size_t i = 1; i < sorted_values.size(); ++i) {
    if (sorted_values[i] > sorted_values[i - 1]) throw Error(ErrorKind::model, "values must be sorted");
  }
  auto v = [&](std::size_t i) { return i < sorted_values.size() ? sorted_values[i] : Rational(0); };
  MilgromSequence out;
  for (std::size_t j = 0; j < k; ++j) {
    Rational p = 0;
    for (std::size_t i = j; i < k; ++i) p += v(i + 1) * (beta[i] - beta[i + 1]);
    out.prices.push_back(p);
    out.ratios.push_back(p / alpha[j]);
  }
  for (std::size_t j = 0; j + 1 < k; ++j) {
    if (out.ratios[j] < out.ratios[j + 1]) {
      out.decreasing = false;
      out.violation = j;
      break;
    }
  }
  return out;
}

/// Scalar bids under which alpha-GSP reproduces the VCG outcome and prices:
/// b_1 = v_1, b_i = p_{i-1} / alpha_{i-1} up to min(n, k+1), then 0.
inline std::vector<Rational> vickrey_preserving_gsp_bids(const SlotInstance& inst, const BidMultiplier& alpha) {
  detail::require_sorted(inst);
  const std::size_t n = inst.agents(), k = inst.slots();
  const auto cond = milgrom_condition(alpha, inst.beta(), inst.per_click());
  if (!cond.decreasing) {
    throw Error(ErrorKind::condition_violated,
                "price ratios increase at index " + std::to_string(*cond.violation + 1));
  }
  const auto prices = vcg_slot_prices(inst);
  std::vector<Rational> b(n, Rational(0));
  b[0] = alpha[0] * inst.per_click()[0];
  for (std::size_t i = 1; i < std::min(n, k + 1); ++i) b[i] = prices[i - 1] / alpha[i - 1];

  const auto mech = SlotMechanism::scalar(Rule::gsp, alpha);
  const auto result = mech.run(expand_scalar(b, alpha));
  if (result.assignment != detail::identity_assignment(n, k) || result.payments != prices) {
    throw Error(ErrorKind::construction_failed, "alpha-GSP replay does not match the VCG outcome");
  }
  if (!is_nash(expand_scalar(b, alpha), inst, mech).holds()) {
    throw Error(ErrorKind::construction_failed, "Vickrey-preserving bids are not Nash");
  }
  return b;
}

struct AlphaVcgCounterexample {
  CtrVector alpha, beta;
  std::vector<Rational> values;
  std::vector<Rational> prices;
  Rational forced_b2, forced_b3;
  bool contradiction = false;  // forced_b2 < forced_b3 breaks the efficient order
  std::size_t grid_points = 0;
  std::size_t grid_matches = 0;  // scalar profiles on the sweep grid reproducing VCG
};

/// The fixed instance on which alpha-VCG cannot reproduce the VCG outcome.
/// Alongside the forced-bid argument, an exhaustive sweep over scalar bids
/// (multiples of 1/2 up to 12, plus 30) confirms that no profile matches.
inline AlphaVcgCounterexample alpha_vcg_counterexample() {
  AlphaVcgCounterexample c;
  c.alpha = CtrVector({Rational(1), Rational(1, 2), Rational(2, 5)});
  c.beta = CtrVector({Rational(1), Rational(9, 10), Rational(4, 5)});
  c.values = {Rational(30), Rational(20), Rational(10)};
  const auto inst = SlotInstance::proportional(c.beta, c.values);
  c.prices = vcg_slot_prices(inst);
  c.forced_b2 = (c.beta[0] - c.beta[1]) / (c.alpha[0] - c.alpha[1]) * c.values[1];
  c.forced_b3 = (c.beta[1] - c.beta[2]) / (c.alpha[1] - c.alpha[2]) * c.values[2];
  c.contradiction = c.forced_b2 < c.forced_b3;

  std::vector<Rational> grid;
  for (int h = 0; h <= 24; ++h) grid.emplace_back(h, 2);
  grid.emplace_back(30);
  const auto mech = SlotMechanism::scalar(Rule::vcg, c.alpha);
  const auto target = detail::identity_assignment(3, 3);
  const std::size_t g = grid.size();
  c.grid_points = g * g * g;
  std::vector<char> match(c.grid_points, 0);
  parallel_for(c.grid_points, [&](std::size_t f) {
    const std::vector<Rational> bids{grid[f / (g * g)], grid[f / g % g], grid[f % g]};
    // alpha is strictly decreasing, so unsorted bids cannot be assigned in order.
    if (bids[0] < bids[1] || bids[1] < bids[2]) return;
    const auto r = mech.run(expand_scalar(bids, c.alpha));
    match[f] = r.assignment == target && r.payments == c.prices;
  });
  c.grid_matches = static_cast<std::size_t>(std::count(match.begin(), match.end(), 1));
  return c;
}

struct RevenueGapInstance {
  Rule rule = Rule::vcg;
  CtrVector alpha;
  SlotInstance instance = SlotInstance::from_table({{Rational(0)}});
  std::vector<Rational> bids;  // scalar bids
  Rational revenue;            // revenue of the equilibrium
  Rational truthful_revenue;   // VCG revenue on the true types
};

/// Three agents, three slots; an equilibrium of the scalar mechanism with
/// revenue at most eps while truthful VCG revenue is at least r.
///
/// VCG: alpha = (1, 1/(r+1), 1/(2r+2)), per-click values (r+1, r+1, eps),
/// bids (r+1, eps, eps). Giving the third agent value r+1 as well is not an
/// equilibrium: that agent gains 1/2 - eps/(2r+2) by moving up a slot.
/// GSP: delta = eps/(r+2), alpha = (1, (1+delta)/(r+1), 1/(r+1)), all values
/// r+1, bids (r+1, delta/(1+delta) (r+1) twice).
inline RevenueGapInstance thm1_instance(Rule rule, const Rational& r, const Rational& eps) {
  if (r <= 0 || eps <= 0) throw Error(ErrorKind::invalid_input, "r and eps must be positive");
  RevenueGapInstance out;
  out.rule = rule;
  const Rational top = r + 1;
  if (rule == Rule::vcg) {
    out.alpha = CtrVector({Rational(1), 1 / top, 1 / (2 * top)});
    out.instance = SlotInstance::proportional(out.alpha, {top, top, eps});
    out.bids = {top, eps, eps};
  } else {
    const Rational delta = eps / (r + 2);
    out.alpha = CtrVector({Rational(1), (1 + delta) / top, 1 / top});
    out.instance = SlotInstance::proportional(out.alpha, {top, top, top});
    const Rational low = delta / (1 + delta) * top;
    out.bids = {top, low, low};
  }
  const auto mech = SlotMechanism::scalar(rule, out.alpha);
  const auto matrix = expand_scalar(out.bids, out.alpha);
  out.revenue = mech.run(matrix).revenue();
  out.truthful_revenue = vcg_revenue(out.instance);
  if (!is_nash(matrix, out.instance, mech).holds()) {
    throw Error(ErrorKind::construction_failed, "low-revenue profile is not Nash");
  }
  if (out.revenue > eps) throw Error(ErrorKind::construction_failed, "low-revenue profile exceeds eps");
  if (out.truthful_revenue < r) throw Error(ErrorKind::construction_failed, "truthful revenue is below r");
  return out;
}

/// The instance exactly as first written down for the VCG branch (all three
/// per-click values r+1). Kept to document that it is not an equilibrium.
inline SlotCertificate vcg_literal_profile_check(const Rational& r, const Rational& eps) {
  const Rational top = r + 1;
  const CtrVector alpha({Rational(1), 1 / top, 1 / (2 * top)});
  const auto inst = SlotInstance::proportional(alpha, {top, top, top});
  return is_nash(expand_scalar(std::vector<Rational>{top, eps, eps}, alpha), inst,
                 SlotMechanism::scalar(Rule::vcg, alpha));
}

struct BoundReport {
  Rational bound;
  Rational revenue;     // R(theta)
  Rational correction;  // sum_j (beta_j - beta_{j+1}) v_{j+1}
};

/// Lower bound on the revenue of efficient 1-GSP equilibria.
inline BoundReport thm2_bound(const SlotInstance& inst) {
  detail::require_sorted(inst);
  const auto& v = inst.per_click();
  const auto& beta = inst.beta();
  BoundReport rep;
  rep.revenue = vcg_revenue(inst);
  for (std::size_t j = 0; j < inst.slots(); ++j) {
    if (j + 1 < v.size()) rep.correction += (beta[j] - beta[j + 1]) * v[j + 1];
  }
  rep.bound = (rep.revenue - rep.correction) / 2;
  return rep;
}

struct LowRevenueProfile {
  BidMatrix bids;
  Rational delta;
  Rational revenue;
};

/// Efficient full-VCG equilibrium with revenue at most eps:
/// b_ii = beta_i v_i, b_ij = beta_i v_i + delta above the own slot and delta
/// below it. delta starts at eps and is halved until the replay verifies.
inline LowRevenueProfile thm3_low_revenue_profile(const SlotInstance& inst, const Rational& eps) {
  detail::require_sorted(inst);
  if (eps <= 0) throw Error(ErrorKind::invalid_input, "eps must be positive");
  const auto& v = inst.per_click();
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] == v[i - 1]) throw Error(ErrorKind::model, "values must be distinct");
  }
  const std::size_t n = inst.agents(), k = inst.slots();
  const auto& beta = inst.beta();
  const auto mech = SlotMechanism::full(Rule::vcg, k);
  Rational delta = eps;
  for (int round = 0; round <= 64; ++round, delta /= 2) {
    LowRevenueProfile p;
    p.delta = delta;
    p.bids.assign(n, Row(k, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) {
      const Rational own = beta[i] * v[i];
      for (std::size_t j = 0; j < k; ++j) {
        p.bids[i][j] = j == i ? own : j < i ? own + delta : delta;
      }
    }
    if (n == 1) p.bids[0] = inst.values(0);
    const auto r = mech.run(p.bids);
    p.revenue = r.revenue();
    if (p.revenue <= eps && is_efficient(r.assignment, inst) && is_nash(p.bids, inst, mech).holds()) return p;
  }
  throw Error(ErrorKind::construction_failed, "no verified delta after 64 halvings");
}

/// Linear strategies s_i(theta) = factor * v_i (per-click) in a scalar
/// mechanism, plus a tabulation over per-click type grids.
struct LinearFamily {
  Rule rule = Rule::gsp;
  BidMultiplier alpha;
  CtrVector beta;
  std::vector<Rational> factors;  // per agent

  SlotMechanism mechanism() const { return SlotMechanism::scalar(rule, alpha); }

  std::vector<std::vector<Row>> types(const std::vector<std::vector<Rational>>& per_click) const {
    std::vector<std::vector<Row>> out;
    for (const auto& list : per_click) {
      out.emplace_back();
      for (const auto& v : list) out.back().push_back(expand_scalar(v, BidMultiplier(beta)));
    }
    return out;
  }

  StrategyFamily tabulate(const std::vector<std::vector<Rational>>& per_click) const {
    if (per_click.size() != factors.size()) throw Error(ErrorKind::invalid_input, "type grid has wrong agent count");
    StrategyFamily s(factors.size());
    const auto mech = mechanism();
    for (std::size_t i = 0; i < per_click.size(); ++i) {
      for (const auto& v : per_click[i]) {
        s.set(i, expand_scalar(v, BidMultiplier(beta)), mech.message(factors[i] * v));
      }
    }
    return s;
  }

  Certificate<Row> check(const std::vector<std::vector<Rational>>& per_click) const {
    return expost_check(tabulate(per_click), types(per_click), mechanism());
  }
};

/// The two-agent efficient ex-post strategies: factor (b1-b2)/a1 for GSP and
/// (b1-b2)/(a1-a2) for VCG.
inline LinearFamily two_agent_expost_strategy(Rule rule, const CtrVector& alpha, const CtrVector& beta,
                                              std::size_t agents = 2) {
  if (agents != 2) throw Error(ErrorKind::model, "the two-agent strategy needs exactly two agents");
  if (alpha.slots() < 2 || beta.slots() != alpha.slots()) {
    throw Error(ErrorKind::model, "need at least two slots and matching CTR lengths");
  }
  const Rational factor =
      rule == Rule::gsp ? (beta[0] - beta[1]) / alpha[0] : (beta[0] - beta[1]) / (alpha[0] - alpha[1]);
  return LinearFamily{rule, BidMultiplier(alpha), beta, {factor, factor}};
}

}  // namespace mechsimp::slots
