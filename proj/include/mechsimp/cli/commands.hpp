#pragma once

// The three verbs. Each returns a Report; usage problems raise Error with a
// parse, invalid_input or model kind, which the front end maps to exit 2.

#include <optional>
#include <string>
#include <vector>

#include "mechsimp/cli/report.hpp"
#include "mechsimp/cli/scenario.hpp"
#include "mechsimp/constructions.hpp"
#include "mechsimp/grids.hpp"
#include "mechsimp/parallel.hpp"
#include "mechsimp/worked.hpp"

namespace mechsimp::cli {

inline constexpr std::size_t profile_cap = 1'000'000;

// ---------------------------------------------------------------- helpers

inline json slot_assignment(const slots::Assignment& a) {
  json out = json::array();
  for (const auto s : a) out.push_back(s == slots::unassigned ? json(nullptr) : json(s + 1));
  return out;
}

inline json slot_result(const slots::SlotResult& r) {
  return {{"assignment", slot_assignment(r.assignment)}, {"payments", qs(r.payments)}, {"revenue", q(r.revenue())}};
}

inline json slot_deviation(const Deviation<slots::Row>& d) {
  return {{"agent", d.agent + 1}, {"message", qs(d.message)}, {"gain", q(d.gain)}};
}

inline json table_json(const ca::ValuationTable& t) {
  json out = json::object();
  for (ca::Bundle b = 1; b < t.values().size(); ++b) {
    if (t(b) != 0) out[ca::bundle_name(b)] = q(t(b));
  }
  return out;
}

inline json bids_json(const ca::BidTable& t) {
  json out = json::object();
  for (const auto& [b, v] : t.entries()) out[ca::bundle_name(b)] = q(v);
  return out;
}

inline json ca_allocation(const ca::Allocation& a) {
  json out = json::array();
  for (const auto b : a) out.push_back(ca::bundle_name(b));
  return out;
}

inline json ca_result(const ca::CaResult& r) {
  return {{"allocation", ca_allocation(r.allocation)}, {"payments", qs(r.payments)}, {"revenue", q(r.revenue())}};
}

inline json grid_witness(const GridWitness& w) {
  json out = {{"agent", w.agent + 1}, {"reason", w.reason}, {"gain", q(w.gain)}};
  json types = json::array(), profile = json::array();
  for (const auto t : w.types) types.push_back(t);
  for (const auto m : w.profile) profile.push_back(m);
  out["type_indices"] = types;
  out["message_indices"] = profile;
  if (w.deviation) out["deviation_index"] = *w.deviation;
  return out;
}

inline const slots::SlotInstance& app_c_instance() {
  static const auto inst = slots::SlotInstance::proportional(
      slots::CtrVector({Rational(1), Rational(9, 10), Rational(4, 5)}), {Rational(30), Rational(20), Rational(10)});
  return inst;
}

// --------------------------------------------------------------- reproduce

struct ReproduceOptions {
  std::optional<Rational> r, eps;
  std::size_t k = 4, m = 2;
};

inline const std::vector<std::string>& reproduce_ids() {
  static const std::vector<std::string> ids{"example1", "example2", "appendixC", "thm1-vcg", "thm1-gsp",
                                            "thm2-bound", "thm3", "prop4", "nvcg-demo", "zero-revenue"};
  return ids;
}

namespace repro {

inline Report example1() {
  Report rep{"reproduce example1"};
  const auto types = worked::example1_types();
  const auto fams = ca::enumerate_quasi_fields(3, 4);
  rep.body["quasi_fields"] = fams.size();
  json list = json::array();
  for (const auto& f : fams) {
    const auto msgs = worked::project_all(types, f);
    const auto r = ca::sigma_vcg(msgs, f);
    bool nash = true;
    for (std::size_t i = 0; i < types.size(); ++i) {
      nash = nash && ca::best_response_ca(i, msgs, types[i]).utility == ca::utility(types[i], r, i);
    }
    rep.verified = rep.verified && nash;
    json e = ca_result(r);
    e["sigma"] = f.to_string();
    e["projection_is_best_response"] = nash;
    list.push_back(e);
  }
  rep.body["families"] = list;
  rep.verified = rep.verified && fams.size() == 4;
  return rep;
}

inline Report example2() {
  Report rep{"reproduce example2"};
  const auto types = worked::example2_types();
  const auto expressive = ca::vcg_ca(types);
  const bool truthful_nash = ca::is_nash(types, types).holds();
  const auto sigma = worked::example2_family();
  const auto msgs = worked::project_all(types, sigma);
  const auto bundled = ca::sigma_vcg(msgs, sigma);
  bool bundled_nash = true;
  for (std::size_t i = 0; i < types.size(); ++i) {
    bundled_nash = bundled_nash && ca::best_response_sigma(i, msgs, types[i], sigma).utility ==
                                       ca::utility(types[i], bundled, i);
  }
  rep.body["expressive"] = ca_result(expressive);
  rep.body["expressive"]["nash"] = truthful_nash;
  rep.body["sigma"] = sigma.to_string();
  rep.body["bundled"] = ca_result(bundled);
  rep.body["bundled"]["nash"] = bundled_nash;
  rep.verified = truthful_nash && bundled_nash && bundled.revenue() < expressive.revenue();
  return rep;
}

inline Report appendix_c() {
  Report rep{"reproduce appendixC"};
  const auto c = slots::alpha_vcg_counterexample();
  rep.body["alpha"] = qs(c.alpha.entries());
  rep.body["beta"] = qs(c.beta.entries());
  rep.body["values"] = qs(c.values);
  rep.body["vcg_prices"] = qs(c.prices);
  rep.body["forced_b2"] = q(c.forced_b2);
  rep.body["forced_b3"] = q(c.forced_b3);
  rep.body["contradiction"] = c.contradiction;
  rep.body["grid_points"] = c.grid_points;
  rep.body["grid_matches"] = c.grid_matches;
  rep.verified = c.contradiction && c.grid_matches == 0;
  return rep;
}

inline Report thm1(slots::Rule rule, const ReproduceOptions& o) {
  Report rep{std::string("reproduce thm1-") + slots::to_string(rule)};
  const Rational r = o.r.value_or(1), eps = o.eps.value_or(Rational(1, 10));
  if (r <= 0 || eps <= 0) throw Error(ErrorKind::invalid_input, "r and eps must be positive");
  const auto g = slots::thm1_instance(rule, r, eps);
  const slots::BidMultiplier alpha(g.alpha);
  const auto mech = slots::SlotMechanism::scalar(rule, alpha);
  const auto bids = slots::expand_scalar(g.bids, alpha);
  const auto cert = slots::is_nash(bids, g.instance, mech);
  rep.body["r"] = q(r);
  rep.body["eps"] = q(eps);
  rep.body["alpha"] = qs(g.alpha.entries());
  rep.body["values"] = qm(g.instance.values());
  rep.body["scalar_bids"] = qs(g.bids);
  rep.body["equilibrium"] = slot_result(mech.run(bids));
  rep.body["nash"] = cert.holds();
  rep.body["regime"] = to_string(cert.regime);
  rep.body["truthful_vcg_revenue"] = q(g.truthful_revenue);
  rep.verified = cert.holds() && g.revenue <= eps && g.truthful_revenue >= r;
  if (cert.witness) rep.witness = slot_deviation(*cert.witness);
  return rep;
}

inline Report thm2_bound() {
  Report rep{"reproduce thm2-bound"};
  const auto& inst = app_c_instance();
  const auto b = slots::thm2_bound(inst);
  const auto ones = slots::BidMultiplier::ones(inst.slots());
  const auto bids = slots::vickrey_preserving_gsp_bids(inst, ones);
  const auto mech = slots::SlotMechanism::scalar(slots::Rule::gsp, ones);
  const auto matrix = slots::expand_scalar(bids, ones);
  const auto r = mech.run(matrix);
  const bool nash = slots::is_nash(matrix, inst, mech).holds();
  const bool efficient = slots::is_efficient(r.assignment, inst);
  rep.body["beta"] = qs(inst.beta().entries());
  rep.body["values"] = qs(inst.per_click());
  rep.body["vcg_revenue"] = q(b.revenue);
  rep.body["correction"] = q(b.correction);
  rep.body["bound"] = q(b.bound);
  rep.body["sample_equilibrium"] = slot_result(r);
  rep.body["sample_equilibrium"]["scalar_bids"] = qs(bids);
  rep.body["sample_equilibrium"]["nash"] = nash;
  rep.body["sample_equilibrium"]["efficient"] = efficient;
  rep.verified = nash && efficient && r.revenue() >= b.bound;
  return rep;
}

inline Report thm3(const ReproduceOptions& o) {
  Report rep{"reproduce thm3"};
  const auto& inst = app_c_instance();
  const Rational eps = o.eps.value_or(Rational(1, 100));
  if (eps <= 0) throw Error(ErrorKind::invalid_input, "eps must be positive");
  const auto p = slots::thm3_low_revenue_profile(inst, eps);
  const auto mech = slots::SlotMechanism::full(slots::Rule::vcg, inst.slots());
  const auto r = mech.run(p.bids);
  const bool nash = slots::is_nash(p.bids, inst, mech).holds();
  const bool efficient = slots::is_efficient(r.assignment, inst);
  rep.body["eps"] = q(eps);
  rep.body["delta"] = q(p.delta);
  rep.body["bids"] = qm(p.bids);
  rep.body["outcome"] = slot_result(r);
  rep.body["nash"] = nash;
  rep.body["efficient"] = efficient;
  rep.body["truthful_vcg_revenue"] = q(slots::vcg_revenue(inst));
  rep.verified = nash && efficient && r.revenue() <= eps;
  return rep;
}

inline Report prop4(const ReproduceOptions& o) {
  Report rep{"reproduce prop4"};
  const auto w = ca::welfare_ratio_instance(o.k, o.m);
  json blocks = json::array(), shifted = json::array();
  for (const auto b : w.blocks) blocks.push_back(ca::bundle_name(b));
  for (const auto b : w.shifted) shifted.push_back(ca::bundle_name(b));
  rep.body["k"] = o.k;
  rep.body["m"] = o.m;
  rep.body["blocks"] = blocks;
  rep.body["shifted_blocks"] = shifted;
  rep.body["welfare"] = q(w.welfare);
  rep.body["welfare_shifted"] = q(w.welfare_shifted);
  rep.body["ratio"] = q(w.welfare / w.welfare_shifted);
  rep.body["bound"] = q(w.bound);
  rep.verified = w.welfare / w.welfare_shifted >= w.bound;
  return rep;
}

inline Report nvcg_demo() {
  Report rep{"reproduce nvcg-demo"};
  std::vector<ca::BidTable> bids;
  for (const auto& t : worked::example2_types()) bids.push_back(ca::BidTable::from(t));
  const auto red = ca::n_vcg_reduce(bids);
  const auto before = ca::vcg_ca(bids), after = ca::vcg_ca(red);
  json reduced = json::array(), counts = json::array();
  bool members = true;
  for (std::size_t i = 0; i < red.size(); ++i) {
    reduced.push_back(bids_json(red[i]));
    counts.push_back({{"before", bids[i].nonzeros()}, {"after", red[i].nonzeros()}});
    members = members && ca::n_vcg_membership(red[i], bids.size());
  }
  rep.body["reduced_bids"] = reduced;
  rep.body["nonzero_bids"] = counts;
  rep.body["outcome"] = ca_result(after);
  rep.body["outcome_preserved"] = before == after;
  rep.verified = before == after && members;
  return rep;
}

inline Report zero_revenue() {
  Report rep{"reproduce zero-revenue"};
  const auto inst = slots::SlotInstance::proportional(
      slots::CtrVector({Rational(1), Rational(1, 2), Rational(1, 4)}), {Rational(3), Rational(2), Rational(1)});
  const auto bids = slots::zero_revenue_profile(inst);
  rep.body["beta"] = qs(inst.beta().entries());
  rep.body["values"] = qs(inst.per_click());
  rep.body["bids"] = qm(bids);
  for (const auto rule : {slots::Rule::vcg, slots::Rule::gsp}) {
    const auto mech = slots::SlotMechanism::full(rule, inst.slots());
    const auto cert = slots::is_nash(bids, inst, mech);
    json e = slot_result(mech.run(bids));
    e["nash"] = cert.holds();
    rep.body[std::string("full_") + slots::to_string(rule)] = e;
    rep.verified = rep.verified && cert.holds() && mech.run(bids).revenue() == 0;
  }
  return rep;
}

}  // namespace repro

inline Report reproduce(const std::string& id, const ReproduceOptions& o) {
  try {
    if (id == "example1") return repro::example1();
    if (id == "example2") return repro::example2();
    if (id == "appendixC") return repro::appendix_c();
    if (id == "thm1-vcg") return repro::thm1(slots::Rule::vcg, o);
    if (id == "thm1-gsp") return repro::thm1(slots::Rule::gsp, o);
    if (id == "thm2-bound") return repro::thm2_bound();
    if (id == "thm3") return repro::thm3(o);
    if (id == "prop4") return repro::prop4(o);
    if (id == "nvcg-demo") return repro::nvcg_demo();
    if (id == "zero-revenue") return repro::zero_revenue();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::construction_failed && e.kind() != ErrorKind::condition_violated) throw;
    Report rep{"reproduce " + id, false};
    rep.witness = {{"error", e.what()}};
    return rep;
  }
  throw Error(ErrorKind::invalid_input, "unknown reproduce id '" + id + "'");
}

// ------------------------------------------------------------------- check

inline const std::vector<std::string>& concepts() {
  static const std::vector<std::string> c{"nash", "expost", "efficient", "envy-free", "tight", "outcome-closure"};
  return c;
}

namespace checks {

inline slots::BidMatrix slot_bids(const SlotScenario& s, const Node& sol) {
  if (sol.has("scalar_bids")) {
    if (!s.mechanism.is_scalar()) sol.at("scalar_bids").fail("scalar bids need a scalar mechanism");
    return slots::expand_scalar(sol.at("scalar_bids").rationals(), *s.mechanism.multiplier);
  }
  auto bids = sol.at("bids").matrix();
  if (bids.size() != s.instance.agents()) sol.at("bids").fail("needs one row per agent");
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (!s.mechanism.admits(bids[i])) sol.at("bids")[i].fail(s.mechanism.name() + " does not admit this row");
  }
  return bids;
}

inline slots::Assignment slot_assignment_of(const SlotScenario& s, const Node& sol, std::vector<Rational>* payments) {
  if (sol.has("bids") || sol.has("scalar_bids")) {
    const auto r = s.mechanism.run(slot_bids(s, sol));
    if (payments) *payments = r.payments;
    return r.assignment;
  }
  const auto a = sol.at("assignment");
  slots::Assignment out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].raw().is_null()) {
      out.push_back(slots::unassigned);
      continue;
    }
    const auto slot = a[i].count();
    if (slot == 0 || slot > s.instance.slots()) a[i].fail("slot out of range (slots are 1-based)");
    out.push_back(slot - 1);
  }
  if (out.size() != s.instance.agents()) a.fail("needs one entry per agent");
  if (payments) {
    *payments = sol.at("payments").rationals();
    if (payments->size() != out.size()) sol.at("payments").fail("needs one entry per agent");
  }
  return out;
}

inline Report slot_nash(const SlotScenario& s, const Node& sol) {
  Report rep{"check nash"};
  const auto bids = slot_bids(s, sol);
  const auto cert = slots::is_nash(bids, s.instance, s.mechanism);
  rep.body["mechanism"] = s.mechanism.name();
  rep.body["outcome"] = slot_result(s.mechanism.run(bids));
  rep.body["certificate"] = to_string(cert.verdict);
  rep.body["regime"] = to_string(cert.regime);
  rep.verified = cert.holds();
  if (cert.witness) rep.witness = slot_deviation(*cert.witness);
  return rep;
}

inline Report slot_efficient(const SlotScenario& s, const Node& sol) {
  Report rep{"check efficient"};
  const auto a = slot_assignment_of(s, sol, nullptr);
  rep.body["assignment"] = slot_assignment(a);
  rep.body["welfare"] = q(slots::welfare_of(s.instance.values(), a));
  rep.body["max_welfare"] = q(slots::max_welfare(s.instance.values()));
  rep.verified = slots::welfare_of(s.instance.values(), a) == slots::max_welfare(s.instance.values());
  if (!rep.verified && s.instance.is_proportional()) {
    // Name a pair in the wrong order.
    const auto& v = s.instance.per_click();
    for (std::size_t i = 0; i < a.size() && rep.witness.is_null(); ++i) {
      for (std::size_t j = 0; j < a.size(); ++j) {
        const bool i_higher = a[i] != slots::unassigned && (a[j] == slots::unassigned || a[i] < a[j]);
        if (i_higher && v[j] > v[i]) {
          rep.witness = {{"swapped", {i + 1, j + 1}}};
          break;
        }
      }
    }
  }
  return rep;
}

inline Report slot_envy_free(const SlotScenario& s, const Node& sol) {
  Report rep{"check envy-free"};
  std::vector<Rational> payments;
  const auto a = slot_assignment_of(s, sol, &payments);
  rep.body["assignment"] = slot_assignment(a);
  rep.body["payments"] = qs(payments);
  rep.verified = slots::is_locally_envy_free(a, payments, s.instance);
  return rep;
}

inline Report slot_expost(const SlotScenario& s, const Node& sol) {
  Report rep{"check expost"};
  if (!s.type_grid) throw Error(ErrorKind::parse, "expost needs a 'type_grid' in the scenario");
  const auto& beta = s.instance.beta();
  const auto strat = sol.at("strategy");
  const auto kind = strat.at("kind").str();
  std::vector<std::vector<slots::Row>> types;
  for (const auto& list : *s.type_grid) {
    types.emplace_back();
    for (const auto& v : list) types.back().push_back(slots::expand_scalar(v, slots::BidMultiplier(beta)));
  }
  slots::StrategyFamily fam(types.size());
  if (kind == "truthful") {
    for (std::size_t i = 0; i < types.size(); ++i) {
      for (const auto& t : types[i]) fam.set(i, t, t);
    }
  } else if (kind == "linear") {
    if (!s.mechanism.is_scalar()) strat.fail("linear strategies need a scalar mechanism");
    const auto factors = strat.at("factors").rationals();
    if (factors.size() != types.size()) strat.at("factors").fail("needs one factor per agent");
    fam = slots::LinearFamily{s.mechanism.rule, *s.mechanism.multiplier, beta, factors}.tabulate(*s.type_grid);
  } else if (kind == "two-agent") {
    if (!s.mechanism.is_scalar()) strat.fail("the two-agent strategy needs a scalar mechanism");
    fam = model_guard(strat, [&] {
      return slots::two_agent_expost_strategy(s.mechanism.rule, slots::CtrVector(s.mechanism.multiplier->entries()),
                                              beta, types.size())
          .tabulate(*s.type_grid);
    });
  } else {
    strat.at("kind").fail("strategy kind must be \"truthful\", \"linear\" or \"two-agent\"");
  }
  const auto cert = slots::expost_check(fam, types, s.mechanism);
  rep.body["mechanism"] = s.mechanism.name();
  rep.body["strategy"] = kind;
  rep.body["type_grid"] = json::array();
  for (const auto& list : *s.type_grid) rep.body["type_grid"].push_back(qs(list));
  rep.body["certificate"] = to_string(cert.verdict);
  rep.body["regime"] = to_string(cert.regime);
  rep.verified = cert.holds();
  if (cert.witness) {
    rep.witness = slot_deviation(*cert.witness);
    rep.witness["types"] = qm(cert.type_profile);
  }
  return rep;
}

inline std::size_t capped_profiles(std::size_t per_agent, std::size_t agents) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < agents; ++i) {
    if (per_agent != 0 && total > profile_cap / per_agent) {
      throw Error(ErrorKind::invalid_input, "cap exceeded: at most " + std::to_string(profile_cap) + " message profiles");
    }
    total *= per_agent;
  }
  return total;
}

template <class M, class O, class T>
Report grid_check(const std::string& what, const Mechanism<M, O>& original, const Mechanism<M, O>& candidate,
                  const FiniteGrid<M, T>& grid, const Valuation<T, O>& val) {
  Report rep{"check " + what};
  capped_profiles(grid.messages.empty() ? 0 : grid.messages[0].size(), grid.agents());
  const auto r = what == "tight" ? tightness_check(original, candidate, grid, val)
                                    : outcome_closure_check(original, candidate, grid, val);
  rep.body["original"] = original.name;
  rep.body["candidate"] = candidate.name;
  rep.body["agents"] = grid.agents();
  rep.body["messages_per_agent"] = grid.messages.empty() ? 0 : grid.messages[0].size();
  rep.body["types_per_agent"] = grid.types.empty() ? 0 : grid.types[0].size();
  rep.body["regime"] = "grid-relative";
  rep.verified = r.holds;
  if (r.witness) rep.witness = grid_witness(*r.witness);
  return rep;
}

inline Report slot_grid(const SlotScenario& s, const std::string& what) {
  if (!s.grid) throw Error(ErrorKind::parse, what + " needs a 'grid' in the scenario");
  const std::size_t k = s.instance.slots();
  FiniteGrid<slots::Row, slots::Row> grid;
  auto messages = grids::all_rows(s.grid->bids, k);
  if (s.mechanism.is_scalar()) {
    for (const auto& r : grids::scalar_rows(s.grid->bids, *s.mechanism.multiplier)) grids::append_unique(messages, r);
  }
  grid.messages.assign(s.instance.agents(), messages);
  grid.types.assign(s.instance.agents(), grids::scalar_rows(s.grid->types, slots::BidMultiplier(s.instance.beta())));
  const auto original = slots::SlotMechanism::full(s.mechanism.rule, k).handle();
  return grid_check(what, original, s.mechanism.handle(), grid, grids::slot_valuation());
}

// Combinatorial checks.

inline std::vector<ca::ValuationTable> ca_bids(const CaScenario& s, const Node& sol) {
  const auto b = sol.at("bids");
  if (b.size() != s.types.size()) b.fail("needs one table per agent");
  std::vector<ca::ValuationTable> out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto t = parse_bid_table(b[i], s.items);
    if (s.rule == CaRule::n_vcg && !ca::n_vcg_membership(t, s.types.size())) b[i].fail("more nonzero bids than agents");
    out.push_back(t.completion());
    if (s.rule == CaRule::sigma_vcg && ca::sigma_violation(out.back(), *s.sigma)) b[i].fail("not a Sigma-message");
  }
  return out;
}

inline ca::CaResult ca_run(const CaScenario& s, const std::vector<ca::ValuationTable>& bids) {
  return s.rule == CaRule::sigma_vcg ? ca::sigma_vcg(bids, *s.sigma) : ca::vcg_ca(bids);
}

inline BestResponse<ca::BidTable> ca_best_response(const CaScenario& s, std::size_t i,
                                                   const std::vector<ca::ValuationTable>& bids,
                                                   const ca::ValuationTable& type) {
  return s.rule == CaRule::sigma_vcg ? ca::best_response_sigma(i, bids, type, *s.sigma)
                                     : ca::best_response_ca(i, bids, type);
}

inline std::string ca_name(const CaScenario& s) {
  switch (s.rule) {
    case CaRule::vcg: return "VCG";
    case CaRule::sigma_vcg: return "Sigma-VCG " + s.sigma->to_string();
    case CaRule::n_vcg: return std::to_string(s.types.size()) + "-VCG";
  }
  return "";
}

inline Report ca_nash(const CaScenario& s, const Node& sol) {
  Report rep{"check nash"};
  const auto bids = ca_bids(s, sol);
  const auto r = ca_run(s, bids);
  rep.body["mechanism"] = ca_name(s);
  rep.body["outcome"] = ca_result(r);
  rep.body["regime"] = "continuum-exact";
  for (std::size_t i = 0; i < bids.size() && rep.verified; ++i) {
    const auto br = ca_best_response(s, i, bids, s.types[i]);
    const Rational gain = br.utility - ca::utility(s.types[i], r, i);
    if (gain > 0) {
      rep.verified = false;
      rep.witness = {{"agent", i + 1}, {"message", bids_json(br.message)}, {"gain", q(gain)}};
    }
  }
  rep.body["certificate"] = rep.verified ? "equilibrium" : "refuted";
  return rep;
}

inline Report ca_efficient(const CaScenario& s, const Node& sol) {
  Report rep{"check efficient"};
  ca::Allocation a;
  if (sol.has("bids")) {
    a = ca_run(s, ca_bids(s, sol)).allocation;
  } else {
    const auto n = sol.at("allocation");
    ca::Bundle used = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const auto b = model_guard(n[i], [&] { return ca::parse_bundle(n[i].str(), s.items); });
      if (b & used) n[i].fail("bundles overlap");
      used |= b;
      a.push_back(b);
    }
    if (a.size() != s.types.size()) n.fail("needs one bundle per agent");
  }
  const Rational w = ca::welfare_of(s.types, a), best = ca::max_welfare(s.types);
  rep.body["allocation"] = ca_allocation(a);
  rep.body["welfare"] = q(w);
  rep.body["max_welfare"] = q(best);
  rep.verified = w == best;
  if (!rep.verified) rep.witness = {{"efficient_allocation", ca_allocation(ca::winner_determination(s.types))}};
  return rep;
}

inline Report ca_expost(const CaScenario& s, const Node& sol) {
  Report rep{"check expost"};
  if (s.grid_values.empty()) throw Error(ErrorKind::parse, "expost needs 'grid.values' in the scenario");
  const auto kind = sol.at("strategy").at("kind").str();
  if (kind != "truthful" && kind != "projection") sol.at("strategy").at("kind").fail("must be truthful or projection");
  if (kind == "projection" && !s.sigma) throw Error(ErrorKind::parse, "projection needs a 'sigma' family");
  const auto types = grids::single_minded_types(s.items, s.grid_values);
  const std::size_t n = std::max<std::size_t>(s.types.size(), 2);
  const std::size_t total = capped_profiles(types.size(), n);
  auto profile_at = [&](std::size_t f) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = n; i-- > 0;) {
      idx[i] = f % types.size();
      f /= types.size();
    }
    return idx;
  };
  auto strategy = [&](const ca::ValuationTable& t) { return kind == "truthful" ? t : ca::project(t, *s.sigma); };
  auto deviation = [&](std::size_t f) -> std::optional<json> {
    const auto idx = profile_at(f);
    std::vector<ca::ValuationTable> msgs;
    for (const auto i : idx) msgs.push_back(strategy(types[i]));
    if (s.rule == CaRule::sigma_vcg) {
      for (const auto& m : msgs) {
        if (ca::sigma_violation(m, *s.sigma)) throw Error(ErrorKind::invalid_input, "strategy leaves Sigma");
      }
    }
    const auto r = ca_run(s, msgs);
    for (std::size_t a = 0; a < n; ++a) {
      const auto br = ca_best_response(s, a, msgs, types[idx[a]]);
      const Rational gain = br.utility - ca::utility(types[idx[a]], r, a);
      if (gain > 0) {
        json tj = json::array();
        for (const auto i : idx) tj.push_back(table_json(types[i]));
        return json{{"agent", a + 1}, {"message", bids_json(br.message)}, {"gain", q(gain)}, {"types", tj}};
      }
    }
    return std::nullopt;
  };
  const auto first = parallel_find_first(total, [&](std::size_t f) { return deviation(f).has_value(); });
  rep.body["mechanism"] = ca_name(s);
  rep.body["strategy"] = kind;
  rep.body["agents"] = n;
  rep.body["type_grid_size"] = types.size();
  rep.body["regime"] = "grid-relative";
  rep.verified = !first.has_value();
  rep.body["certificate"] = rep.verified ? "equilibrium" : "refuted";
  if (first) rep.witness = *deviation(*first);
  return rep;
}

inline Report ca_grid(const CaScenario& s, const std::string& what) {
  if (s.grid_values.empty()) throw Error(ErrorKind::parse, what + " needs 'grid.values' in the scenario");
  const std::size_t n = std::max<std::size_t>(s.types.size(), 2);
  if (s.rule == CaRule::sigma_vcg) {
    const auto sc = grids::sigma_vcg_scenario(*s.sigma, n, s.grid_values);
    return grid_check(what, sc.original, sc.candidate, sc.grid, ca::valuation());
  }
  if (s.rule == CaRule::n_vcg) {
    FiniteGrid<ca::BidTable, ca::ValuationTable> grid;
    const auto messages = grids::bid_tables(s.items, s.grid_values);
    capped_profiles(messages.size(), n);
    grid.messages.assign(n, messages);
    grid.types.assign(n, grids::monotone_tables(s.items, s.grid_values));
    return grid_check(what, ca::vcg_handle(), ca::n_vcg_handle(n), grid, ca::valuation());
  }
  throw Error(ErrorKind::invalid_input, what + " needs a restricted mechanism (sigma-vcg or n-vcg)");
}

}  // namespace checks

inline Report check(const std::string& what, const Scenario& scenario, const std::optional<json>& solution,
                    const std::string& solution_file) {
  static const json empty = json::object();
  const Node sol(solution ? *solution : empty, solution_file.empty() ? "solution" : solution_file);
  const bool needs_solution = what == "nash" || what == "efficient" || what == "envy-free" ||
                              what == "expost";
  if (needs_solution && !solution) throw Error(ErrorKind::invalid_input, what + " needs a solution file");
  if (const auto* s = std::get_if<SlotScenario>(&scenario)) {
    if (what == "nash") return checks::slot_nash(*s, sol);
    if (what == "efficient") return checks::slot_efficient(*s, sol);
    if (what == "envy-free") return checks::slot_envy_free(*s, sol);
    if (what == "expost") return checks::slot_expost(*s, sol);
    if (what == "tight" || what == "outcome-closure") return checks::slot_grid(*s, what);
  } else {
    const auto& c = std::get<CaScenario>(scenario);
    if (c.types.empty() && (what == "nash" || what == "efficient")) {
      throw Error(ErrorKind::parse, what + " needs 'types' in the scenario");
    }
    if (what == "nash") return checks::ca_nash(c, sol);
    if (what == "efficient") return checks::ca_efficient(c, sol);
    if (what == "expost") return checks::ca_expost(c, sol);
    if (what == "tight" || what == "outcome-closure") return checks::ca_grid(c, what);
    if (what == "envy-free") throw Error(ErrorKind::invalid_input, "envy-free applies to slot scenarios only");
  }
  throw Error(ErrorKind::invalid_input, "unknown what '" + what + "'");
}

// --------------------------------------------------------------- enumerate

struct EnumerateOptions {
  std::optional<std::size_t> max_size;
  Rational grid_step = Rational(1, 4);
  std::optional<Rational> max_bid;
};

inline Report enumerate_quasi_fields(const Scenario& scenario, const EnumerateOptions& o) {
  const auto* c = std::get_if<CaScenario>(&scenario);
  if (!c) throw Error(ErrorKind::invalid_input, "quasi-fields need a combinatorial scenario");
  if (c->items > 5) throw Error(ErrorKind::invalid_input, "cap exceeded: quasi-field enumeration allows at most 5 items");
  Report rep{"enumerate quasi-fields"};
  const std::size_t max_size = o.max_size.value_or(std::size_t{1} << c->items);
  const auto fams = ca::enumerate_quasi_fields(c->items, max_size);
  rep.body["items"] = c->items;
  rep.body["max_size"] = max_size;
  rep.body["count"] = fams.size();
  json list = json::array();
  for (const auto& f : fams) list.push_back(f.to_string());
  rep.body["families"] = list;
  return rep;
}

inline Report enumerate_equilibria(const Scenario& scenario, const EnumerateOptions& o) {
  const auto* s = std::get_if<SlotScenario>(&scenario);
  if (!s) throw Error(ErrorKind::invalid_input, "equilibria need a slot scenario");
  if (o.grid_step <= 0) throw Error(ErrorKind::invalid_input, "grid step must be positive");
  Rational top = 0;
  for (const auto& row : s->instance.values()) {
    for (const auto& v : row) top = std::max(top, v);
  }
  const Rational max_bid = o.max_bid.value_or(top);
  if (max_bid < 0) throw Error(ErrorKind::invalid_input, "max bid must be non-negative");
  std::vector<Rational> steps;
  for (Rational b = 0; b <= max_bid; b += o.grid_step) {
    steps.push_back(b);
    if (steps.size() > profile_cap) throw Error(ErrorKind::invalid_input, "cap exceeded: too many grid points");
  }
  const std::size_t n = s->instance.agents(), k = s->instance.slots();
  const auto rows = s->mechanism.is_scalar() ? grids::scalar_rows(steps, *s->mechanism.multiplier)
                                             : grids::all_rows(steps, k);
  const std::size_t total = checks::capped_profiles(rows.size(), n);
  auto profile_at = [&](std::size_t f) {
    slots::BidMatrix bids(n);
    for (std::size_t i = n; i-- > 0;) {
      bids[i] = rows[f % rows.size()];
      f /= rows.size();
    }
    return bids;
  };
  std::vector<char> nash(total, 0);
  parallel_for(total, [&](std::size_t f) {
    nash[f] = slots::is_nash(profile_at(f), s->instance, s->mechanism).holds() ? 1 : 0;
  });
  const bool bounded = s->mechanism.is_scalar() && s->mechanism.multiplier->is_ones() &&
                       s->mechanism.rule == slots::Rule::gsp && s->instance.is_proportional() &&
                       s->instance.is_sorted();
  std::optional<Rational> bound;
  if (bounded) bound = slots::thm2_bound(s->instance).bound;
  Report rep{"enumerate equilibria"};
  json list = json::array();
  std::size_t efficient = 0;
  for (std::size_t f = 0; f < total; ++f) {
    if (!nash[f]) continue;
    const auto bids = profile_at(f);
    const auto r = s->mechanism.run(bids);
    json e;
    const json outcome = slot_result(r);
    if (s->mechanism.is_scalar()) {
      std::vector<Rational> scalars;
      for (const auto& row : bids) scalars.push_back(row[0]);
      e["scalar_bids"] = qs(scalars);
    } else {
      e["bids"] = qm(bids);
    }
    for (const auto& [key, v] : outcome.items()) e[key] = v;
    const bool eff = slots::is_efficient(r.assignment, s->instance);
    e["efficient"] = eff;
    efficient += eff;
    if (bound && eff && r.revenue() < *bound) {
      rep.verified = false;
      if (rep.witness.is_null()) rep.witness = e;
    }
    list.push_back(e);
  }
  rep.body["mechanism"] = s->mechanism.name();
  rep.body["grid_step"] = q(o.grid_step);
  rep.body["max_bid"] = q(max_bid);
  rep.body["profiles"] = total;
  rep.body["regime"] = "grid-seeded, continuum-verified";
  rep.body["count"] = list.size();
  rep.body["efficient"] = efficient;
  if (bound) rep.body["revenue_bound"] = q(*bound);
  rep.body["equilibria"] = list;
  return rep;
}

inline Report enumerate(const std::string& what, const Scenario& scenario, const EnumerateOptions& o) {
  if (what == "quasi-fields") return enumerate_quasi_fields(scenario, o);
  if (what == "equilibria") return enumerate_equilibria(scenario, o);
  throw Error(ErrorKind::invalid_input, "unknown enumeration target '" + what + "'");
}

}  // namespace mechsimp::cli
