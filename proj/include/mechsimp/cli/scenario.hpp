#pragma once

// Scenario and solution files. Numbers are exact: "p/q" strings or integer
// literals; floating-point literals are rejected with their location.

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "mechsimp/combinatorial.hpp"
#include "mechsimp/error.hpp"
#include "mechsimp/rational.hpp"
#include "mechsimp/sponsored.hpp"

namespace mechsimp::cli {

using json = nlohmann::ordered_json;

/// A JSON value with its location, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const { throw Error(ErrorKind::parse, path_ + ": " + what); }

  bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

  Node at(const char* key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) fail(std::string("missing field '") + key + "'");
    return {(*j_)[key], path_ + "." + key};
  }

  std::optional<Node> get(const char* key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  Node operator[](std::size_t i) const {
    if (!j_->is_array() || i >= j_->size()) fail("index " + std::to_string(i) + " out of range");
    return {(*j_)[i], path_ + "[" + std::to_string(i) + "]"};
  }

  std::string str() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  std::size_t count() const {
    if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<long long>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return j_->get<std::size_t>();
  }

  Rational rational() const {
    if (j_->is_number_float()) fail("floating-point literal; write rationals as \"p/q\" strings");
    if (j_->is_number_integer()) return Rational(j_->get<long long>());
    if (!j_->is_string()) fail("expected a rational");
    try {
      return parse_rational(j_->get<std::string>());
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  std::vector<Rational> rationals() const {
    std::vector<Rational> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].rational());
    return out;
  }

  std::vector<std::vector<Rational>> matrix() const {
    std::vector<std::vector<Rational>> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].rationals());
    return out;
  }

 private:
  const json* j_;
  std::string path_;
};

inline json load_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::parse, file + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, file + ": byte " + std::to_string(e.byte) + ": malformed JSON");
  }
}

// ------------------------------------------------------------------ slots

struct SlotGrid {
  std::vector<Rational> bids;   // message values per slot
  std::vector<Rational> types;  // per-click type values
};

struct SlotScenario {
  slots::SlotInstance instance = slots::SlotInstance::from_table({{Rational(0)}});
  slots::SlotMechanism mechanism;
  std::optional<std::vector<std::vector<Rational>>> type_grid;  // per agent, per-click
  std::optional<SlotGrid> grid;
};

inline slots::Rule parse_rule(const Node& n) {
  const auto s = n.str();
  if (s == "vcg") return slots::Rule::vcg;
  if (s == "gsp") return slots::Rule::gsp;
  n.fail("rule must be \"vcg\" or \"gsp\"");
}

template <class F>
auto model_guard(const Node& n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse) throw;
    n.fail(e.what());
  }
}

inline SlotScenario parse_slot_scenario(const Node& root) {
  SlotScenario s;
  s.instance = model_guard(root, [&] {
    if (root.has("table")) return slots::SlotInstance::from_table(root.at("table").matrix());
    return slots::SlotInstance::proportional(slots::CtrVector(root.at("beta").rationals()),
                                             root.at("values").rationals());
  });
  const std::size_t k = s.instance.slots();
  const auto m = root.at("mechanism");
  const auto rule = parse_rule(m.at("rule"));
  const auto space = m.get("space") ? m.at("space").str() : std::string("full");
  if (space == "full") {
    s.mechanism = slots::SlotMechanism::full(rule, k);
  } else if (space == "scalar") {
    const auto alpha = m.get("alpha") ? model_guard(m, [&] { return slots::BidMultiplier(m.at("alpha").rationals()); })
                                      : slots::BidMultiplier::ones(k);
    if (alpha.slots() != k) m.at("alpha").fail("length differs from the slot count");
    s.mechanism = slots::SlotMechanism::scalar(rule, alpha);
  } else {
    m.at("space").fail("space must be \"full\" or \"scalar\"");
  }
  if (const auto g = root.get("type_grid")) {
    s.type_grid = g->matrix();
    if (s.type_grid->size() != s.instance.agents()) g->fail("needs one list per agent");
    for (std::size_t i = 0; i < s.type_grid->size(); ++i) {
      if ((*s.type_grid)[i].empty()) (*g)[i].fail("empty type list");
    }
  }
  if (const auto g = root.get("grid")) s.grid = SlotGrid{g->at("bids").rationals(), g->at("types").rationals()};
  return s;
}

// ----------------------------------------------------------- combinatorial

enum class CaRule { vcg, sigma_vcg, n_vcg };

struct CaScenario {
  std::size_t items = 0;
  std::vector<ca::ValuationTable> types;
  CaRule rule = CaRule::vcg;
  std::optional<ca::BundleFamily> sigma;
  std::vector<Rational> grid_values;  // single-minded grid values
};

inline ca::BidTable parse_bid_table(const Node& n, std::size_t k) {
  if (!n.raw().is_object()) n.fail("expected an object of bundle: value pairs");
  ca::BidTable t(k);
  for (const auto& [key, value] : n.raw().items()) {
    const Node v(value, n.path() + "." + key);
    const auto b = model_guard(v, [&] { return ca::parse_bundle(key, k); });
    model_guard(v, [&] {
      t.set(b, v.rational());
      return 0;
    });
  }
  return t;
}

/// A type must already be monotone: completion may not raise any explicit entry.
inline ca::ValuationTable parse_type(const Node& n, std::size_t k) {
  const auto bids = parse_bid_table(n, k);
  const auto table = bids.completion();
  for (const auto& [b, v] : bids.entries()) {
    if (table(b) != v) n.fail("not monotone: " + ca::bundle_name(b) + " is below a contained bundle");
  }
  return table;
}

inline ca::BundleFamily parse_family(const Node& n, std::size_t k) {
  std::vector<ca::Bundle> sets{0};
  for (std::size_t i = 0; i < n.size(); ++i) {
    sets.push_back(model_guard(n[i], [&] { return ca::parse_bundle(n[i].str(), k); }));
  }
  return {k, sets};
}

inline CaScenario parse_ca_scenario(const Node& root) {
  CaScenario s;
  s.items = root.at("items").count();
  if (s.items == 0 || s.items > ca::max_items) root.at("items").fail("items must be in 1.." + std::to_string(ca::max_items));
  if (const auto t = root.get("types")) {
    for (std::size_t i = 0; i < t->size(); ++i) s.types.push_back(parse_type((*t)[i], s.items));
  }
  const auto mech = root.get("mechanism") ? root.at("mechanism").str() : std::string("vcg");
  if (mech == "vcg") {
    s.rule = CaRule::vcg;
  } else if (mech == "sigma-vcg") {
    s.rule = CaRule::sigma_vcg;
  } else if (mech == "n-vcg") {
    s.rule = CaRule::n_vcg;
  } else {
    root.at("mechanism").fail("mechanism must be \"vcg\", \"sigma-vcg\" or \"n-vcg\"");
  }
  if (const auto f = root.get("sigma")) s.sigma = parse_family(*f, s.items);
  if (s.rule == CaRule::sigma_vcg && !s.sigma) root.fail("sigma-vcg needs a 'sigma' family");
  if (const auto g = root.get("grid")) s.grid_values = g->at("values").rationals();
  return s;
}

// -------------------------------------------------------------- scenarios

using Scenario = std::variant<SlotScenario, CaScenario>;

inline Scenario parse_scenario(const json& j, const std::string& file) {
  const Node root(j, file);
  const auto kind = root.at("kind").str();
  if (kind == "slot") return parse_slot_scenario(root);
  if (kind == "combinatorial") return parse_ca_scenario(root);
  root.at("kind").fail("kind must be \"slot\" or \"combinatorial\"");
}

inline Scenario load_scenario(const std::string& file) { return parse_scenario(load_json(file), file); }

}  // namespace mechsimp::cli
