#pragma once

// Shipped finite-grid scenarios for the generic simplification checks, and
// the grid builders behind them.

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mechsimp/combinatorial.hpp"
#include "mechsimp/mechanism.hpp"
#include "mechsimp/sponsored.hpp"

namespace mechsimp::grids {

using slots::Assignment;
using slots::Row;

inline Valuation<Row, Assignment> slot_valuation() {
  return [](std::size_t i, const Row& type, const Assignment& a) { return slots::value_of(type, a.at(i)); };
}

/// Every row with entries from `values` (k entries), in lexicographic order.
inline std::vector<Row> all_rows(const std::vector<Rational>& values, std::size_t k) {
  std::vector<Row> out{Row{}};
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<Row> next;
    for (const auto& r : out) {
      for (const auto& v : values) {
        next.push_back(r);
        next.back().push_back(v);
      }
    }
    out = std::move(next);
  }
  return out;
}

inline std::vector<Row> scalar_rows(const std::vector<Rational>& bids, const slots::BidMultiplier& m) {
  std::vector<Row> out;
  for (const auto& b : bids) out.push_back(slots::expand_scalar(b, m));
  return out;
}

inline std::vector<Rational> integers(int lo, int hi) {
  std::vector<Rational> out;
  for (int v = lo; v <= hi; ++v) out.emplace_back(v);
  return out;
}

/// Zero type plus, for every nonempty bundle S and value w, the single-minded
/// type worth w on supersets of S.
inline std::vector<ca::ValuationTable> single_minded_types(std::size_t k, const std::vector<Rational>& values) {
  std::vector<ca::ValuationTable> out{ca::ValuationTable::zero(k)};
  for (const auto& w : values) {
    for (ca::Bundle s = 1; s <= ca::grand(k); ++s) {
      out.push_back(ca::ValuationTable::from(k, [&](ca::Bundle x) { return ca::subset(s, x) ? w : Rational(0); }));
    }
  }
  return out;
}

/// Every monotone table over k items with values in `values` (sorted ascending).
inline std::vector<ca::ValuationTable> monotone_tables(std::size_t k, const std::vector<Rational>& values) {
  std::vector<ca::ValuationTable> out;
  const std::size_t size = std::size_t{1} << k;
  std::vector<Rational> v(size, Rational(0));
  std::function<void(ca::Bundle)> rec = [&](ca::Bundle b) {
    if (b == size) {
      out.emplace_back(k, v);
      return;
    }
    for (const auto& x : values) {
      bool ok = true;
      for (std::size_t g = 0; g < k && ok; ++g) {
        if ((b >> g & 1u) && v[b & ~(ca::Bundle{1} << g)] > x) ok = false;
      }
      if (!ok) continue;
      v[b] = x;
      rec(b + 1);
    }
    v[b] = 0;
  };
  rec(1);
  return out;
}

/// Every explicit bid table with entries from `values` on the nonempty bundles.
inline std::vector<ca::BidTable> bid_tables(std::size_t k, const std::vector<Rational>& values) {
  std::vector<ca::BidTable> out{ca::BidTable(k)};
  for (ca::Bundle b = 1; b <= ca::grand(k); ++b) {
    std::vector<ca::BidTable> next;
    for (const auto& t : out) {
      for (const auto& v : values) {
        next.push_back(t);
        next.back().set(b, v);
      }
    }
    out = std::move(next);
  }
  return out;
}

template <class T>
void append_unique(std::vector<T>& list, const T& item) {
  if (std::find(list.begin(), list.end(), item) == list.end()) list.push_back(item);
}

/// Messages = the types plus their Sigma-projections (as bid tables).
inline std::vector<ca::BidTable> types_and_projections(const std::vector<ca::ValuationTable>& types,
                                                       const ca::BundleFamily& sigma) {
  std::vector<ca::BidTable> out;
  for (const auto& t : types) append_unique(out, ca::BidTable::from(t));
  for (const auto& t : types) append_unique(out, ca::BidTable::from(ca::project(t, sigma)));
  return out;
}

struct SlotScenario {
  std::string name;
  Mechanism<Row, Assignment> original, candidate;
  FiniteGrid<Row, Row> grid;
};

struct CaScenario {
  std::string name;
  Mechanism<ca::BidTable, ca::Allocation> original, candidate;
  FiniteGrid<ca::BidTable, ca::ValuationTable> grid;
  std::optional<std::function<std::vector<ca::BidTable>(const std::vector<ca::BidTable>&)>> reduce;
};

/// alpha-GSP inside full GSP: two agents, two slots, alpha = (1, 1/2).
inline SlotScenario alpha_gsp_scenario() {
  const slots::BidMultiplier alpha(slots::CtrVector({Rational(1), Rational(1, 2)}));
  SlotScenario s{"alpha-GSP in full GSP", slots::SlotMechanism::full(slots::Rule::gsp, 2).handle(),
                 slots::SlotMechanism::scalar(slots::Rule::gsp, alpha).handle(), {}};
  auto messages = all_rows(integers(0, 2), 2);
  for (const auto& r : scalar_rows(integers(0, 3), alpha)) append_unique(messages, r);
  const auto types = scalar_rows(integers(0, 3), alpha);
  s.grid.messages.assign(2, messages);
  s.grid.types.assign(2, types);
  return s;
}

/// alpha-VCG inside full VCG: three agents, two slots, alpha = (1, 1/2).
inline SlotScenario alpha_vcg_scenario() {
  const slots::BidMultiplier alpha(slots::CtrVector({Rational(1), Rational(1, 2)}));
  SlotScenario s{"alpha-VCG in full VCG", slots::SlotMechanism::full(slots::Rule::vcg, 2).handle(),
                 slots::SlotMechanism::scalar(slots::Rule::vcg, alpha).handle(), {}};
  auto messages = all_rows(integers(0, 2), 2);
  for (const auto& r : scalar_rows(integers(0, 3), alpha)) append_unique(messages, r);
  const auto types = scalar_rows(integers(0, 3), alpha);
  s.grid.messages.assign(3, messages);
  s.grid.types.assign(3, types);
  return s;
}

/// Sigma-VCG inside VCG over k items with n agents; types are single-minded
/// with the given values, messages are the types and their projections.
inline CaScenario sigma_vcg_scenario(const ca::BundleFamily& sigma, std::size_t agents,
                                     const std::vector<Rational>& values) {
  CaScenario s{"Sigma-VCG " + sigma.to_string() + " in VCG", ca::vcg_handle(), ca::sigma_vcg_handle(sigma), {}, {}};
  const auto types = single_minded_types(sigma.k, values);
  s.grid.messages.assign(agents, types_and_projections(types, sigma));
  s.grid.types.assign(agents, types);
  return s;
}

/// n-VCG inside VCG: two agents, two items, explicit bids in {0,1,2,3} on
/// every bundle, monotone types over {0,1,2}; reduction by marking.
inline CaScenario n_vcg_scenario() {
  CaScenario s{"2-VCG in VCG", ca::vcg_handle(), ca::n_vcg_handle(2), {}, ca::n_vcg_reduce};
  s.grid.messages.assign(2, bid_tables(2, integers(0, 3)));
  s.grid.types.assign(2, monotone_tables(2, integers(0, 2)));
  return s;
}

/// The first example's quasi-field over three items, {{}, A, BC, ABC}.
inline ca::BundleFamily example_quasi_field() { return ca::BundleFamily(3, {0, 1, 6, 7}); }

}  // namespace mechsimp::grids
