#pragma once

// Data for the two bundling examples.

#include <vector>

#include "mechsimp/combinatorial.hpp"

namespace mechsimp::worked {

using ca::Bundle;
using ca::ValuationTable;

inline constexpr Bundle A = 1, B = 2, C = 4, D = 8;

/// Three agents, items {A, B, C}.
inline std::vector<ValuationTable> example1_types() {
  return {
      ValuationTable::from(3, [](Bundle x) { return ca::subset(A | C, x) ? 4 : (x & A) ? 3 : 1; }),
      ValuationTable::from(3, [](Bundle x) { return ca::subset(A | C, x) || ca::subset(B | C, x) ? 3 : 0; }),
      ValuationTable::from(3, [](Bundle x) { return (x & B) ? 1 : 0; }),
  };
}

inline std::vector<ca::BundleFamily> example1_families() {
  return {ca::BundleFamily(3, {0, A, B | C, A | B | C}), ca::BundleFamily(3, {0, B, A | C, A | B | C}),
          ca::BundleFamily(3, {0, C, A | B, A | B | C}), ca::BundleFamily(3, {0, A | B | C})};
}

/// Three agents, items {A, B, C, D}.
inline std::vector<ValuationTable> example2_types() {
  return {
      ValuationTable::from(4, [](Bundle x) { return ca::subset(A | D, x) ? 2 : 0; }),
      ValuationTable::from(4, [](Bundle x) { return ca::subset(A | B, x) ? 2 : (x & B) ? 1 : 0; }),
      ValuationTable::from(4, [](Bundle x) { return (x & C) ? 2 : 0; }),
  };
}

inline ca::BundleFamily example2_family() { return ca::BundleFamily(4, {0, A | B, C | D, A | B | C | D}); }

inline std::vector<ValuationTable> project_all(const std::vector<ValuationTable>& types,
                                               const ca::BundleFamily& sigma) {
  std::vector<ValuationTable> out;
  for (const auto& t : types) out.push_back(ca::project(t, sigma));
  return out;
}

}  // namespace mechsimp::worked
