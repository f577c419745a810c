#pragma once

// Generic mechanisms over finite grids: the simplification relation, outcome
// closure, tightness and totality (via an outcome-reducing map). All checks
// are grid-relative: a `true` verdict certifies the property on the supplied
// grid only.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mechsimp/error.hpp"
#include "mechsimp/parallel.hpp"
#include "mechsimp/rational.hpp"

namespace mechsimp {

template <class Outcome>
struct Result {
  Outcome outcome;
  std::vector<Rational> payments;

  bool operator==(const Result&) const = default;
};

/// A mechanism (N, X, f, p): per-agent message membership plus a deterministic
/// outcome/payment rule, total on admissible profiles.
template <class Message, class Outcome>
struct Mechanism {
  using message_type = Message;
  using outcome_type = Outcome;

  std::string name;
  std::function<bool(std::size_t agent, const Message&)> admits;
  std::function<Result<Outcome>(const std::vector<Message>&)> run;
};

/// Per-agent candidate messages and candidate types for brute-force checks.
/// One message list serves both mechanisms: the candidate's restricted grid
/// is the subset it admits.
template <class Message, class Type>
struct FiniteGrid {
  std::vector<std::vector<Message>> messages;
  std::vector<std::vector<Type>> types;

  std::size_t agents() const { return messages.size(); }

  void validate() const {
    if (messages.empty()) throw Error(ErrorKind::invalid_input, "grid has no agents");
    for (std::size_t i = 0; i < messages.size(); ++i) {
      if (messages[i].empty()) {
        throw Error(ErrorKind::invalid_input, "grid has no messages for agent " + std::to_string(i));
      }
    }
    if (!types.empty()) {
      if (types.size() != messages.size()) {
        throw Error(ErrorKind::invalid_input, "grid type lists do not match the agent count");
      }
      for (std::size_t i = 0; i < types.size(); ++i) {
        if (types[i].empty()) {
          throw Error(ErrorKind::invalid_input, "grid has no types for agent " + std::to_string(i));
        }
      }
    }
  }
};

/// v_i(o, theta_i); utilities are quasilinear: valuation minus payment.
template <class Type, class Outcome>
using Valuation = std::function<Rational(std::size_t agent, const Type& type, const Outcome& outcome)>;

struct GridWitness {
  std::vector<std::size_t> types;    // type index per agent, empty if types play no role
  std::size_t agent = 0;
  std::vector<std::size_t> profile;  // message index per agent
  std::optional<std::size_t> deviation;
  Rational gain = 0;
  std::string reason;
};

struct CheckResult {
  bool holds = true;
  std::optional<GridWitness> witness;

  explicit operator bool() const { return holds; }
};

namespace detail {

/// Mixed-radix enumeration of profiles drawn from per-agent index lists,
/// agent 0 most significant (lexicographic order).
class ProfileSpace {
 public:
  explicit ProfileSpace(std::vector<std::vector<std::size_t>> choices) : choices_(std::move(choices)) {
    stride_.assign(choices_.size(), 1);
    size_ = 1;
    for (std::size_t i = choices_.size(); i-- > 0;) {
      stride_[i] = size_;
      size_ *= choices_[i].size();
    }
  }

  std::size_t size() const { return size_; }
  std::size_t agents() const { return choices_.size(); }
  const std::vector<std::size_t>& choices(std::size_t agent) const { return choices_[agent]; }

  /// Positions (into the choice lists) of the profile with flat index `flat`.
  std::vector<std::size_t> positions(std::size_t flat) const {
    std::vector<std::size_t> pos(choices_.size());
    for (std::size_t i = 0; i < choices_.size(); ++i) {
      pos[i] = (flat / stride_[i]) % choices_[i].size();
    }
    return pos;
  }

  std::vector<std::size_t> indices(std::size_t flat) const {
    auto pos = positions(flat);
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = choices_[i][pos[i]];
    return pos;
  }

  std::size_t flat(const std::vector<std::size_t>& positions) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) f += positions[i] * stride_[i];
    return f;
  }

  std::size_t stride(std::size_t agent) const { return stride_[agent]; }

 private:
  std::vector<std::vector<std::size_t>> choices_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 1;
};

inline constexpr std::size_t max_grid_profiles = 4'000'000;

template <class Message, class Type, class Pred>
std::vector<std::vector<std::size_t>> admitted(const FiniteGrid<Message, Type>& grid, const Pred& pred) {
  std::vector<std::vector<std::size_t>> out(grid.agents());
  for (std::size_t i = 0; i < grid.agents(); ++i) {
    for (std::size_t m = 0; m < grid.messages[i].size(); ++m) {
      if (pred(i, grid.messages[i][m])) out[i].push_back(m);
    }
  }
  return out;
}

inline void require_nonempty(const std::vector<std::vector<std::size_t>>& lists, const char* what) {
  for (std::size_t i = 0; i < lists.size(); ++i) {
    if (lists[i].empty()) {
      throw Error(ErrorKind::invalid_input,
                  std::string("grid has no ") + what + " messages for agent " + std::to_string(i));
    }
  }
}

/// Position of each message index within `choices` (or npos).
inline std::vector<std::size_t> position_map(const std::vector<std::size_t>& choices, std::size_t universe) {
  std::vector<std::size_t> pos(universe, static_cast<std::size_t>(-1));
  for (std::size_t p = 0; p < choices.size(); ++p) pos[choices[p]] = p;
  return pos;
}

template <class Message, class Outcome, class Type>
std::vector<Result<Outcome>> evaluate_all(const Mechanism<Message, Outcome>& mech,
                                          const FiniteGrid<Message, Type>& grid, const ProfileSpace& space) {
  if (space.size() > max_grid_profiles) {
    throw Error(ErrorKind::invalid_input, "grid has " + std::to_string(space.size()) +
                                              " profiles, above the cap of " + std::to_string(max_grid_profiles));
  }
  std::vector<Result<Outcome>> results(space.size());
  parallel_for(space.size(), [&](std::size_t f) {
    const auto idx = space.indices(f);
    std::vector<Message> profile;
    profile.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) profile.push_back(grid.messages[i][idx[i]]);
    results[f] = mech.run(profile);
  });
  return results;
}

using Bits = std::vector<std::uint64_t>;

inline bool test_bit(const Bits& b, std::size_t i) { return (b[i / 64] >> (i % 64)) & 1u; }
inline void set_bit(Bits& b, std::size_t i) { b[i / 64] |= std::uint64_t{1} << (i % 64); }

/// Lexicographic iteration over type profiles; fn returns true to stop.
template <class Type>
bool for_each_type_profile(const std::vector<std::vector<Type>>& types,
                           const std::function<bool(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> theta(types.size(), 0);
  while (true) {
    if (fn(theta)) return true;
    std::size_t i = types.size();
    while (i-- > 0) {
      if (++theta[i] < types[i].size()) break;
      theta[i] = 0;
      if (i == 0) return false;
    }
    if (types.empty()) return false;
  }
}

}  // namespace detail

/// `candidate` is a simplification of `original` on the grid: every candidate
/// message is admissible in the original and both rules agree on all
/// candidate profiles. The first offending profile is reported.
template <class Message, class Outcome, class Type>
CheckResult is_simplification(const Mechanism<Message, Outcome>& original,
                              const Mechanism<Message, Outcome>& candidate,
                              const FiniteGrid<Message, Type>& grid) {
  grid.validate();
  const auto restricted = detail::admitted(grid, candidate.admits);
  detail::require_nonempty(restricted, "candidate");
  for (std::size_t i = 0; i < grid.agents(); ++i) {
    for (const auto m : restricted[i]) {
      if (!original.admits(i, grid.messages[i][m])) {
        GridWitness w;
        w.agent = i;
        w.deviation = m;
        w.reason = "candidate message is not admissible in the original";
        return {false, w};
      }
    }
  }
  const detail::ProfileSpace space(restricted);
  const auto first = parallel_find_first(space.size(), [&](std::size_t f) {
    const auto idx = space.indices(f);
    std::vector<Message> profile;
    for (std::size_t i = 0; i < idx.size(); ++i) profile.push_back(grid.messages[i][idx[i]]);
    return !(original.run(profile) == candidate.run(profile));
  });
  if (!first) return {};
  const auto idx = space.indices(*first);
  std::vector<Message> profile;
  for (std::size_t i = 0; i < idx.size(); ++i) profile.push_back(grid.messages[i][idx[i]]);
  const auto a = original.run(profile);
  const auto b = candidate.run(profile);
  GridWitness w;
  w.profile = idx;
  w.reason = a.outcome == b.outcome ? "payments differ" : "outcomes differ";
  return {false, w};
}

/// Outcome closure: for every type, agent, restricted profile of the others
/// and unrestricted grid message x_i, some restricted grid message does at
/// least as well as x_i. Witness: (theta, i, x^_{-i}, x_i).
template <class Message, class Outcome, class Type>
CheckResult outcome_closure_check(const Mechanism<Message, Outcome>& original,
                                  const Mechanism<Message, Outcome>& candidate,
                                  const FiniteGrid<Message, Type>& grid,
                                  const Valuation<Type, Outcome>& valuation) {
  grid.validate();
  if (grid.types.empty()) throw Error(ErrorKind::invalid_input, "outcome closure needs a type grid");
  const std::size_t n = grid.agents();
  const auto full = detail::admitted(grid, original.admits);
  auto restricted = detail::admitted(grid, [&](std::size_t i, const Message& m) {
    return candidate.admits(i, m) && original.admits(i, m);
  });
  detail::require_nonempty(restricted, "candidate");
  const detail::ProfileSpace space(full);
  const auto results = detail::evaluate_all(original, grid, space);

  struct Bad {
    std::vector<std::size_t> others;  // message indices (own slot unused)
    std::size_t deviation = 0;
    Rational gain;
  };
  std::vector<std::vector<std::optional<Bad>>> bad(n);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    bad[i].resize(grid.types[i].size());
    for (std::size_t t = 0; t < grid.types[i].size(); ++t) jobs.emplace_back(i, t);
  }

  parallel_for(jobs.size(), [&](std::size_t job) {
    const auto [i, t] = jobs[job];
    const auto& type = grid.types[i][t];
    auto others_choices = restricted;
    others_choices[i] = {0};
    const detail::ProfileSpace others(others_choices);
    const auto full_pos = detail::position_map(full[i], grid.messages[i].size());
    for (std::size_t f = 0; f < others.size(); ++f) {
      auto idx = others.indices(f);
      std::vector<std::size_t> pos(n);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) pos[j] = detail::position_map(full[j], grid.messages[j].size())[idx[j]];
      }
      auto utility = [&](std::size_t msg) {
        pos[i] = full_pos[msg];
        const auto& r = results[space.flat(pos)];
        return valuation(i, type, r.outcome) - r.payments[i];
      };
      std::optional<Rational> best_restricted;
      for (const auto m : restricted[i]) {
        const auto u = utility(m);
        if (!best_restricted || u > *best_restricted) best_restricted = u;
      }
      for (const auto m : full[i]) {
        const auto u = utility(m);
        if (u > *best_restricted) {
          bad[i][t] = Bad{idx, m, u - *best_restricted};
          return;
        }
      }
    }
  });

  CheckResult out;
  detail::for_each_type_profile(grid.types, [&](const std::vector<std::size_t>& theta) {
    for (std::size_t i = 0; i < n; ++i) {
      if (const auto& b = bad[i][theta[i]]) {
        GridWitness w;
        w.types = theta;
        w.agent = i;
        w.profile = b->others;
        w.profile[i] = b->deviation;
        w.deviation = b->deviation;
        w.gain = b->gain;
        w.reason = "unrestricted message beats every restricted message";
        out = {false, w};
        return true;
      }
    }
    return false;
  });
  return out;
}

/// Tightness: every grid-Nash profile of the candidate (no profitable
/// deviation inside the restricted grid) is grid-Nash in the original (no
/// profitable deviation inside the full grid). Profiles are visited in
/// lexicographic (type profile, message profile) order and the first
/// violation is returned.
template <class Message, class Outcome, class Type>
CheckResult tightness_check(const Mechanism<Message, Outcome>& original,
                            const Mechanism<Message, Outcome>& candidate,
                            const FiniteGrid<Message, Type>& grid,
                            const Valuation<Type, Outcome>& valuation) {
  grid.validate();
  if (grid.types.empty()) throw Error(ErrorKind::invalid_input, "tightness needs a type grid");
  const std::size_t n = grid.agents();
  const auto full = detail::admitted(grid, original.admits);
  const auto restricted = detail::admitted(grid, [&](std::size_t i, const Message& m) {
    return candidate.admits(i, m) && original.admits(i, m);
  });
  detail::require_nonempty(restricted, "candidate");
  const detail::ProfileSpace space(full);
  const detail::ProfileSpace cand(restricted);
  const auto results = detail::evaluate_all(original, grid, space);

  std::vector<std::vector<std::size_t>> full_pos(n);
  for (std::size_t i = 0; i < n; ++i) full_pos[i] = detail::position_map(full[i], grid.messages[i].size());

  const std::size_t words = (cand.size() + 63) / 64;
  // cand_ok[i][t]: agent i of type t has no profitable restricted deviation.
  // orig_ok[i][t]: ... and no profitable deviation in the full grid.
  std::vector<std::vector<detail::Bits>> cand_ok(n), orig_ok(n);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    cand_ok[i].assign(grid.types[i].size(), detail::Bits(words, 0));
    orig_ok[i].assign(grid.types[i].size(), detail::Bits(words, 0));
    for (std::size_t t = 0; t < grid.types[i].size(); ++t) jobs.emplace_back(i, t);
  }

  parallel_for(jobs.size(), [&](std::size_t job) {
    const auto [i, t] = jobs[job];
    const auto& type = grid.types[i][t];
    auto others_choices = restricted;
    others_choices[i] = {0};
    const detail::ProfileSpace others(others_choices);
    std::vector<Rational> u_full(full[i].size());
    for (std::size_t f = 0; f < others.size(); ++f) {
      const auto idx = others.indices(f);
      auto cpos = others.positions(f);
      std::vector<std::size_t> pos(n);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) pos[j] = full_pos[j][idx[j]];
      }
      Rational best_full, best_restricted;
      bool first_full = true, first_restricted = true;
      for (std::size_t a = 0; a < full[i].size(); ++a) {
        pos[i] = a;
        const auto& r = results[space.flat(pos)];
        u_full[a] = valuation(i, type, r.outcome) - r.payments[i];
        if (first_full || u_full[a] > best_full) best_full = u_full[a], first_full = false;
      }
      for (const auto m : restricted[i]) {
        const auto& u = u_full[full_pos[i][m]];
        if (first_restricted || u > best_restricted) best_restricted = u, first_restricted = false;
      }
      for (std::size_t c = 0; c < restricted[i].size(); ++c) {
        cpos[i] = c;
        const auto& u = u_full[full_pos[i][restricted[i][c]]];
        const std::size_t flat = cand.flat(cpos);
        if (u >= best_restricted) detail::set_bit(cand_ok[i][t], flat);
        if (u >= best_full) detail::set_bit(orig_ok[i][t], flat);
      }
    }
  });

  CheckResult out;
  detail::for_each_type_profile(grid.types, [&](const std::vector<std::size_t>& theta) {
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t nash = ~std::uint64_t{0};
      std::uint64_t orig = ~std::uint64_t{0};
      for (std::size_t i = 0; i < n; ++i) {
        nash &= cand_ok[i][theta[i]][w];
        orig &= orig_ok[i][theta[i]][w];
      }
      const std::uint64_t violation = nash & ~orig;
      if (!violation) continue;
      std::size_t flat = w * 64;
      while (!((violation >> (flat % 64)) & 1u)) ++flat;
      const auto idx = cand.indices(flat);
      std::size_t agent = 0;
      while (detail::test_bit(orig_ok[agent][theta[agent]], flat)) ++agent;
      std::vector<std::size_t> pos(n);
      for (std::size_t j = 0; j < n; ++j) pos[j] = full_pos[j][idx[j]];
      const auto& type = grid.types[agent][theta[agent]];
      auto utility = [&](std::size_t a) {
        pos[agent] = a;
        const auto& r = results[space.flat(pos)];
        return valuation(agent, type, r.outcome) - r.payments[agent];
      };
      const Rational current = utility(full_pos[agent][idx[agent]]);
      std::size_t best = 0;
      Rational best_u = utility(0);
      for (std::size_t a = 1; a < full[agent].size(); ++a) {
        const auto u = utility(a);
        if (u > best_u) best_u = u, best = a;
      }
      GridWitness wit;
      wit.types = theta;
      wit.agent = agent;
      wit.profile = idx;
      wit.deviation = full[agent][best];
      wit.gain = best_u - current;
      wit.reason = "candidate equilibrium is not an equilibrium of the original";
      out = {false, wit};
      return true;
    }
    return false;
  });
  return out;
}

/// Outcome reducibility with an explicit map h from original profiles into
/// the candidate space: (i) f, p preserved under h; (ii) every restricted
/// deviation against h_{-i}(x) is matched by some unrestricted grid deviation
/// against x_{-i}. Throws reduction_invalid if h leaves the candidate space.
template <class Message, class Outcome, class Type>
CheckResult totality_check_via_reduction(
    const Mechanism<Message, Outcome>& original, const Mechanism<Message, Outcome>& candidate,
    const std::function<std::vector<Message>(const std::vector<Message>&)>& reduce,
    const FiniteGrid<Message, Type>& grid, const Valuation<Type, Outcome>& valuation) {
  grid.validate();
  if (grid.types.empty()) throw Error(ErrorKind::invalid_input, "totality needs a type grid");
  const std::size_t n = grid.agents();
  const auto full = detail::admitted(grid, original.admits);
  const auto restricted = detail::admitted(grid, [&](std::size_t i, const Message& m) {
    return candidate.admits(i, m) && original.admits(i, m);
  });
  detail::require_nonempty(full, "original");
  detail::require_nonempty(restricted, "candidate");
  const detail::ProfileSpace space(full);
  const auto results = detail::evaluate_all(original, grid, space);

  std::vector<std::vector<Message>> reduced(space.size());
  for (std::size_t f = 0; f < space.size(); ++f) {
    const auto idx = space.indices(f);
    std::vector<Message> profile;
    for (std::size_t i = 0; i < n; ++i) profile.push_back(grid.messages[i][idx[i]]);
    reduced[f] = reduce(profile);
    if (reduced[f].size() != n) throw Error(ErrorKind::reduction_invalid, "reduced profile has wrong arity");
    for (std::size_t i = 0; i < n; ++i) {
      if (!candidate.admits(i, reduced[f][i])) {
        throw Error(ErrorKind::reduction_invalid,
                    "reduced message of agent " + std::to_string(i) + " is outside the candidate space");
      }
    }
  }

  // Property (i).
  const auto broken = parallel_find_first(space.size(), [&](std::size_t f) {
    return !(candidate.run(reduced[f]) == results[f]);
  });
  if (broken) {
    GridWitness w;
    w.profile = space.indices(*broken);
    w.reason = "property (i): outcome or payments change under the reduction";
    return {false, w};
  }

  // Property (ii). rhs[i][f][c] = result of (restricted c, h_{-i}(x)).
  struct Violation {
    std::size_t flat = 0, restricted_msg = 0;
    Rational gap;
  };
  std::vector<std::vector<Result<Outcome>>> deviated(n);
  for (std::size_t i = 0; i < n; ++i) {
    deviated[i].resize(space.size() * restricted[i].size());
    parallel_for(space.size() * restricted[i].size(), [&](std::size_t job) {
      const std::size_t f = job / restricted[i].size();
      const std::size_t c = job % restricted[i].size();
      auto profile = reduced[f];
      profile[i] = grid.messages[i][restricted[i][c]];
      deviated[i][job] = candidate.run(profile);
    });
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < grid.types[i].size(); ++t) {
      const auto& type = grid.types[i][t];
      for (std::size_t f = 0; f < space.size(); ++f) {
        auto pos = space.positions(f);
        Rational best_full;
        for (std::size_t a = 0; a < full[i].size(); ++a) {
          pos[i] = a;
          const auto& r = results[space.flat(pos)];
          const Rational u = valuation(i, type, r.outcome) - r.payments[i];
          if (a == 0 || u > best_full) best_full = u;
        }
        for (std::size_t c = 0; c < restricted[i].size(); ++c) {
          const auto& r = deviated[i][f * restricted[i].size() + c];
          const Rational u = valuation(i, type, r.outcome) - r.payments[i];
          if (u > best_full) {
            GridWitness w;
            w.types.assign(n, 0);
            w.types[i] = t;
            w.agent = i;
            w.profile = space.indices(f);
            w.deviation = restricted[i][c];
            w.gain = u - best_full;
            w.reason = "property (ii): restricted deviation against the reduced profile is unmatched";
            return {false, w};
          }
        }
      }
    }
  }
  return {};
}

}  // namespace mechsimp
