#pragma once

// Reports: a machine block (JSON, rationals as "p/q" strings) and a table
// rendering of the same data.

#include <json.hpp>

#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "mechsimp/rational.hpp"

namespace mechsimp::cli {

using json = nlohmann::ordered_json;

inline json q(const Rational& r) { return to_string(r); }

inline json qs(const std::vector<Rational>& v) {
  json out = json::array();
  for (const auto& r : v) out.push_back(q(r));
  return out;
}

inline json qm(const std::vector<std::vector<Rational>>& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(qs(row));
  return out;
}

struct Report {
  Report() = default;
  explicit Report(std::string c, bool v = true) : command(std::move(c)), verified(v) {}

  std::string command;
  bool verified = true;
  json body = json::object();
  json witness;  // null unless refuted

  json machine() const {
    json out;
    out["command"] = command;
    out["verdict"] = verified ? "verified" : "refuted";
    for (const auto& [k, v] : body.items()) out[k] = v;
    if (!witness.is_null()) out["witness"] = witness;
    return out;
  }

  int exit_code() const { return verified ? 0 : 1; }
};

namespace detail {

inline bool is_fraction(const std::string& s) {
  static const std::regex re("^-?[0-9]+/[0-9]+$");
  return std::regex_match(s, re);
}

inline bool has_fraction(const json& v) {
  if (v.is_string()) return is_fraction(v.get<std::string>());
  if (v.is_array()) {
    for (const auto& e : v) {
      if (has_fraction(e)) return true;
    }
  }
  return false;
}

inline std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  return v.dump();
}

inline std::string approx_text(const json& v) {
  if (v.is_string() && is_fraction(v.get<std::string>())) return to_decimal(parse_rational(v.get<std::string>()), 6);
  if (v.is_array()) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + approx_text(v[i]);
    return s + ")";
  }
  return scalar_text(v);
}

inline bool flat_array(const json& v) {
  if (!v.is_array()) return false;
  for (const auto& e : v) {
    if (e.is_object() || (e.is_array() && !flat_array(e))) return false;
  }
  return true;
}

inline std::string inline_text(const json& v) {
  if (!v.is_array()) return scalar_text(v);
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + inline_text(v[i]);
  return s + ")";
}

inline void render(std::ostream& os, const std::string& label, const json& v, int indent, bool& approx) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (v.is_object()) {
    os << pad << label << ":\n";
    for (const auto& [k, e] : v.items()) render(os, k, e, indent + 2, approx);
    return;
  }
  if (v.is_array() && !flat_array(v)) {
    os << pad << label << ":\n";
    for (std::size_t i = 0; i < v.size(); ++i) render(os, "[" + std::to_string(i + 1) + "]", v[i], indent + 2, approx);
    return;
  }
  std::string text = inline_text(v);
  if (has_fraction(v)) {
    text += "  ~" + approx_text(v);
    approx = true;
  }
  os << pad << label << ": " << text << "\n";
}

}  // namespace detail

inline std::string render_table(const Report& r) {
  std::ostringstream os;
  os << r.command << ": " << (r.verified ? "VERIFIED" : "REFUTED") << "\n";
  bool approx = false;
  for (const auto& [k, v] : r.body.items()) detail::render(os, k, v, 2, approx);
  if (!r.witness.is_null()) detail::render(os, "witness", r.witness, 2, approx);
  if (approx) os << "(~ marks decimal approximations to 6 significant digits)\n";
  return os.str();
}

inline std::string render_machine(const Report& r) { return r.machine().dump(2) + "\n"; }

}  // namespace mechsimp::cli
