#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "mechsimp/error.hpp"

namespace mechsimp {

// Every value, bid, payment and click-through rate in the library is an exact
// rational. GMP keeps the representation canonical (reduced, positive
// denominator), so equality is structural.
using Rational = boost::multiprecision::mpq_rational;

inline bool is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

/// Parses "p/q", "p" or "-p/q". Whitespace is not allowed inside the literal.
inline Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (!is_integer_literal(text)) {
      throw Error(ErrorKind::parse, "not a rational literal: '" + std::string(text) + "'");
    }
    return Rational(std::string(text[0] == '+' ? text.substr(1) : text));
  }
  const auto num = text.substr(0, slash);
  const auto den = text.substr(slash + 1);
  if (!is_integer_literal(num) || den.empty() || !is_integer_literal(den) || den[0] == '-' || den[0] == '+') {
    throw Error(ErrorKind::parse, "not a rational literal: '" + std::string(text) + "'");
  }
  const Rational d{std::string(den)};
  if (d == 0) throw Error(ErrorKind::parse, "zero denominator in '" + std::string(text) + "'");
  return Rational{std::string(num[0] == '+' ? num.substr(1) : num)} / d;
}

inline std::string to_string(const Rational& r) { return r.str(); }

/// Decimal approximation with `digits` significant digits (display only).
inline std::string to_decimal(const Rational& r, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, r.convert_to<double>());
  return buf;
}

inline std::vector<Rational> parse_rationals(const std::vector<std::string>& items) {
  std::vector<Rational> out;
  out.reserve(items.size());
  for (const auto& s : items) out.push_back(parse_rational(s));
  return out;
}

inline Rational sum(const std::vector<Rational>& xs) {
  Rational total = 0;
  for (const auto& x : xs) total += x;
  return total;
}

}  // namespace mechsimp
