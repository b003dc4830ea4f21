#pragma once

// Exact time and cost arithmetic.
//
// Every time, duration, rate and cost in the library is an exact rational.
// Boundary cases in the adversarial constructions (a job finishing exactly
// at its deadline, a setup ending exactly at a phase boundary) must compare
// equal, which floating point cannot guarantee.

#include "cloudsched/errors.hpp"

#include <boost/rational.hpp>

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cloudsched {

using Rational = boost::rational<std::int64_t>;
using Time = Rational;
using Cost = Rational;

inline Rational floor_rational(const Rational& x) {
  std::int64_t q = x.numerator() / x.denominator();
  if (x.numerator() % x.denominator() != 0 && x.numerator() < 0) --q;
  return Rational(q);
}

inline Rational ceil_rational(const Rational& x) {
  std::int64_t q = x.numerator() / x.denominator();
  if (x.numerator() % x.denominator() != 0 && x.numerator() > 0) ++q;
  return Rational(q);
}

/// floor(x / unit) as an integer index; unit > 0.
inline std::int64_t floor_div(const Rational& x, const Rational& unit) {
  return floor_rational(x / unit).numerator();
}

inline double to_double(const Rational& x) {
  return static_cast<double>(x.numerator()) / static_cast<double>(x.denominator());
}

namespace detail {

inline std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw InputError("invalid number '" + std::string(whole) + "'");
  }
  return v;
}

inline std::int64_t pow10(int e, std::string_view whole) {
  if (e > 18) throw InputError("too many digits in '" + std::string(whole) + "'");
  std::int64_t p = 1;
  while (e-- > 0) p *= 10;
  return p;
}

}  // namespace detail

/// Parses "3", "-2", "0.125", "1.5e-3" or "17/8" exactly.
inline Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) throw InputError("empty number");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::int64_t num = detail::parse_int(s.substr(0, slash), text);
    std::int64_t den = detail::parse_int(s.substr(slash + 1), text);
    if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }

  int exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp = s.substr(e + 1);
    if (!exp.empty() && exp.front() == '+') exp.remove_prefix(1);
    exponent = static_cast<int>(detail::parse_int(exp, text));
    s = s.substr(0, e);
  }

  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  std::string digits;
  int frac_digits = 0;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    digits = std::string(s.substr(0, dot)) + std::string(s.substr(dot + 1));
    frac_digits = static_cast<int>(s.size() - dot - 1);
  } else {
    digits = std::string(s);
  }
  if (digits.empty()) throw InputError("invalid number '" + std::string(text) + "'");
  for (char ch : digits) {
    if (ch < '0' || ch > '9') throw InputError("invalid number '" + std::string(text) + "'");
  }
  std::int64_t mantissa = detail::parse_int(digits, text);
  int scale = frac_digits - exponent;
  Rational value = scale >= 0 ? Rational(mantissa, detail::pow10(scale, text))
                              : Rational(mantissa * detail::pow10(-scale, text));
  return negative ? -value : value;
}

/// Exact textual form: "3", "-1/8".
inline std::string to_string(const Rational& x) {
  if (x.denominator() == 1) return std::to_string(x.numerator());
  return std::to_string(x.numerator()) + "/" + std::to_string(x.denominator());
}

/// True when x has a finite decimal expansion.
inline bool is_terminating_decimal(const Rational& x) {
  std::int64_t d = x.denominator();
  while (d % 2 == 0) d /= 2;
  while (d % 5 == 0) d /= 5;
  return d == 1;
}

/// Locale-independent decimal rendering by long division, truncated after
/// `max_digits` fractional digits (rounded half away from zero) with trailing
/// zeros stripped.
inline std::string to_decimal(const Rational& x, int max_digits = 6) {
  Rational scale(detail::pow10(max_digits, "scale"));
  Rational scaled = x * scale;
  Rational half(1, 2);
  Rational rounded = scaled >= 0 ? floor_rational(scaled + half) : -floor_rational(-scaled + half);
  std::int64_t units = rounded.numerator();
  bool negative = units < 0;
  if (negative) units = -units;
  std::int64_t base = detail::pow10(max_digits, "scale");
  std::string out = std::to_string(units / base);
  std::string frac = std::to_string(units % base);
  frac.insert(0, static_cast<std::size_t>(max_digits) - frac.size(), '0');
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  if (!frac.empty()) out += "." + frac;
  if (negative && out != "0") out.insert(0, "-");
  return out;
}

/// Snaps x to the nearest multiple of `quantum` (ties away from zero).
inline Rational snap_to_quantum(const Rational& x, const Rational& quantum) {
  if (quantum <= 0) throw ParameterError("time quantum must be positive");
  Rational units = x / quantum;
  Rational half(1, 2);
  Rational k = units >= 0 ? floor_rational(units + half) : -floor_rational(-units + half);
  return k * quantum;
}

}  // namespace cloudsched
