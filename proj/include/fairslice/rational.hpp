#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "fairslice/error.hpp"

namespace fairslice {

// Exact arithmetic for every cake coordinate, density and share.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  return Rational(Integer(num), Integer(den));
}

// Accepts "p/q", "-p/q", integers and plain decimals ("0.125", "-3.", ".5", "1e-3").
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw Error(ErrorCode::MalformedNumber, "malformed number '" + std::string(text) + "'");
  };
  auto is_digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  // Boost treats a leading zero as an octal prefix
  auto decimal_integer = [](std::string_view digits) {
    while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
    return Integer(std::string(digits));
  };
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return fail();

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) return fail();

  Rational value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!is_digits(num) || !is_digits(den)) return fail();
    Integer d = decimal_integer(den);
    if (d == 0) throw Error(ErrorCode::MalformedNumber, "zero denominator in '" + std::string(text) + "'");
    value = Rational(decimal_integer(num), d);
  } else {
    std::int64_t exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      auto exp_text = s.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (!is_digits(exp_text) || exp_text.size() > 6) return fail();
      exponent = std::stoll(std::string(exp_text));
      if (exp_negative) exponent = -exponent;
      s = s.substr(0, e);
    }
    auto dot = s.find('.');
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (whole.empty() && frac.empty()) return fail();
    if (!whole.empty() && !is_digits(whole)) return fail();
    if (!frac.empty() && !is_digits(frac)) return fail();
    std::string digits = std::string(whole) + std::string(frac);
    Integer mantissa = digits.empty() ? Integer(0) : decimal_integer(digits);
    exponent -= static_cast<std::int64_t>(frac.size());
    Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(std::llabs(exponent)));
    value = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
  }
  return negative ? Rational(-value) : value;
}

inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Human rendering with a fixed number of significant digits.
inline std::string to_decimal(const Rational& r, int significant = 12) {
  double d = to_double(r);
  if (d == 0.0) return "0";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*g", significant, d);
  return buffer;
}

inline std::string to_decimal(double d, int significant = 12) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*g", significant, d);
  return buffer;
}

// Exact conversion of a finite double (every double is a dyadic rational).
inline Rational from_double(double d) {
  return Rational(d);
}

}  // namespace fairslice
