#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace thermoform {

// Expression templates off: values are small and `auto` stays safe.
using Rational =
    boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

enum class ScalarPolicy { exact_rational, double_precision };

inline std::string_view to_string(ScalarPolicy p) {
  return p == ScalarPolicy::exact_rational ? "exact-rational" : "double-precision";
}

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr ScalarPolicy policy = ScalarPolicy::double_precision;
  static constexpr bool exact = false;
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::fabs(x); }
  static double from_double(double x) { return x; }
};

template <>
struct scalar_traits<Rational> {
  static constexpr ScalarPolicy policy = ScalarPolicy::exact_rational;
  static constexpr bool exact = true;
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static long double to_long_double(const Rational& x) { return x.convert_to<long double>(); }
  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
  static Rational from_double(double x) { return Rational(x); }
};

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Rational>;

template <Scalar T>
double to_double(const T& x) {
  return scalar_traits<T>::to_double(x);
}

template <Scalar T>
constexpr bool is_exact_v = scalar_traits<T>::exact;

/// Relative entrywise threshold under which a double-precision product entry
/// counts as zero (scaled by the magnitude bound of the product).
inline constexpr double kZeroThreshold = 1e-14;

/// Parse "p/q", "p", or a decimal string as an exact rational.
/// Decimal input is converted exactly from its digits, not via double.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string& v) {
    const auto b = v.find_first_not_of(" \t");
    const auto e = v.find_last_not_of(" \t");
    v = (b == std::string::npos) ? std::string() : v.substr(b, e - b + 1);
  };
  trim(s);
  if (s.empty()) throw std::invalid_argument("empty number");
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    trim(num);
    trim(den);
    auto decimal_only = [](const std::string& v) {
      const std::size_t start = (!v.empty() && (v[0] == '-' || v[0] == '+')) ? 1 : 0;
      return v.size() > start && v.find_first_not_of("0123456789", start) == std::string::npos;
    };
    if (!decimal_only(num) || !decimal_only(den))
      throw std::invalid_argument("malformed rational '" + s + "'");
    auto strip = [](std::string v) {
      const std::size_t start = (v[0] == '-' || v[0] == '+') ? 1 : 0;
      const std::size_t nz = v.find_first_not_of('0', start);
      v.erase(start, (nz == std::string::npos ? v.size() - 1 : nz) - start);
      if (v[0] == '+') v.erase(0, 1);
      return v;
    };
    num = strip(num);
    den = strip(den);
    using Int = boost::multiprecision::mpz_int;
    Int n, d;
    try {
      n = Int(num);
      d = Int(den);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed rational '" + s + "'");
    }
    if (d == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    return Rational(n, d);
  }
  // integer or decimal, optionally with exponent
  std::size_t pos = 0;
  bool neg = false;
  if (s[pos] == '+' || s[pos] == '-') neg = s[pos++] == '-';
  std::string digits;
  long exponent = 0;
  bool seen_dot = false, seen_digit = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_dot) --exponent;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (c == 'e' || c == 'E') {
      try {
        std::size_t used = 0;
        exponent += std::stol(s.substr(pos + 1), &used);
        if (used != s.size() - pos - 1) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::invalid_argument("malformed number '" + s + "'");
      }
      pos = s.size();
      break;
    } else {
      throw std::invalid_argument("malformed number '" + s + "'");
    }
  }
  if (!seen_digit) throw std::invalid_argument("malformed number '" + s + "'");
  using Int = boost::multiprecision::mpz_int;
  // leading zeros would select octal parsing
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  Int mant(digits);
  if (neg) mant = -mant;
  Int scale = boost::multiprecision::pow(Int(10), static_cast<unsigned>(std::labs(exponent)));
  return exponent >= 0 ? Rational(mant * scale) : Rational(mant, scale);
}

inline std::string to_string(const Rational& q) { return q.str(); }

}  // namespace thermoform
