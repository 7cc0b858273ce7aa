#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <cmath>
#include <string>

#include "auction/errors.hpp"

namespace auction {

using Rational = boost::multiprecision::cpp_rational;

// Parses "3/4", "0.25", "1", "1e-3".  Decimal and scientific forms convert
// exactly (power-of-ten denominators).
inline Rational parse_rational(const std::string& text) {
  auto fail = [&] { throw StructuralError("not a rational number: '" + text + "'"); };
  std::string s = text;
  if (s.empty()) fail();
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    try {
      Rational r(boost::multiprecision::cpp_int(s.substr(0, slash)),
                 boost::multiprecision::cpp_int(s.substr(slash + 1)));
      return r;
    } catch (const std::exception&) {
      fail();
    }
  }
  long exp10 = 0;
  auto e = s.find_first_of("eE");
  if (e != std::string::npos) {
    try {
      exp10 = std::stol(s.substr(e + 1));
    } catch (const std::exception&) {
      fail();
    }
    s = s.substr(0, e);
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    exp10 -= static_cast<long>(s.size() - dot - 1);
    s.erase(dot, 1);
  }
  if (s.empty() || s == "-" || s == "+") fail();
  boost::multiprecision::cpp_int digits;
  try {
    digits = boost::multiprecision::cpp_int(s);
  } catch (const std::exception&) {
    fail();
  }
  Rational r(digits);
  boost::multiprecision::cpp_int p10 = 1;
  for (long i = 0; i < std::labs(exp10); ++i) p10 *= 10;
  if (exp10 >= 0)
    r *= Rational(p10);
  else
    r /= Rational(p10);
  return r;
}

// Exact conversion: every finite double is a dyadic rational.
inline Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw StructuralError("non-finite value has no rational form");
  if (v == 0.0) return Rational(0);
  int exp = 0;
  double frac = std::frexp(v, &exp);  // v = frac * 2^exp, |frac| in [0.5, 1)
  auto mant = static_cast<long long>(std::ldexp(frac, 53));
  exp -= 53;
  Rational r(mant);
  boost::multiprecision::cpp_int p2 = boost::multiprecision::cpp_int(1) << std::abs(exp);
  if (exp >= 0)
    r *= Rational(p2);
  else
    r /= Rational(p2);
  return r;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double v) { return v; }

inline std::string to_string(const Rational& r) { return r.str(); }

}  // namespace auction
