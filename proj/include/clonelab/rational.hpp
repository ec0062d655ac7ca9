#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "clonelab/errors.hpp"

namespace clonelab {

// Exact rationals in lowest terms with positive denominator.
// Expression templates are off so mixed arithmetic yields plain values.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                              boost::multiprecision::et_off>;

// Integers or `p/q`, optional leading minus on p.
inline Rational parse_rational(const std::string& s) {
  auto digits = [](const std::string& t, bool sign) {
    std::size_t i = sign && !t.empty() && t[0] == '-' ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (!digits(s, true)) throw ParseError(0, "invalid rational '" + s + "'");
    return Rational(Integer(s));
  }
  std::string p = s.substr(0, slash), q = s.substr(slash + 1);
  if (!digits(p, true) || !digits(q, false)) throw ParseError(0, "invalid rational '" + s + "'");
  Integer den(q);
  if (den == 0) throw DomainError("zero denominator in '" + s + "'");
  return Rational(Integer(p), den);
}

inline std::string to_string(const Rational& r) {
  auto num = boost::multiprecision::numerator(r);
  auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace clonelab
