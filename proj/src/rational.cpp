#include "nilcorr/rational.hpp"

#include "nilcorr/errors.hpp"

#include <cmath>

namespace nilcorr {

namespace {

BigInt parse_integer(const std::string& s) {
  if (s.empty()) throw Error(ErrorKind::InvalidArgument, "empty integer literal");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw Error(ErrorKind::InvalidArgument, "bad integer literal '" + s + "'");
  for (std::size_t j = i; j < s.size(); ++j)
    if (s[j] < '0' || s[j] > '9') throw Error(ErrorKind::InvalidArgument, "bad integer literal '" + s + "'");
  BigInt v(s.substr(i));
  return s[0] == '-' ? BigInt(-v) : v;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    BigInt num = parse_integer(text.substr(0, slash));
    BigInt den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator in '" + text + "'");
    return Rational(num, den);
  }
  const auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    BigInt num = parse_integer(digits);
    BigInt den = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    return Rational(num, den);
  }
  return Rational(parse_integer(text));
}

std::string format_rational(const Rational& r) {
  const BigInt& d = denominator(r);
  if (d == 1) return numerator(r).str();
  return numerator(r).str() + "/" + d.str();
}

BigInt height(const Rational& r) {
  BigInt a = abs(numerator(r));
  BigInt b = abs(denominator(r));
  return a > b ? a : b;
}

BigInt floor_big(const Rational& r) {
  const BigInt& n = numerator(r);
  const BigInt& d = denominator(r);  // always positive
  BigInt q = n / d;                  // truncates toward zero
  if (n < 0 && q * d != n) q -= 1;
  return q;
}

Rational frac(const Rational& r) { return r - Rational(floor_big(r)); }

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "non-finite value has no rational form");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double mant = std::frexp(x, &exp);  // x = mant * 2^exp, 0.5 <= |mant| < 1
  auto m = static_cast<long long>(std::ldexp(mant, 53));
  exp -= 53;
  BigInt num(m);
  if (exp >= 0) return Rational(num << exp);
  BigInt den = BigInt(1) << (-exp);
  return Rational(num, den);
}

BigInt binomial(const BigInt& n, unsigned k) {
  BigInt num = 1;
  BigInt den = 1;
  for (unsigned i = 0; i < k; ++i) {
    num *= (n - i);
    den *= (i + 1);
  }
  return num / den;
}

}  // namespace nilcorr
