#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace nilcorr {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Accepts "p/q", "p", or a decimal such as "0.25" (converted exactly).
Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& r);

// max(|a|, |b|) for r = a/b in lowest terms.
BigInt height(const Rational& r);

BigInt floor_big(const Rational& r);
Rational frac(const Rational& r);  // r - floor(r), in [0, 1)

// Exact value of a finite double.
Rational exact_rational(double x);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// C(n, k) for any integer n (negative allowed), k >= 0.
BigInt binomial(const BigInt& n, unsigned k);

}  // namespace nilcorr
