#pragma once

// Symbolic machinery behind the generic group law: sparse multivariate
// polynomials over Q and a Baker-Campbell-Hausdorff product that is exact
// for nilpotent algebras.

#include "nilcorr/rational.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace nilcorr::detail {

class Poly {
 public:
  using Monomial = std::vector<std::uint8_t>;

  Poly() = default;
  explicit Poly(int nvars) : nvars_(nvars) {}

  static Poly constant(int nvars, const Rational& c);
  static Poly variable(int nvars, int v);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  int total_degree() const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly operator*(const Poly& o) const;
  Poly scaled(const Rational& q) const;

 private:
  void add_term(const Monomial& m, const Rational& c);

  int nvars_ = 0;
  std::map<Monomial, Rational> terms_;
};

inline Poly operator+(Poly a, const Poly& b) { return a += b; }
inline Poly operator-(Poly a, const Poly& b) { return a -= b; }

// Flattened polynomial for repeated numeric evaluation.
class CompiledPoly {
 public:
  CompiledPoly() = default;
  explicit CompiledPoly(const Poly& p);

  double eval(const std::vector<std::vector<double>>& powers) const;
  Rational eval(const std::vector<Rational>& vars) const;
  int max_exponent() const { return max_exp_; }

 private:
  struct Term {
    double coef_d;
    Rational coef;
    std::uint32_t begin;
    std::uint32_t end;
  };
  std::vector<Term> terms_;
  std::vector<std::pair<std::uint16_t, std::uint8_t>> factors_;
  int max_exp_ = 0;
};

// Nonzero c_{ijk} with i < j.
struct SparseConstant {
  int i;
  int j;
  int k;
  Rational c;
  double cd;
};

inline double scale(double x, const SparseConstant& s) { return x * s.cd; }
inline Rational scale(const Rational& x, const SparseConstant& s) { return x * s.c; }
inline Poly scale(const Poly& x, const SparseConstant& s) { return x.scaled(s.c); }

inline double scale(double x, const Rational& q) { return x * to_double(q); }
inline Rational scale(const Rational& x, const Rational& q) { return x * q; }
inline Poly scale(const Poly& x, const Rational& q) { return x.scaled(q); }

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Rational& x) { return x == 0; }
inline bool is_zero(const Poly& x) { return x.is_zero(); }

template <class R>
struct Ring {
  R zero() const { return R(0); }
};

template <>
struct Ring<Poly> {
  int nvars = 0;
  Poly zero() const { return Poly(nvars); }
};

template <class R>
using AlgVec = std::vector<R>;

template <class R>
AlgVec<R> bracket(const Ring<R>& ring, int dim, const std::vector<SparseConstant>& table, const AlgVec<R>& u,
                  const AlgVec<R>& v) {
  AlgVec<R> out(static_cast<std::size_t>(dim), ring.zero());
  for (const auto& s : table) {
    const auto& ui = u[s.i];
    const auto& uj = u[s.j];
    const auto& vi = v[s.i];
    const auto& vj = v[s.j];
    if ((is_zero(ui) || is_zero(vj)) && (is_zero(uj) || is_zero(vi))) continue;
    R w = ui * vj - uj * vi;
    if (is_zero(w)) continue;
    out[s.k] += scale(w, s);
  }
  return out;
}

// Coefficients of u / (1 - e^{-u}).
inline Rational bch_series_coefficient(int r) {
  switch (r) {
    case 0: return Rational(1);
    case 1: return Rational(1, 2);
    case 2: return Rational(1, 12);
    case 4: return Rational(-1, 720);
    case 6: return Rational(1, 30240);
    default: return Rational(0);
  }
}

// log(exp(X) exp(Y)) for an algebra of nilpotency class `cls`.
//
// Z(t) = log(exp(X) exp(tY)) solves Z' = (ad_Z / (1 - e^{-ad_Z})) Y and is a
// polynomial in t of degree <= cls, so cls Picard iterations on truncated
// t-polynomials give the exact answer.
template <class R>
AlgVec<R> bch(const Ring<R>& ring, int dim, int cls, const std::vector<SparseConstant>& table, const AlgVec<R>& x,
              const AlgVec<R>& y) {
  const auto zero_vec = [&] { return AlgVec<R>(static_cast<std::size_t>(dim), ring.zero()); };
  if (table.empty() || cls <= 1) {
    AlgVec<R> out = x;
    for (int k = 0; k < dim; ++k) out[k] += y[k];
    return out;
  }
  const int deg = cls;
  std::vector<AlgVec<R>> z(static_cast<std::size_t>(deg) + 1, zero_vec());
  z[0] = x;
  for (int iter = 0; iter < deg; ++iter) {
    std::vector<AlgVec<R>> term(static_cast<std::size_t>(deg), zero_vec());
    term[0] = y;
    std::vector<AlgVec<R>> v = term;
    for (int r = 1; r < deg; ++r) {
      std::vector<AlgVec<R>> next(static_cast<std::size_t>(deg), zero_vec());
      for (int e1 = 0; e1 < deg; ++e1) {
        for (int e2 = 0; e1 + e2 < deg; ++e2) {
          auto b = bracket(ring, dim, table, z[e1], term[e2]);
          for (int k = 0; k < dim; ++k) next[e1 + e2][k] += b[k];
        }
      }
      term = std::move(next);
      const Rational beta = bch_series_coefficient(r);
      if (beta == 0) continue;
      for (int e = 0; e < deg; ++e)
        for (int k = 0; k < dim; ++k)
          if (!is_zero(term[e][k])) v[e][k] += scale(term[e][k], beta);
    }
    std::vector<AlgVec<R>> znew(static_cast<std::size_t>(deg) + 1, zero_vec());
    znew[0] = x;
    for (int e = 0; e < deg; ++e)
      for (int k = 0; k < dim; ++k)
        if (!is_zero(v[e][k])) znew[e + 1][k] = scale(v[e][k], Rational(1, e + 1));
    z = std::move(znew);
  }
  AlgVec<R> out = zero_vec();
  for (const auto& ze : z)
    for (int k = 0; k < dim; ++k) out[k] += ze[k];
  return out;
}

// log of exp(w_m X_m) ... exp(w_1 X_1).
template <class R>
AlgVec<R> coords_to_log(const Ring<R>& ring, int dim, int cls, const std::vector<SparseConstant>& table,
                        const std::vector<R>& w) {
  AlgVec<R> acc(static_cast<std::size_t>(dim), ring.zero());
  acc[dim - 1] = w[dim - 1];
  for (int j = dim - 2; j >= 0; --j) {
    AlgVec<R> e(static_cast<std::size_t>(dim), ring.zero());
    e[j] = w[j];
    acc = bch(ring, dim, cls, table, acc, e);
  }
  return acc;
}

// Inverse of coords_to_log: peel exp(w_1 X_1), then exp(w_2 X_2), ...
template <class R>
std::vector<R> log_to_coords(const Ring<R>& ring, int dim, int cls, const std::vector<SparseConstant>& table,
                             AlgVec<R> z) {
  std::vector<R> w(static_cast<std::size_t>(dim), ring.zero());
  for (int j = 0; j < dim; ++j) {
    w[j] = z[j];
    if (j + 1 == dim) break;
    AlgVec<R> e(static_cast<std::size_t>(dim), ring.zero());
    e[j] = scale(w[j], Rational(-1));
    z = bch(ring, dim, cls, table, z, e);
  }
  return w;
}

}  // namespace nilcorr::detail
