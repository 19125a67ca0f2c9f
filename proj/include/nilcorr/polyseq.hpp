#pragma once

// Polynomial sequences g: Z -> G in binomial (Taylor) form
//     g(n) = g_0 * g_1^C(n,1) * ... * g_d^C(n,d),  g_i in G_i,
// torus polynomials, smoothness norms and horizontal characters.

#include "nilcorr/nilgroup.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace nilcorr {

struct PolySequence {
  ManifoldPtr manifold;
  std::vector<GroupElement> coeffs;  // g_0, ..., g_d

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool is_exact() const;
};

// Checks g_i in G_i (within tol for float coordinates) unless validate is false.
PolySequence make_poly_sequence(ManifoldPtr g, std::vector<GroupElement> coeffs, bool validate = true,
                                double tol = 1e-12);

// Linear/polynomial sequence on a torus: coefficient i is the vector alphas[i].
PolySequence torus_sequence(ManifoldPtr torus, const std::vector<std::vector<double>>& alphas);
PolySequence torus_sequence(ManifoldPtr torus, const std::vector<std::vector<Rational>>& alphas);

inline constexpr std::int64_t kMaxEvalIndex = std::int64_t(1) << 53;

GroupElement poly_eval(const PolySequence& g, const BigInt& n);
inline GroupElement poly_eval(const PolySequence& g, std::int64_t n) { return poly_eval(g, BigInt(n)); }

// Binomial-form coefficients of the degree <= d sequence taking the values
// f(0), ..., f(d).
PolySequence interpolate(ManifoldPtr g, int degree, const std::function<GroupElement(std::int64_t)>& f);

// n -> g(n+h) g(n)^{-1}
PolySequence discrete_derivative(const PolySequence& g, std::int64_t h);

// n -> g(n) g'(n)
PolySequence pointwise_product(const PolySequence& a, const PolySequence& b);

struct MembershipViolation {
  int level = 0;
  std::vector<std::int64_t> shifts;
  std::int64_t n = 0;
  double defect = 0.0;
};

struct MembershipReport {
  int samples = 0;
  int checks = 0;
  std::vector<MembershipViolation> violations;
  bool ok() const { return violations.empty(); }
};

MembershipReport check_filtration_membership(const PolySequence& g, int samples, std::uint64_t seed = 1,
                                             double tol = 1e-9);

// Map Z -> T in the binomial basis, coefficients reduced to [0,1).
class TorusPolynomial {
 public:
  TorusPolynomial() = default;
  explicit TorusPolynomial(std::vector<double> alphas);
  explicit TorusPolynomial(std::vector<Rational> alphas);

  int degree() const { return static_cast<int>(alphas_.size()) - 1; }
  const std::vector<double>& alphas() const { return alphas_; }
  bool is_exact() const { return exact_.has_value(); }
  const std::vector<Rational>& exact() const { return *exact_; }

  // sum_i alpha_i C(n,i) mod 1
  double eval(std::int64_t n) const;

 private:
  std::vector<double> alphas_;
  std::optional<std::vector<Rational>> exact_;
};

// Distance to the nearest integer.
double dist_to_int(double x);
Rational dist_to_int(const Rational& x);

// sup_{1<=j<=d} N^j ||alpha_j||
double smoothness_norm(const TorusPolynomial& t, double N);

// Change of basis between sum a_j n^j and sum b_j C(n,j).
std::vector<Rational> monomial_to_binomial(const std::vector<Rational>& a);
std::vector<Rational> binomial_to_monomial(const std::vector<Rational>& b);

struct HorizontalCharacter {
  std::vector<std::int64_t> k;
  std::int64_t modulus() const;
};

// k annihilates every bracket direction: sum_k k_k c_{abk} = 0 for all a, b.
bool is_horizontal(const Nilmanifold& g, const std::vector<std::int64_t>& k);

// eta(x) = k . psi(x) mod 1
double char_eval(const HorizontalCharacter& eta, const GroupElement& x);

TorusPolynomial char_compose(const HorizontalCharacter& eta, const PolySequence& g);

// Calls visit(k) for every nontrivial horizontal character with |k|_inf <= q_max,
// by increasing |k|_inf, then lexicographically with the coordinate order
// 0, 1, -1, 2, -2, ...  Stops early when visit returns false.
void for_each_character(const Nilmanifold& g, std::int64_t q_max,
                        const std::function<bool(const HorizontalCharacter&)>& visit);
std::vector<HorizontalCharacter> enumerate_characters(const Nilmanifold& g, std::int64_t q_max);

}  // namespace nilcorr
