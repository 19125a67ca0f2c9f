#pragma once

// Lipschitz test functions on G/Γ built from a closed grammar.  Every node
// is evaluated on the reduced coordinates of reduce(x).frac, which makes the
// value independent of the coset representative.

#include "nilcorr/nilgroup.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace nilcorr {

using Complex = std::complex<double>;

// e(t) = exp(2 pi i t)
Complex e1(double t);

// Bump vanishing on [0, 0.05] and [0.95, 1): sin^2(pi (t - 0.05) / 0.9) inside.
double bump(double t);
inline constexpr double kBumpLo = 0.05;
inline constexpr double kBumpHi = 0.95;

class TestFunction {
 public:
  enum class Kind { constant, character, coord, frac, bump, product, sum };

  static TestFunction constant(Complex c);
  // e(k . x) over all reduced coordinates.
  static TestFunction character(std::vector<std::int64_t> k);
  // e(k x_m) on the last coordinate.
  static TestFunction vertical_character(int dim, std::int64_t k);
  static TestFunction coord(int j);
  static TestFunction frac(TestFunction child);
  static TestFunction bump(int j);
  static TestFunction product(std::vector<TestFunction> factors);
  static TestFunction sum(std::vector<TestFunction> terms);

  Kind kind() const;
  Complex scalar() const;
  const std::vector<std::int64_t>& k() const;
  int index() const;
  std::vector<TestFunction> children() const;

  // Value at a point whose coordinates already lie in [0,1)^m.
  Complex eval_reduced(const double* coords, int dim) const;
  Complex eval(const Nilmanifold& g, const GroupElement& x) const;

  // Integral over G/Γ with respect to Haar measure (Lebesgue measure on the
  // fundamental domain [0,1)^m).  Throws UnknownIntegral when the grammar
  // does not determine it.
  Complex integral(int dim) const;

  // Largest coordinate index referenced, or -1.
  int max_coord() const;
  std::string describe() const;

  // Optional user-declared Lipschitz bound (negative = unknown).
  double declared_lip = -1.0;

 private:
  struct Node;
  explicit TestFunction(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Lower bound for ||F||_Lip = sup|F| + sup |F(x)-F(y)|/d(x,y), sampled on the
// first `grid_size` points of a Kronecker sequence in [0,1)^m with left
// perturbations exp(h X_j) x.  Nested samples make it nondecreasing in
// grid_size.
double estimate_lip(const TestFunction& f, const Nilmanifold& g, int grid_size, double h = 1e-4);

// Max |F(x γ) - F(x)| over random x and generators γ = exp(±X_j).
double gamma_invariance_defect(const TestFunction& f, const Nilmanifold& g, int samples = 1000,
                               std::uint64_t seed = 1);

}  // namespace nilcorr
