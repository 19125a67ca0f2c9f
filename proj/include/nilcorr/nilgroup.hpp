#pragma once

// Filtered nilpotent Lie groups in Mal'cev coordinates.
//
// Coordinates convention: an element g is identified with the vector
// (w_1, ..., w_m) such that
//
//     g = exp(w_m X_m) * ... * exp(w_2 X_2) * exp(w_1 X_1).
//
// With [X_1, X_2] = X_3 this gives the familiar Heisenberg law
// (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x y'), i.e. the coordinates of the
// unitriangular matrix [[1,x,z],[0,1,y],[0,0,1]].  The lattice Gamma is the
// set of integer points in either ordering of the product, since reversing
// the order amounts to g -> g^{-1}.

#include "nilcorr/rational.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nilcorr {

enum class Family { torus, heisenberg, generic };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

// c_{ijk} with [X_i, X_j] = sum_k c_{ijk} X_k. Indices are 0-based here and
// 1-based in the JSON form.
struct StructureConstant {
  int i = 0;
  int j = 0;
  int k = 0;
  Rational value;
};

struct NilmanifoldSpec {
  int dim = 1;
  int degree = 1;
  std::vector<int> filtration_dims;  // m_1 >= m_2 >= ... >= m_d, m_1 = dim
  std::vector<StructureConstant> structure_constants;
  std::int64_t rationality_height = 1;  // Q
  Family family = Family::torus;
};

NilmanifoldSpec torus_spec(int dim, int degree = 1);
NilmanifoldSpec heisenberg_spec();

class GroupElement {
 public:
  GroupElement() = default;
  explicit GroupElement(std::vector<double> coords) : coords_(std::move(coords)) {}
  explicit GroupElement(std::vector<Rational> exact);

  static GroupElement identity(int dim);

  int dim() const { return static_cast<int>(coords_.size()); }
  const std::vector<double>& coords() const { return coords_; }
  double operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  bool is_exact() const { return exact_.has_value(); }
  const std::vector<Rational>& exact() const { return *exact_; }

  // True when every coordinate is an integer (exact path) or within tol of one.
  bool in_lattice(double tol = 0.0) const;

 private:
  std::vector<double> coords_;
  std::optional<std::vector<Rational>> exact_;
};

struct Reduction {
  GroupElement gamma;  // integer coordinates
  GroupElement frac;   // coordinates in [0,1)^m, x = frac * gamma
};

namespace detail {
struct GenericLaw;
}

class Nilmanifold {
 public:
  // Validates the spec and prepares the multiplication law.
  explicit Nilmanifold(NilmanifoldSpec spec);
  ~Nilmanifold();
  Nilmanifold(const Nilmanifold&) = delete;
  Nilmanifold& operator=(const Nilmanifold&) = delete;

  const NilmanifoldSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  int degree() const { return spec_.degree; }
  Family family() const { return spec_.family; }
  int nilpotency_class() const { return class_; }

  // m_i with m_0 = m_1 = dim and m_i = 0 for i > degree.
  int filtration_dim(int i) const;
  // Largest i such that basis vector a lies in g_i.
  int level(int a) const;

  // Dense c[i][j][k] (exact and double views).
  const Rational& constant(int i, int j, int k) const;
  double constant_d(int i, int j, int k) const { return dense_d_[idx(i, j, k)]; }
  bool is_abelian() const { return abelian_; }

  GroupElement identity() const { return GroupElement::identity(spec_.dim); }
  GroupElement basis_element(int j, double t) const;
  GroupElement basis_element(int j, const Rational& t) const;

  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  GroupElement inv(const GroupElement& a) const;
  GroupElement pow(const GroupElement& a, const BigInt& k) const;
  GroupElement pow(const GroupElement& a, std::int64_t k) const { return pow(a, BigInt(k)); }

  Reduction reduce(const GroupElement& x) const;

  // Surrogate for the right-invariant metric: the larger of
  // |psi(a b^-1)|_inf and |psi(b a^-1)|_inf.  Both bound d_G(a,b) from above.
  double dist(const GroupElement& a, const GroupElement& b) const;

  // True if the coordinates outside the trailing m_i positions vanish.
  bool in_subgroup(const GroupElement& g, int i, double tol = 0.0) const;
  // Largest |coordinate| outside the trailing m_i positions.
  double subgroup_defect(const GroupElement& g, int i) const;

  void check_dim(const GroupElement& g) const;

 private:
  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * spec_.dim + j) * spec_.dim + k;
  }
  void validate();
  void compute_class();

  NilmanifoldSpec spec_;
  std::vector<Rational> dense_;
  std::vector<double> dense_d_;
  bool abelian_ = true;
  int class_ = 1;
  std::unique_ptr<detail::GenericLaw> law_;
};

using ManifoldPtr = std::shared_ptr<const Nilmanifold>;

ManifoldPtr build_nilmanifold(NilmanifoldSpec spec);

// G x G' with the product filtration.  The basis is interleaved by filtration
// level so that trailing spans still match the filtration; `left` and `right`
// give the product coordinate index of each factor coordinate.
struct ProductManifold {
  ManifoldPtr manifold;
  std::vector<int> left;
  std::vector<int> right;

  GroupElement pair(const GroupElement& a, const GroupElement& b) const;
  std::pair<GroupElement, GroupElement> split(const GroupElement& x) const;
};

ProductManifold product_manifold(const Nilmanifold& a, const Nilmanifold& b);

}  // namespace nilcorr
