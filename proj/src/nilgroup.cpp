#include "nilcorr/nilgroup.hpp"

#include "lie_poly.hpp"
#include "nilcorr/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nilcorr {

namespace detail {

struct GenericLaw {
  int dim = 0;
  std::vector<CompiledPoly> mul;  // in 2*dim variables (a, b)
  std::vector<CompiledPoly> inv;  // in dim variables
  int max_exp = 1;

  std::vector<double> eval_mul(const std::vector<double>& a, const std::vector<double>& b) const {
    std::vector<std::vector<double>> pw(static_cast<std::size_t>(2 * dim));
    for (int v = 0; v < 2 * dim; ++v) {
      const double x = v < dim ? a[v] : b[v - dim];
      auto& row = pw[v];
      row.resize(static_cast<std::size_t>(max_exp) + 1);
      row[0] = 1.0;
      for (int e = 1; e <= max_exp; ++e) row[e] = row[e - 1] * x;
    }
    std::vector<double> out(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) out[k] = mul[k].eval(pw);
    return out;
  }

  std::vector<double> eval_inv(const std::vector<double>& a) const {
    std::vector<std::vector<double>> pw(static_cast<std::size_t>(dim));
    for (int v = 0; v < dim; ++v) {
      auto& row = pw[v];
      row.resize(static_cast<std::size_t>(max_exp) + 1);
      row[0] = 1.0;
      for (int e = 1; e <= max_exp; ++e) row[e] = row[e - 1] * a[v];
    }
    std::vector<double> out(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) out[k] = inv[k].eval(pw);
    return out;
  }

  std::vector<Rational> eval_mul(const std::vector<Rational>& a, const std::vector<Rational>& b) const {
    std::vector<Rational> vars = a;
    vars.insert(vars.end(), b.begin(), b.end());
    std::vector<Rational> out(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) out[k] = mul[k].eval(vars);
    return out;
  }

  std::vector<Rational> eval_inv(const std::vector<Rational>& a) const {
    std::vector<Rational> out(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) out[k] = inv[k].eval(a);
    return out;
  }
};

}  // namespace detail

const char* to_string(Family f) {
  switch (f) {
    case Family::torus: return "torus";
    case Family::heisenberg: return "heisenberg";
    case Family::generic: return "generic";
  }
  return "generic";
}

Family family_from_string(const std::string& s) {
  if (s == "torus") return Family::torus;
  if (s == "heisenberg") return Family::heisenberg;
  if (s == "generic" || s == "generic-BCH" || s == "generic-bch") return Family::generic;
  throw Error(ErrorKind::InvalidArgument, "unknown family '" + s + "'");
}

NilmanifoldSpec torus_spec(int dim, int degree) {
  NilmanifoldSpec s;
  s.dim = dim;
  s.degree = degree;
  s.filtration_dims.assign(static_cast<std::size_t>(degree), dim);
  s.rationality_height = 1;
  s.family = Family::torus;
  return s;
}

NilmanifoldSpec heisenberg_spec() {
  NilmanifoldSpec s;
  s.dim = 3;
  s.degree = 2;
  s.filtration_dims = {3, 1};
  s.structure_constants = {{0, 1, 2, Rational(1)}};
  s.rationality_height = 1;
  s.family = Family::heisenberg;
  return s;
}

GroupElement::GroupElement(std::vector<Rational> exact) {
  coords_.reserve(exact.size());
  for (const auto& r : exact) coords_.push_back(to_double(r));
  exact_ = std::move(exact);
}

GroupElement GroupElement::identity(int dim) {
  return GroupElement(std::vector<Rational>(static_cast<std::size_t>(dim), Rational(0)));
}

bool GroupElement::in_lattice(double tol) const {
  if (exact_) {
    for (const auto& r : *exact_)
      if (denominator(r) != 1) return false;
    return true;
  }
  for (double c : coords_)
    if (std::abs(c - std::nearbyint(c)) > tol) return false;
  return true;
}

namespace {

std::string triple(int i, int j, int k) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + std::to_string(k + 1) + ")";
}

// Row-reduced basis of the span of `vecs` over Q.
std::vector<std::vector<Rational>> span_basis(std::vector<std::vector<Rational>> vecs, int dim) {
  std::vector<std::vector<Rational>> basis;
  std::vector<int> pivots;
  for (auto& v : vecs) {
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const Rational f = v[pivots[b]];
      if (f == 0) continue;
      for (int t = 0; t < dim; ++t) v[t] -= f * basis[b][t];
    }
    int p = -1;
    for (int t = 0; t < dim; ++t)
      if (v[t] != 0) {
        p = t;
        break;
      }
    if (p < 0) continue;
    const Rational lead = v[p];
    for (int t = 0; t < dim; ++t) v[t] /= lead;
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const Rational f = basis[b][p];
      if (f == 0) continue;
      for (int t = 0; t < dim; ++t) basis[b][t] -= f * v[t];
    }
    basis.push_back(std::move(v));
    pivots.push_back(p);
  }
  return basis;
}

constexpr int kMaxClass = 5;

}  // namespace

Nilmanifold::Nilmanifold(NilmanifoldSpec spec) : spec_(std::move(spec)) {
  validate();
  compute_class();
  if (!abelian_ && spec_.family == Family::generic) {
    const int m = spec_.dim;
    std::vector<detail::SparseConstant> table;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          const Rational& c = dense_[idx(i, j, k)];
          if (c != 0) table.push_back({i, j, k, c, to_double(c)});
        }
    auto law = std::make_unique<detail::GenericLaw>();
    law->dim = m;

    detail::Ring<detail::Poly> ring2{2 * m};
    std::vector<detail::Poly> a, b;
    for (int v = 0; v < m; ++v) {
      a.push_back(detail::Poly::variable(2 * m, v));
      b.push_back(detail::Poly::variable(2 * m, m + v));
    }
    auto la = detail::coords_to_log(ring2, m, class_, table, a);
    auto lb = detail::coords_to_log(ring2, m, class_, table, b);
    auto prod = detail::log_to_coords(ring2, m, class_, table, detail::bch(ring2, m, class_, table, la, lb));
    for (const auto& p : prod) law->mul.emplace_back(p);

    detail::Ring<detail::Poly> ring1{m};
    std::vector<detail::Poly> x;
    for (int v = 0; v < m; ++v) x.push_back(detail::Poly::variable(m, v));
    auto lx = detail::coords_to_log(ring1, m, class_, table, x);
    for (auto& p : lx) p = p.scaled(Rational(-1));
    auto inv = detail::log_to_coords(ring1, m, class_, table, lx);
    for (const auto& p : inv) law->inv.emplace_back(p);

    for (const auto& p : law->mul) law->max_exp = std::max(law->max_exp, p.max_exponent());
    for (const auto& p : law->inv) law->max_exp = std::max(law->max_exp, p.max_exponent());
    law_ = std::move(law);
  }
}

Nilmanifold::~Nilmanifold() = default;

void Nilmanifold::validate() {
  const int m = spec_.dim;
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  if (spec_.degree < 1) throw Error(ErrorKind::InvalidArgument, "filtration degree must be positive");
  if (spec_.rationality_height < 1) throw Error(ErrorKind::InvalidArgument, "rationality height must be positive");
  if (static_cast<int>(spec_.filtration_dims.size()) != spec_.degree)
    throw Error(ErrorKind::Filtration, "filtration_dims must list m_1..m_d");
  if (spec_.filtration_dims[0] != m) throw Error(ErrorKind::Filtration, "m_1 must equal the dimension");
  for (int i = 1; i < spec_.degree; ++i)
    if (spec_.filtration_dims[i] > spec_.filtration_dims[i - 1] || spec_.filtration_dims[i] < 0)
      throw Error(ErrorKind::Filtration, "filtration dimensions must be nonincreasing and nonnegative");

  const std::size_t cube = static_cast<std::size_t>(m) * m * m;
  dense_.assign(cube, Rational(0));
  std::vector<char> given(cube, 0);
  for (const auto& sc : spec_.structure_constants) {
    const int i = sc.i, j = sc.j, k = sc.k;
    if (i < 0 || j < 0 || k < 0 || i >= m || j >= m || k >= m)
      throw Error(ErrorKind::InvalidArgument, "structure constant index out of range " + triple(i, j, k), {i + 1, j + 1, k + 1});
    if (i == j && sc.value != 0)
      throw Error(ErrorKind::Antisymmetry, "c" + triple(i, j, k) + " must vanish", {i + 1, j + 1, k + 1});
    if (given[idx(i, j, k)] && dense_[idx(i, j, k)] != sc.value)
      throw Error(ErrorKind::Antisymmetry, "conflicting entries for " + triple(i, j, k), {i + 1, j + 1, k + 1});
    if (given[idx(j, i, k)] && dense_[idx(j, i, k)] != -sc.value)
      throw Error(ErrorKind::Antisymmetry, "c" + triple(i, j, k) + " != -c" + triple(j, i, k), {i + 1, j + 1, k + 1});
    given[idx(i, j, k)] = 1;
    given[idx(j, i, k)] = 1;
    dense_[idx(i, j, k)] = sc.value;
    dense_[idx(j, i, k)] = -sc.value;
  }

  const BigInt qmax(spec_.rationality_height);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const Rational& c = dense_[idx(i, j, k)];
        if (c == 0) continue;
        abelian_ = false;
        if (height(c) > qmax)
          throw Error(ErrorKind::HeightExceeded,
                      "c" + triple(i, j, k) + " = " + format_rational(c) + " exceeds height " + qmax.str(),
                      {i + 1, j + 1, k + 1});
        if (k <= std::max(i, j))
          throw Error(ErrorKind::Filtration,
                      "[X" + std::to_string(i + 1) + ",X" + std::to_string(j + 1) +
                          "] leaves the trailing span; offending triple " + triple(i, j, k),
                      {i + 1, j + 1, k + 1});
        if (level(k) < level(i) + level(j))
          throw Error(ErrorKind::Filtration, "filtration nesting fails at " + triple(i, j, k), {i + 1, j + 1, k + 1});
      }

  // [[Xa,Xb],Xc] + [[Xb,Xc],Xa] + [[Xc,Xa],Xb] = 0
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int c = b + 1; c < m; ++c)
        for (int k = 0; k < m; ++k) {
          Rational s = 0;
          for (int l = 0; l < m; ++l) {
            s += dense_[idx(a, b, l)] * dense_[idx(l, c, k)];
            s += dense_[idx(b, c, l)] * dense_[idx(l, a, k)];
            s += dense_[idx(c, a, l)] * dense_[idx(l, b, k)];
          }
          if (s != 0)
            throw Error(ErrorKind::Jacobi, "Jacobi identity fails for " + triple(a, b, c) + " in component " +
                                               std::to_string(k + 1),
                        {a + 1, b + 1, c + 1});
        }

  dense_d_.resize(cube);
  for (std::size_t t = 0; t < cube; ++t) dense_d_[t] = to_double(dense_[t]);

  if (spec_.family == Family::torus && !abelian_)
    throw Error(ErrorKind::InvalidArgument, "torus family requires vanishing structure constants");
  if (spec_.family == Family::heisenberg) {
    bool ok = m == 3;
    for (int i = 0; ok && i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          const bool allowed = (i == 0 && j == 1 && k == 2) || (i == 1 && j == 0 && k == 2);
          if (!allowed && dense_[idx(i, j, k)] != 0) ok = false;
        }
    if (!ok || dense_[idx(0, 1, 2)] == 0)
      throw Error(ErrorKind::InvalidArgument, "heisenberg family requires m=3 and only [X1,X2] nonzero");
  }
}

void Nilmanifold::compute_class() {
  const int m = spec_.dim;
  if (abelian_) {
    class_ = 1;
    return;
  }
  std::vector<std::vector<Rational>> cur;
  for (int a = 0; a < m; ++a) {
    std::vector<Rational> e(static_cast<std::size_t>(m), Rational(0));
    e[a] = 1;
    cur.push_back(std::move(e));
  }
  int r = 0;
  while (!cur.empty()) {
    ++r;
    std::vector<std::vector<Rational>> next;
    for (int a = 0; a < m; ++a)
      for (const auto& v : cur) {
        std::vector<Rational> w(static_cast<std::size_t>(m), Rational(0));
        bool nz = false;
        for (int b = 0; b < m; ++b) {
          if (v[b] == 0) continue;
          for (int k = 0; k < m; ++k) {
            const Rational& c = dense_[idx(a, b, k)];
            if (c == 0) continue;
            w[k] += c * v[b];
            nz = true;
          }
        }
        if (nz) next.push_back(std::move(w));
      }
    cur = span_basis(std::move(next), m);
  }
  class_ = r;
  if (class_ > kMaxClass)
    throw Error(ErrorKind::NilpotencyClass,
                "nilpotency class " + std::to_string(class_) + " exceeds " + std::to_string(kMaxClass));
}

int Nilmanifold::filtration_dim(int i) const {
  if (i <= 1) return spec_.dim;
  if (i > spec_.degree) return 0;
  return spec_.filtration_dims[static_cast<std::size_t>(i - 1)];
}

int Nilmanifold::level(int a) const {
  int lv = 1;
  for (int i = 2; i <= spec_.degree; ++i)
    if (a >= spec_.dim - filtration_dim(i)) lv = i;
  return lv;
}

const Rational& Nilmanifold::constant(int i, int j, int k) const { return dense_[idx(i, j, k)]; }

GroupElement Nilmanifold::basis_element(int j, double t) const {
  std::vector<double> c(static_cast<std::size_t>(spec_.dim), 0.0);
  c[static_cast<std::size_t>(j)] = t;
  return GroupElement(std::move(c));
}

GroupElement Nilmanifold::basis_element(int j, const Rational& t) const {
  std::vector<Rational> c(static_cast<std::size_t>(spec_.dim), Rational(0));
  c[static_cast<std::size_t>(j)] = t;
  return GroupElement(std::move(c));
}

void Nilmanifold::check_dim(const GroupElement& g) const {
  if (g.dim() != spec_.dim)
    throw Error(ErrorKind::DimensionMismatch,
                "element of dimension " + std::to_string(g.dim()) + " on a " + std::to_string(spec_.dim) +
                    "-dimensional group");
}

GroupElement Nilmanifold::mul(const GroupElement& a, const GroupElement& b) const {
  check_dim(a);
  check_dim(b);
  const int m = spec_.dim;
  const bool exact = a.is_exact() && b.is_exact();
  if (abelian_) {
    if (exact) {
      std::vector<Rational> r(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) r[i] = a.exact()[i] + b.exact()[i];
      return GroupElement(std::move(r));
    }
    std::vector<double> r(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) r[i] = a[i] + b[i];
    return GroupElement(std::move(r));
  }
  if (spec_.family == Family::heisenberg) {
    if (exact) {
      const auto& x = a.exact();
      const auto& y = b.exact();
      return GroupElement(std::vector<Rational>{x[0] + y[0], x[1] + y[1], x[2] + y[2] + dense_[idx(0, 1, 2)] * x[0] * y[1]});
    }
    return GroupElement(std::vector<double>{a[0] + b[0], a[1] + b[1], a[2] + b[2] + dense_d_[idx(0, 1, 2)] * a[0] * b[1]});
  }
  if (exact) return GroupElement(law_->eval_mul(a.exact(), b.exact()));
  return GroupElement(law_->eval_mul(a.coords(), b.coords()));
}

GroupElement Nilmanifold::inv(const GroupElement& a) const {
  check_dim(a);
  const int m = spec_.dim;
  if (abelian_) {
    if (a.is_exact()) {
      std::vector<Rational> r(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) r[i] = -a.exact()[i];
      return GroupElement(std::move(r));
    }
    std::vector<double> r(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) r[i] = -a[i];
    return GroupElement(std::move(r));
  }
  if (spec_.family == Family::heisenberg) {
    if (a.is_exact()) {
      const auto& x = a.exact();
      return GroupElement(std::vector<Rational>{-x[0], -x[1], -x[2] + dense_[idx(0, 1, 2)] * x[0] * x[1]});
    }
    return GroupElement(std::vector<double>{-a[0], -a[1], -a[2] + dense_d_[idx(0, 1, 2)] * a[0] * a[1]});
  }
  if (a.is_exact()) return GroupElement(law_->eval_inv(a.exact()));
  return GroupElement(law_->eval_inv(a.coords()));
}

GroupElement Nilmanifold::pow(const GroupElement& a, const BigInt& k) const {
  check_dim(a);
  const int m = spec_.dim;
  if (abelian_ || spec_.family == Family::heisenberg) {
    if (a.is_exact()) {
      const Rational kr(k);
      std::vector<Rational> r(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) r[i] = kr * a.exact()[i];
      if (!abelian_) r[2] += Rational(binomial(k, 2)) * dense_[idx(0, 1, 2)] * a.exact()[0] * a.exact()[1];
      return GroupElement(std::move(r));
    }
    const double kd = k.convert_to<double>();
    std::vector<double> r(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) r[i] = kd * a[i];
    if (!abelian_) r[2] += binomial(k, 2).convert_to<double>() * dense_d_[idx(0, 1, 2)] * a[0] * a[1];
    return GroupElement(std::move(r));
  }
  GroupElement base = k < 0 ? inv(a) : a;
  BigInt e = k < 0 ? BigInt(-k) : k;
  GroupElement acc = a.is_exact() ? identity() : GroupElement(std::vector<double>(static_cast<std::size_t>(m), 0.0));
  while (e > 0) {
    if (bit_test(e, 0)) acc = mul(acc, base);
    e >>= 1;
    if (e > 0) base = mul(base, base);
  }
  return acc;
}

Reduction Nilmanifold::reduce(const GroupElement& x) const {
  check_dim(x);
  const int m = spec_.dim;
  if (x.is_exact()) {
    std::vector<Rational> t(static_cast<std::size_t>(m));
    GroupElement y = x;
    for (int j = 0; j < m; ++j) {
      const BigInt f = floor_big(y.exact()[j]);
      t[j] = Rational(f);
      if (f != 0) y = mul(y, basis_element(j, Rational(-f)));
    }
    return {GroupElement(std::move(t)), std::move(y)};
  }
  std::vector<double> t(static_cast<std::size_t>(m));
  GroupElement y = x;
  for (int j = 0; j < m; ++j) {
    const double f = std::floor(y[j]);
    t[j] = f;
    std::vector<double> c;
    if (f != 0.0) {
      c = mul(y, basis_element(j, -f)).coords();
    } else {
      c = y.coords();
    }
    if (c[j] >= 1.0 || c[j] < 0.0) c[j] = 0.0;
    y = GroupElement(std::move(c));
  }
  return {GroupElement(std::move(t)), std::move(y)};
}

double Nilmanifold::dist(const GroupElement& a, const GroupElement& b) const {
  check_dim(a);
  check_dim(b);
  if (a.coords() == b.coords()) return 0.0;
  const auto q1 = mul(a, inv(b));
  const auto q2 = mul(b, inv(a));
  double d = 0.0;
  for (int i = 0; i < spec_.dim; ++i) d = std::max({d, std::abs(q1[i]), std::abs(q2[i])});
  return d;
}

double Nilmanifold::subgroup_defect(const GroupElement& g, int i) const {
  check_dim(g);
  const int lead = spec_.dim - filtration_dim(i);
  double d = 0.0;
  for (int a = 0; a < lead; ++a) d = std::max(d, std::abs(g[a]));
  return d;
}

bool Nilmanifold::in_subgroup(const GroupElement& g, int i, double tol) const {
  if (g.is_exact()) {
    check_dim(g);
    const int lead = spec_.dim - filtration_dim(i);
    for (int a = 0; a < lead; ++a)
      if (g.exact()[a] != 0) return false;
    return true;
  }
  return subgroup_defect(g, i) <= tol;
}

ManifoldPtr build_nilmanifold(NilmanifoldSpec spec) { return std::make_shared<const Nilmanifold>(std::move(spec)); }

GroupElement ProductManifold::pair(const GroupElement& a, const GroupElement& b) const {
  const int m = manifold->dim();
  if (a.dim() != static_cast<int>(left.size()) || b.dim() != static_cast<int>(right.size()))
    throw Error(ErrorKind::DimensionMismatch, "factor dimensions do not match the product");
  if (a.is_exact() && b.is_exact()) {
    std::vector<Rational> c(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < left.size(); ++i) c[left[i]] = a.exact()[i];
    for (std::size_t i = 0; i < right.size(); ++i) c[right[i]] = b.exact()[i];
    return GroupElement(std::move(c));
  }
  std::vector<double> c(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < left.size(); ++i) c[left[i]] = a[static_cast<int>(i)];
  for (std::size_t i = 0; i < right.size(); ++i) c[right[i]] = b[static_cast<int>(i)];
  return GroupElement(std::move(c));
}

std::pair<GroupElement, GroupElement> ProductManifold::split(const GroupElement& x) const {
  manifold->check_dim(x);
  if (x.is_exact()) {
    std::vector<Rational> a, b;
    for (int i : left) a.push_back(x.exact()[i]);
    for (int i : right) b.push_back(x.exact()[i]);
    return {GroupElement(std::move(a)), GroupElement(std::move(b))};
  }
  std::vector<double> a, b;
  for (int i : left) a.push_back(x[i]);
  for (int i : right) b.push_back(x[i]);
  return {GroupElement(std::move(a)), GroupElement(std::move(b))};
}

ProductManifold product_manifold(const Nilmanifold& a, const Nilmanifold& b) {
  ProductManifold out;
  const int ma = a.dim(), mb = b.dim();
  const int deg = std::max(a.degree(), b.degree());
  out.left.assign(static_cast<std::size_t>(ma), -1);
  out.right.assign(static_cast<std::size_t>(mb), -1);
  int next = 0;
  for (int lv = 1; lv <= deg; ++lv) {
    for (int i = 0; i < ma; ++i)
      if (a.level(i) == lv) out.left[i] = next++;
    for (int i = 0; i < mb; ++i)
      if (b.level(i) == lv) out.right[i] = next++;
  }

  NilmanifoldSpec s;
  s.dim = ma + mb;
  s.degree = deg;
  for (int i = 1; i <= deg; ++i) s.filtration_dims.push_back(a.filtration_dim(i) + b.filtration_dim(i));
  for (const auto& c : a.spec().structure_constants)
    s.structure_constants.push_back({out.left[c.i], out.left[c.j], out.left[c.k], c.value});
  for (const auto& c : b.spec().structure_constants)
    s.structure_constants.push_back({out.right[c.i], out.right[c.j], out.right[c.k], c.value});
  s.rationality_height = std::max(a.spec().rationality_height, b.spec().rationality_height);
  s.family = (a.is_abelian() && b.is_abelian()) ? Family::torus : Family::generic;
  out.manifold = build_nilmanifold(std::move(s));
  return out;
}

}  // namespace nilcorr
