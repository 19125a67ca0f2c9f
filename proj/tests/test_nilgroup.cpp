#include "doctest.h"
#include "nilcorr/errors.hpp"
#include "nilcorr/nilgroup.hpp"

#include <array>
#include <cmath>
#include <random>

using namespace nilcorr;

namespace {

using Mat3 = std::array<std::array<Rational, 3>, 3>;

Mat3 heis_matrix(const std::vector<Rational>& c) {
  Mat3 m{};
  for (int i = 0; i < 3; ++i) m[i][i] = 1;
  m[0][1] = c[0];
  m[1][2] = c[1];
  m[0][2] = c[2];
  return m;
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

std::vector<Rational> heis_coords(const Mat3& m) { return {m[0][1], m[1][2], m[0][2]}; }

Rational rand_rat(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-50, 50), den(1, 12);
  return Rational(num(rng), den(rng));
}

// Unitriangular 4x4 group with basis E12, E23, E34, E13, E24, E14.
NilmanifoldSpec n4_spec() {
  NilmanifoldSpec s;
  s.dim = 6;
  s.degree = 3;
  s.filtration_dims = {6, 3, 1};
  s.structure_constants = {{0, 1, 3, Rational(1)}, {1, 2, 4, Rational(1)}, {0, 4, 5, Rational(1)}, {2, 3, 5, Rational(-1)}};
  s.rationality_height = 1;
  s.family = Family::generic;
  return s;
}

using Mat4 = std::array<std::array<double, 4>, 4>;

Mat4 mat4_identity() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
  Mat4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

// exp(w_6 X_6) ... exp(w_1 X_1); each exp(t E_ij) = I + t E_ij.
Mat4 n4_matrix(const std::vector<double>& w) {
  const int rows[6] = {0, 1, 2, 0, 1, 0};
  const int cols[6] = {1, 2, 3, 2, 3, 3};
  Mat4 m = mat4_identity();
  for (int j = 5; j >= 0; --j) {
    Mat4 e = mat4_identity();
    e[rows[j]][cols[j]] = w[j];
    m = mat4_mul(m, e);
  }
  return m;
}

}  // namespace

TEST_CASE("torus group is abelian addition") {
  auto t = build_nilmanifold(torus_spec(1));
  CHECK(t->is_abelian());
  auto r = t->mul(GroupElement(std::vector<double>{0.25}), GroupElement(std::vector<double>{1.5}));
  CHECK(r[0] == doctest::Approx(1.75));
}

TEST_CASE("heisenberg law matches unitriangular matrices") {
  auto h = build_nilmanifold(heisenberg_spec());
  auto a = GroupElement(std::vector<Rational>{1, 0, 0});
  auto b = GroupElement(std::vector<Rational>{0, 1, 0});
  auto ab = h->mul(a, b);
  CHECK(ab.exact() == std::vector<Rational>{1, 1, 1});
  auto i = h->inv(GroupElement(std::vector<Rational>{1, 1, 1}));
  CHECK(i.exact() == std::vector<Rational>{-1, -1, 0});

  std::mt19937_64 rng(7);
  for (int t = 0; t < 500; ++t) {
    std::vector<Rational> x{rand_rat(rng), rand_rat(rng), rand_rat(rng)};
    std::vector<Rational> y{rand_rat(rng), rand_rat(rng), rand_rat(rng)};
    auto got = h->mul(GroupElement(x), GroupElement(y));
    CHECK(got.exact() == heis_coords(matmul(heis_matrix(x), heis_matrix(y))));
    auto gi = h->inv(GroupElement(x));
    auto id = matmul(heis_matrix(x), heis_matrix(gi.exact()));
    CHECK(heis_coords(id) == std::vector<Rational>{0, 0, 0});
  }
}

TEST_CASE("generic BCH law reproduces the heisenberg closed form") {
  auto spec = heisenberg_spec();
  spec.family = Family::generic;
  auto g = build_nilmanifold(spec);
  auto h = build_nilmanifold(heisenberg_spec());
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    std::vector<Rational> x{rand_rat(rng), rand_rat(rng), rand_rat(rng)};
    std::vector<Rational> y{rand_rat(rng), rand_rat(rng), rand_rat(rng)};
    CHECK(g->mul(GroupElement(x), GroupElement(y)).exact() == h->mul(GroupElement(x), GroupElement(y)).exact());
    CHECK(g->inv(GroupElement(x)).exact() == h->inv(GroupElement(x)).exact());
  }
}

TEST_CASE("class-3 generic law is a homomorphism into 4x4 matrices") {
  auto g = build_nilmanifold(n4_spec());
  CHECK(g->nilpotency_class() == 3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(6), b(6);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    auto prod = g->mul(GroupElement(a), GroupElement(b));
    auto lhs = n4_matrix(prod.coords());
    auto rhs = mat4_mul(n4_matrix(a), n4_matrix(b));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(lhs[i][j] - rhs[i][j]));
    auto inv = g->inv(GroupElement(a));
    auto id = mat4_mul(n4_matrix(a), n4_matrix(inv.coords()));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(id[i][j] - (i == j ? 1.0 : 0.0)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("associativity and identity for every family") {
  std::vector<NilmanifoldSpec> specs{torus_spec(2), heisenberg_spec(), n4_spec()};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& s : specs) {
    auto g = build_nilmanifold(s);
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
      std::vector<double> a(g->dim()), b(g->dim()), c(g->dim());
      for (auto& v : a) v = u(rng);
      for (auto& v : b) v = u(rng);
      for (auto& v : c) v = u(rng);
      GroupElement A(a), B(b), C(c);
      auto l = g->mul(g->mul(A, B), C);
      auto r = g->mul(A, g->mul(B, C));
      auto e = g->mul(A, GroupElement(std::vector<double>(g->dim(), 0.0)));
      for (int i = 0; i < g->dim(); ++i) {
        worst = std::max(worst, std::abs(l[i] - r[i]));
        CHECK(e[i] == a[i]);
      }
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("lattice closure on the exact path") {
  auto g = build_nilmanifold(n4_spec());
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(-9, 9);
  for (int t = 0; t < 200; ++t) {
    std::vector<Rational> a(6), b(6);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    CHECK(g->mul(GroupElement(a), GroupElement(b)).in_lattice());
    CHECK(g->inv(GroupElement(a)).in_lattice());
  }
}

TEST_CASE("powers agree with repeated multiplication") {
  auto h = build_nilmanifold(heisenberg_spec());
  auto g = build_nilmanifold(n4_spec());
  GroupElement x(std::vector<Rational>{Rational(1, 3), Rational(2, 5), Rational(-1, 7)});
  GroupElement acc = h->identity();
  for (int k = 1; k <= 6; ++k) {
    acc = h->mul(acc, x);
    CHECK(h->pow(x, k).exact() == acc.exact());
  }
  CHECK(h->pow(x, -3).exact() == h->inv(h->pow(x, 3)).exact());
  GroupElement y(std::vector<Rational>{1, Rational(1, 2), 2, Rational(-1, 3), 0, 1});
  GroupElement acc2 = g->identity();
  for (int k = 1; k <= 5; ++k) acc2 = g->mul(acc2, y);
  CHECK(g->pow(y, 5).exact() == acc2.exact());
}

TEST_CASE("validation errors name the offending triple") {
  auto s = torus_spec(3);
  s.structure_constants = {{0, 1, 2, Rational(2)}};
  s.family = Family::generic;
  s.degree = 2;
  s.filtration_dims = {3, 1};
  s.rationality_height = 1;
  try {
    build_nilmanifold(s);
    FAIL("expected HeightExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HeightExceeded);
    CHECK(e.data() == std::vector<std::int64_t>{1, 2, 3});
  }

  NilmanifoldSpec j;
  j.dim = 5;
  j.degree = 3;
  j.filtration_dims = {5, 2, 1};
  j.structure_constants = {{0, 1, 3, Rational(1)}, {3, 2, 4, Rational(1)}};
  j.family = Family::generic;
  try {
    build_nilmanifold(j);
    FAIL("expected JacobiViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Jacobi);
    CHECK(e.data() == std::vector<std::int64_t>{1, 2, 3});
  }

  auto f = heisenberg_spec();
  f.filtration_dims = {3, 3};
  f.structure_constants = {{1, 2, 0, Rational(1)}};
  f.family = Family::generic;
  CHECK_THROWS_AS(build_nilmanifold(f), Error);

  auto d = heisenberg_spec();
  d.degree = 1;
  d.filtration_dims = {3};
  try {
    build_nilmanifold(d);
    FAIL("expected FiltrationViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Filtration);
  }

  auto a = heisenberg_spec();
  a.structure_constants.push_back({1, 0, 2, Rational(1)});
  CHECK_THROWS_AS(build_nilmanifold(a), Error);
}

TEST_CASE("reduce returns a fundamental-domain representative") {
  auto t = build_nilmanifold(torus_spec(1));
  auto r = t->reduce(GroupElement(std::vector<double>{2.75}));
  CHECK(r.gamma[0] == 2.0);
  CHECK(r.frac[0] == doctest::Approx(0.75));

  auto h = build_nilmanifold(heisenberg_spec());
  GroupElement x(std::vector<double>{1.5, 2.25, 3.1});
  auto rh = h->reduce(x);
  CHECK(rh.gamma.in_lattice());
  for (int i = 0; i < 3; ++i) {
    CHECK(rh.frac[i] >= 0.0);
    CHECK(rh.frac[i] < 1.0);
  }
  auto back = h->mul(rh.frac, rh.gamma);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
  auto again = h->reduce(rh.frac);
  for (int i = 0; i < 3; ++i) {
    CHECK(again.gamma[i] == 0.0);
    CHECK(again.frac[i] == rh.frac[i]);
  }

  auto lat = h->reduce(GroupElement(std::vector<Rational>{3, -2, 5}));
  CHECK(lat.gamma.exact() == std::vector<Rational>{3, -2, 5});
  CHECK(lat.frac.exact() == std::vector<Rational>{0, 0, 0});

  auto g = build_nilmanifold(n4_spec());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> c(6);
    for (auto& v : c) v = u(rng);
    auto rg = g->reduce(GroupElement(c));
    auto b = g->mul(rg.frac, rg.gamma);
    for (int i = 0; i < 6; ++i) {
      CHECK(std::abs(b[i] - c[i]) < 1e-9);
      CHECK(rg.frac[i] >= 0.0);
      CHECK(rg.frac[i] < 1.0);
    }
  }
}

TEST_CASE("distance surrogate") {
  auto t = build_nilmanifold(torus_spec(1));
  CHECK(t->dist(GroupElement(std::vector<double>{0.2}), GroupElement(std::vector<double>{0.5})) ==
        doctest::Approx(0.3));
  auto h = build_nilmanifold(heisenberg_spec());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> a(3), b(3), g(3);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    for (auto& v : g) v = u(rng);
    GroupElement A(a), B(b), G(g);
    CHECK(h->dist(A, A) == 0.0);
    worst = std::max(worst, std::abs(h->dist(A, B) - h->dist(B, A)));
    worst = std::max(worst, std::abs(h->dist(h->mul(A, G), h->mul(B, G)) - h->dist(A, B)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("product manifold interleaves by level") {
  auto h = build_nilmanifold(heisenberg_spec());
  auto p = product_manifold(*h, *h);
  CHECK(p.manifold->dim() == 6);
  CHECK(p.manifold->filtration_dim(2) == 2);
  CHECK(p.left == std::vector<int>{0, 1, 4});
  CHECK(p.right == std::vector<int>{2, 3, 5});
  GroupElement a(std::vector<Rational>{1, 2, 3}), b(std::vector<Rational>{Rational(1, 2), 5, 7});
  GroupElement c(std::vector<Rational>{-1, 1, 0}), d(std::vector<Rational>{2, 0, 1});
  auto prod = p.manifold->mul(p.pair(a, b), p.pair(c, d));
  auto [l, r] = p.split(prod);
  CHECK(l.exact() == h->mul(a, c).exact());
  CHECK(r.exact() == h->mul(b, d).exact());
}

TEST_CASE("dimension mismatch is reported") {
  auto h = build_nilmanifold(heisenberg_spec());
  CHECK_THROWS_AS(h->mul(GroupElement(std::vector<double>{1.0}), h->identity()), Error);
}
