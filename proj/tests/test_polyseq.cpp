#include "doctest.h"
#include "nilcorr/errors.hpp"
#include "nilcorr/polyseq.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <set>

using namespace nilcorr;

namespace {

using Mat3 = std::array<std::array<Rational, 3>, 3>;

Mat3 heis(const std::vector<Rational>& c) {
  Mat3 m{};
  for (int i = 0; i < 3; ++i) m[i][i] = 1;
  m[0][1] = c[0];
  m[1][2] = c[1];
  m[0][2] = c[2];
  return m;
}

Mat3 mm(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

PolySequence heis_quadratic(ManifoldPtr h) {
  return make_poly_sequence(h, {GroupElement(std::vector<double>{0.1, 0.2, 0.3}),
                                GroupElement(std::vector<double>{0.7071, 0.3183, 0.25}),
                                GroupElement(std::vector<double>{0.0, 0.0, 0.618})});
}

}  // namespace

TEST_CASE("poly_eval basics") {
  auto t = build_nilmanifold(torus_spec(1));
  auto g = torus_sequence(t, std::vector<std::vector<Rational>>{{0}, {Rational(1, 3)}});
  CHECK(poly_eval(g, 0).exact()[0] == 0);
  auto v = poly_eval(g, 5);
  CHECK(t->reduce(v).frac.exact()[0] == Rational(2, 3));
  CHECK_THROWS_AS(poly_eval(g, BigInt(kMaxEvalIndex) + 1), Error);
}

TEST_CASE("heisenberg poly_eval against the matrix oracle") {
  auto h = build_nilmanifold(heisenberg_spec());
  auto g = make_poly_sequence(h, {GroupElement::identity(3), GroupElement(std::vector<Rational>{1, 0, 0}),
                                  GroupElement(std::vector<Rational>{0, 0, 1})});
  // g(3) = g_1^3 g_2^3
  Mat3 m = heis({0, 0, 0});
  for (int i = 0; i < 3; ++i) m = mm(m, heis({1, 0, 0}));
  for (int i = 0; i < 3; ++i) m = mm(m, heis({0, 0, 1}));
  auto v = poly_eval(g, 3);
  CHECK(v.exact() == std::vector<Rational>{m[0][1], m[1][2], m[0][2]});

  auto g2 = make_poly_sequence(h, {GroupElement(std::vector<Rational>{Rational(1, 2), 3, 0}),
                                   GroupElement(std::vector<Rational>{Rational(2, 3), Rational(-1, 5), 1}),
                                   GroupElement(std::vector<Rational>{0, 0, Rational(7, 3)})});
  for (int n = -6; n <= 6; ++n) {
    Mat3 o = heis(g2.coeffs[0].exact());
    const BigInt c1 = binomial(BigInt(n), 1), c2 = binomial(BigInt(n), 2);
    auto power = [&](const std::vector<Rational>& x, BigInt k) {
      Mat3 base = heis(x);
      bool neg = k < 0;
      if (neg) {
        base = heis({-x[0], -x[1], -x[2] + x[0] * x[1]});
        k = -k;
      }
      Mat3 r = heis({0, 0, 0});
      for (BigInt i = 0; i < k; ++i) r = mm(r, base);
      return r;
    };
    o = mm(o, power(g2.coeffs[1].exact(), c1));
    o = mm(o, power(g2.coeffs[2].exact(), c2));
    CHECK(poly_eval(g2, n).exact() == std::vector<Rational>{o[0][1], o[1][2], o[0][2]});
  }
}

TEST_CASE("discrete derivatives") {
  auto t = build_nilmanifold(torus_spec(1, 2));
  const double a = 0.3819660112501051;
  auto lin = torus_sequence(t, std::vector<std::vector<double>>{{0.0}, {a}});
  auto d = discrete_derivative(lin, 4);
  CHECK(d.degree() == 0);
  CHECK(d.coeffs[0][0] == doctest::Approx(4 * a));

  auto zero = discrete_derivative(lin, 0);
  CHECK(zero.degree() == 0);
  CHECK(zero.coeffs[0][0] == 0.0);

  auto quad = torus_sequence(t, std::vector<std::vector<double>>{{0.0}, {0.0}, {a}});
  auto dq = discrete_derivative(quad, 1);
  for (int n = -20; n <= 20; ++n) CHECK(poly_eval(dq, n)[0] == doctest::Approx(a * n));

  auto h = build_nilmanifold(heisenberg_spec());
  auto g = heis_quadratic(h);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> u(-30, 30);
  for (int s = 0; s < 100; ++s) {
    const int hh = u(rng), n = u(rng), hp = u(rng);
    auto dg = discrete_derivative(g, hh);
    auto lhs = poly_eval(dg, n);
    auto rhs = h->mul(poly_eval(g, n + hh), h->inv(poly_eval(g, n)));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(lhs[i] - rhs[i]) < 1e-10);
    // cocycle: d_{h+h'} g(n) = d_h g(n+h') d_{h'} g(n)
    auto c1 = poly_eval(discrete_derivative(g, hh + hp), n);
    auto c2 = h->mul(poly_eval(discrete_derivative(g, hh), n + hp), poly_eval(discrete_derivative(g, hp), n));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(c1[i] - c2[i]) < 1e-9);
    // derivative lands in the shifted filtration
    for (int i = 1; i <= dg.degree(); ++i) CHECK(h->subgroup_defect(dg.coeffs[i], i + 1) < 1e-9);
  }
}

TEST_CASE("filtration membership") {
  auto h = build_nilmanifold(heisenberg_spec());
  auto g = heis_quadratic(h);
  const auto t0 = std::chrono::steady_clock::now();
  auto rep = check_filtration_membership(g, 1000, 3);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(rep.ok());
  CHECK(rep.checks == 2000);
  CHECK(secs < 1.0);

  auto bad = make_poly_sequence(h,
                                {GroupElement::identity(3), GroupElement(std::vector<double>{0.5, 0.25, 0.0}),
                                 GroupElement(std::vector<double>{0.3, 0.0, 0.1})},
                                false);
  auto r2 = check_filtration_membership(bad, 50, 3);
  REQUIRE(!r2.ok());
  bool level2 = false;
  for (const auto& v : r2.violations) level2 = level2 || v.level == 2;
  CHECK(level2);
  CHECK_THROWS_AS(make_poly_sequence(h, bad.coeffs), Error);
}

TEST_CASE("smoothness norm") {
  CHECK(smoothness_norm(TorusPolynomial(std::vector<double>{0.9, 0.0, 0.5}), 10) == 50.0);
  CHECK(smoothness_norm(TorusPolynomial(std::vector<double>{0.2, 3.0, -2.0}), 1000) == 0.0);
  for (int N : {2, 7, 10, 1000, 123457}) {
    CHECK(smoothness_norm(TorusPolynomial(std::vector<Rational>{0, Rational(1, N)}), N) == 1.0);
    CHECK(smoothness_norm(TorusPolynomial(std::vector<double>{0, 1.0 / N}), N) == doctest::Approx(1.0));
  }
  for (int j = 1; j <= 4; ++j) {
    std::vector<double> a(static_cast<std::size_t>(j) + 1, 0.0);
    a[j] = 0.0123456789;
    TorusPolynomial t(a);
    CHECK(smoothness_norm(t, 20) * std::pow(2.0, j) == smoothness_norm(t, 40));
  }
}

TEST_CASE("basis conversion round trip") {
  std::vector<Rational> a{Rational(1, 2), 3, Rational(-2, 7), 5};
  auto b = monomial_to_binomial(a);
  CHECK(binomial_to_monomial(b) == a);
  for (int n = -5; n <= 5; ++n) {
    Rational pa = 0, pb = 0, np = 1;
    for (std::size_t j = 0; j < a.size(); ++j) {
      pa += a[j] * np;
      np *= n;
      pb += b[j] * Rational(binomial(BigInt(n), static_cast<unsigned>(j)));
    }
    CHECK(pa == pb);
  }
}

TEST_CASE("characters") {
  auto t = build_nilmanifold(torus_spec(1));
  auto ks = enumerate_characters(*t, 2);
  REQUIRE(ks.size() == 4);
  CHECK(ks[0].k[0] == 1);
  CHECK(ks[1].k[0] == -1);
  CHECK(ks[2].k[0] == 2);
  CHECK(ks[3].k[0] == -2);

  auto h = build_nilmanifold(heisenberg_spec());
  auto hk = enumerate_characters(*h, 1);
  // brute force over all 26 nonzero vectors with the annihilation check
  std::set<std::vector<std::int64_t>> brute;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c) {
        std::vector<std::int64_t> k{a, b, c};
        if (a == 0 && b == 0 && c == 0) continue;
        if (c * 1 == 0) brute.insert(k);  // sum_k k_k c_{12k} = k_3
      }
  CHECK(hk.size() == 8);
  CHECK(brute.size() == 8);
  for (const auto& e : hk) CHECK(brute.count(e.k) == 1);
  CHECK(hk.front().modulus() == 1);
  auto h5 = enumerate_characters(*h, 5);
  for (std::size_t i = 1; i < h5.size(); ++i) CHECK(h5[i - 1].modulus() <= h5[i].modulus());
  CHECK(h5.size() == 120);

  // additivity on random pairs
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (const auto& e : h5) {
    for (int s = 0; s < 3; ++s) {
      GroupElement x(std::vector<double>{u(rng), u(rng), u(rng)}), y(std::vector<double>{u(rng), u(rng), u(rng)});
      const double lhs = char_eval(e, h->mul(x, y));
      const double rhs = char_eval(e, x) + char_eval(e, y);
      CHECK(dist_to_int(lhs - rhs) < 1e-9);
      CHECK(dist_to_int(char_eval(e, GroupElement(std::vector<double>{1.0, 0.0, 0.0}))) < 1e-12);
    }
  }
}

TEST_CASE("char_compose") {
  auto t = build_nilmanifold(torus_spec(1));
  const double a = 0.41421356237309515;
  auto g = torus_sequence(t, std::vector<std::vector<double>>{{0.0}, {a}});
  auto zero = char_compose(HorizontalCharacter{{0}}, g);
  for (double v : zero.alphas()) CHECK(v == 0.0);
  auto c3 = char_compose(HorizontalCharacter{{3}}, g);
  CHECK(c3.alphas()[0] == 0.0);
  CHECK(c3.alphas()[1] == doctest::Approx(3 * a - std::floor(3 * a)));

  auto h = build_nilmanifold(heisenberg_spec());
  auto hg = heis_quadratic(h);
  HorizontalCharacter first{{1, 0, 0}};
  auto tp = char_compose(first, hg);
  for (int n = -50; n < 50; ++n) CHECK(dist_to_int(tp.eval(n) - char_eval(first, poly_eval(hg, n))) < 1e-9);
  CHECK_THROWS_AS(char_compose(HorizontalCharacter{{0, 0, 1}}, hg), Error);
  CHECK_THROWS_AS(char_compose(HorizontalCharacter{{1}}, hg), Error);

  // additivity under pointwise products of torus sequences
  auto t2 = build_nilmanifold(torus_spec(2, 2));
  auto p = torus_sequence(t2, std::vector<std::vector<double>>{{0.1, 0.2}, {0.3, 0.7}, {0.11, 0.5}});
  auto q = torus_sequence(t2, std::vector<std::vector<double>>{{0.9, 0.4}, {0.25, 0.05}, {0.6, 0.33}});
  HorizontalCharacter e{{2, -3}};
  auto lhs = char_compose(e, pointwise_product(p, q));
  auto r1 = char_compose(e, p), r2 = char_compose(e, q);
  for (int i = 0; i <= 2; ++i) CHECK(dist_to_int(lhs.alphas()[i] - r1.alphas()[i] - r2.alphas()[i]) < 1e-9);
}
