#include "doctest.h"
#include "nilcorr/correlate.hpp"
#include "nilcorr/errors.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

using namespace nilcorr;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

ManifoldPtr circle() { return build_nilmanifold(torus_spec(1, 1)); }

PolySequence linear(double alpha) { return torus_sequence(circle(), std::vector<std::vector<double>>{{0.0}, {alpha}}); }

PolySequence heis_seq(double a, double b, double c) {
  auto h = build_nilmanifold(heisenberg_spec());
  return make_poly_sequence(h, {GroupElement(std::vector<double>{0.0, 0.0, 0.0}),
                                GroupElement(std::vector<double>{a, b, 0.0}),
                                GroupElement(std::vector<double>{0.0, 0.0, c})});
}

TestFunction heis_F() {
  return TestFunction::product(
      {TestFunction::vertical_character(3, 1), TestFunction::bump(0), TestFunction::bump(1)});
}

// phi(W)/(W N) sum (f(Wn+b) - mean) F(g(n)) through poly_eval, no walker.
Complex naive_sum(const MultFuncTable& f, const PolySequence& g, const TestFunction& F, std::int64_t N, std::int64_t W,
                  std::int64_t b) {
  std::complex<long double> mean = 0, s = 0;
  for (std::int64_t n = 1; n <= N; ++n) mean += std::complex<long double>(f(W * n + b));
  mean /= static_cast<long double>(N);
  for (std::int64_t n = 1; n <= N; ++n) {
    const Complex x = F.eval(*g.manifold, poly_eval(g, n));
    s += (std::complex<long double>(f(W * n + b)) - mean) * std::complex<long double>(x);
  }
  std::int64_t phi = 0;
  for (std::int64_t k = 1; k <= W; ++k) phi += std::gcd(k, W) == 1;
  s *= static_cast<long double>(phi) / (static_cast<long double>(W) * N);
  return Complex(static_cast<double>(s.real()), static_cast<double>(s.imag()));
}

MultFuncTable indicator_one(std::int64_t N) {
  std::vector<double> v(static_cast<std::size_t>(N), 0.0);
  v[0] = 1.0;
  return real_table(FuncKind::custom, v);
}

bool same_bits(Complex a, Complex b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("hand value for the indicator of 1") {
  auto f = indicator_one(20);
  auto r = correlation_sum(f, linear(0.5), TestFunction::character({1}), 10, 1, 0);
  // e(n/2) = (-1)^n, mean 1/10: (1/10)(-0.9 - 0.1 * sum_{n=2}^{10} (-1)^n) = -1/10
  CHECK(r.mean_f.real() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(std::abs(r.S - Complex(-0.1, 0.0)) < 1e-14);
}

TEST_CASE("brute force agreement") {
  auto mu = sieve_mobius(40000);
  auto tau = normalize_gl2(tau_table(40000));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const auto& f = trial % 2 ? tau : mu;
    const std::int64_t N = 200 + static_cast<std::int64_t>(rng() % 800);
    const std::int64_t W = std::vector<std::int64_t>{1, 2, 6, 30}[trial % 4];
    std::int64_t b = 1 + static_cast<std::int64_t>(rng() % W);
    while (std::gcd(b, W) != 1) ++b;
    PolySequence g;
    TestFunction F = TestFunction::constant(1.0);
    if (trial % 3 == 0) {
      g = linear(u(rng));
      F = TestFunction::character({1});
    } else if (trial % 3 == 1) {
      g = torus_sequence(build_nilmanifold(torus_spec(1, 2)),
                         std::vector<std::vector<double>>{{u(rng)}, {u(rng)}, {u(rng)}});
      F = TestFunction::product({TestFunction::character({2}), TestFunction::bump(0)});
    } else {
      g = heis_seq(u(rng), u(rng), u(rng));
      F = heis_F();
    }
    CorrelationOptions opt;
    opt.chunk_size = 97;
    auto r = correlation_sum(f, g, F, N, W, b, opt);
    CHECK(std::abs(r.S - naive_sum(f, g, F, N, W, b)) < 1e-10);
    CHECK(r.decay_stat >= 0.0);
  }
}

TEST_CASE("constant test functions give exactly zero") {
  auto mu = sieve_mobius(50000);
  auto lam = sieve_liouville(50000);
  auto tau = normalize_gl2(tau_table(50000));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const MultFuncTable& f = trial % 3 == 0 ? mu : trial % 3 == 1 ? lam : tau;
    const std::int64_t W = 1 + static_cast<std::int64_t>(rng() % 12);
    std::int64_t b = static_cast<std::int64_t>(rng() % W) + 1;
    while (std::gcd(b, W) != 1) ++b;
    const std::int64_t N = 10 + static_cast<std::int64_t>(rng() % 3000);
    auto g = trial % 2 ? linear(u(rng)) : heis_seq(u(rng), u(rng), u(rng));
    auto r = correlation_sum(f, g, TestFunction::constant(1.0), N, W, b);
    CHECK(r.S == Complex(0.0, 0.0));
    auto shifted = correlation_sum(f, g, TestFunction::sum({TestFunction::constant(2.5), TestFunction::bump(0)}), N, W, b);
    auto plain = correlation_sum(f, g, TestFunction::bump(0), N, W, b);
    CHECK(same_bits(shifted.S, plain.S));
  }
}

TEST_CASE("linearity in F") {
  auto mu = sieve_mobius(10000);
  auto g = heis_seq(kGolden, std::sqrt(2.0) - 1.0, 0.3);
  auto F1 = heis_F();
  auto F2 = TestFunction::character({1, -1, 0});
  auto s1 = correlation_sum(mu, g, F1, 5000, 1, 0).S;
  auto s2 = correlation_sum(mu, g, F2, 5000, 1, 0).S;
  auto s12 = correlation_sum(mu, g, TestFunction::sum({F1, F2}), 5000, 1, 0).S;
  CHECK(std::abs(s12 - (s1 + s2)) < 1e-9);
}

TEST_CASE("thread count does not change the bits") {
  auto mu = sieve_mobius(300000);
  auto g = heis_seq(kGolden, 0.1234, 0.77);
  CorrelationOptions one, many;
  one.threads = 1;
  many.threads = 4;
  one.chunk_size = many.chunk_size = 4096;
  auto a = correlation_sum(mu, g, heis_F(), 250000, 1, 1, one);
  auto b = correlation_sum(mu, g, heis_F(), 250000, 1, 1, many);
  CHECK(same_bits(a.S, b.S));
  CorrelationOptions other = one;
  other.chunk_size = 1000;
  auto c = correlation_sum(mu, g, heis_F(), 250000, 1, 1, other);
  CHECK(std::abs(a.S - c.S) < 1e-12);
}

TEST_CASE("moebius against a golden-ratio phase") {
  auto mu = sieve_mobius(1000001);
  auto r = correlation_sum(mu, linear(kGolden), TestFunction::character({1}), 1000000, 1, 1);
  CHECK(std::abs(r.S) < 1e-2);
  CHECK(r.lip_estimate > 1.0);
}

TEST_CASE("errors") {
  auto mu = sieve_mobius(1000);
  auto g = linear(0.3);
  auto F = TestFunction::character({1});
  CHECK_THROWS_AS(correlation_sum(mu, g, F, 100, 4, 2), Error);
  try {
    correlation_sum(mu, g, F, 100, 4, 2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonCoprime);
  }
  try {
    correlation_sum(mu, g, F, 1000, 1, 1);
    FAIL("expected TableTooShort");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TableTooShort);
  }
  try {
    correlation_sum(mu, g, TestFunction::coord(2), 100, 1, 1);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  CHECK_THROWS_AS(decay_scan(mu, g, F, {100, 50}, 1, 1), Error);
}

TEST_CASE("decay scan") {
  auto mu = sieve_mobius(100000);
  auto g = linear(kGolden);
  auto F = TestFunction::character({1});
  auto one = decay_scan(mu, g, F, {10}, 1, 1);
  REQUIRE(one.size() == 1);
  CHECK(same_bits(one[0].S, correlation_sum(mu, g, F, 10, 1, 1).S));
  auto many = decay_scan(mu, g, F, {1000, 10000, 99999}, 1, 1);
  CHECK(many.size() == 3);
  auto csv = to_csv(many);
  CHECK(csv.rfind("N,W,b,re_S,im_S,abs_S,decay_stat,lip_estimate,runtime_ms\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("log-weighted decomposition") {
  SUBCASE("moebius, small N, against trial division") {
    auto mu = sieve_mobius(200);
    auto g = linear(kGolden);
    auto F = TestFunction::character({1});
    auto d = log_weight_decompose(mu, g, F, 100, 1, 0);
    CHECK(d.U == 21);  // 21^3 = 9261 <= 10^4 < 22^3
    std::complex<long double> total = 0, small = 0, large = 0;
    for (std::int64_t n = 1; n <= 100; ++n) {
      const Complex w = F.eval(*g.manifold, poly_eval(g, n));
      total += std::log(static_cast<long double>(n)) * static_cast<long double>(mu.re(n)) * std::complex<long double>(w);
      for (std::int64_t p = 2; p <= n; ++p) {
        bool prime = true;
        for (std::int64_t q = 2; q * q <= p; ++q) prime = prime && p % q;
        if (!prime || n % p) continue;
        const auto t = std::log(static_cast<long double>(p)) * static_cast<long double>(mu.re(p) * mu.re(n / p)) *
                       std::complex<long double>(w);
        (p <= 21 ? small : large) += t;
      }
    }
    CHECK(std::abs(d.total - Complex(total)) < 1e-9);
    CHECK(std::abs(d.small_prime_part - Complex(small)) < 1e-9);
    CHECK(std::abs(d.large_prime_part - Complex(large)) < 1e-9);
    CHECK(std::abs(d.reassembled() - d.total) < 1e-9);
    Complex dy = 0;
    for (const auto& r : d.dyadic_breakdown) dy += r.value;
    CHECK(std::abs(dy - d.small_prime_part - d.large_prime_part) < 1e-9);
  }
  SUBCASE("constant function has no nonsplit terms") {
    auto one = real_table(FuncKind::custom, std::vector<double>(5000, 1.0));
    auto d = log_weight_decompose(one, heis_seq(0.3, 0.4, 0.5), heis_F(), 4000, 1, 1);
    CHECK(d.nonsplit_part == Complex(0.0, 0.0));
    CHECK(d.relative_error() < 1e-9);
  }
  SUBCASE("tau with a W-trick") {
    auto tau = normalize_gl2(tau_table(200000));
    auto d = log_weight_decompose(tau, linear(kGolden), TestFunction::character({1}), 30000, 6, 5);
    CHECK(d.relative_error() < 1e-6);
    CHECK(std::abs(d.nonsplit_part) > 0.0);
  }
}

TEST_CASE("divisor identities") {
  CHECK(von_mangoldt_log_identity(1) == 0.0);
  CHECK(von_mangoldt_log_identity(10000) < 1e-9);
  CHECK(vaughan_check(27) < 1e-9);
  CHECK(vaughan_check(1000) < 1e-9);
  CHECK(vaughan_check(20000) < 1e-9);
  CHECK_THROWS_AS(vaughan_check(26), Error);
  CHECK(icbrt(26) == 2);
  CHECK(icbrt(27) == 3);
  CHECK(icbrt(1000000) == 100);
}
