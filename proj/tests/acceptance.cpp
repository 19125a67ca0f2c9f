// Acceptance run: one line per criterion, exit status 1 if any fails.

#include "nilcorr/correlate.hpp"
#include "nilcorr/equidist.hpp"
#include "nilcorr/io.hpp"
#include "nilcorr/orbit.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace nilcorr;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
const double kSqrt2 = std::sqrt(2.0) - 1.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TableCache& cache() {
  static std::ostringstream log;
  static TableCache c(TableCache::default_dir(), &log);
  return c;
}

// ---------------------------------------------------------------- 1

// (x,y,z) <-> [[1,x,z],[0,1,y],[0,0,1]]
template <class T>
std::array<T, 3> mat_mul(const std::array<T, 3>& a, const std::array<T, 3>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]};
}
template <class T>
std::array<T, 3> mat_inv(const std::array<T, 3>& a) {
  return {-a[0], -a[1], a[0] * a[1] - a[2]};
}

Outcome heisenberg_law() {
  auto t0 = std::chrono::steady_clock::now();
  auto h = build_nilmanifold(heisenberg_spec());
  std::mt19937_64 rng(1);
  auto rq = [&] {
    return Rational(static_cast<std::int64_t>(rng() % 2001) - 1000, static_cast<std::int64_t>(rng() % 1000) + 1);
  };
  int bad = 0;
  for (int t = 0; t < 10000; ++t) {
    std::array<Rational, 3> a{rq(), rq(), rq()}, b{rq(), rq(), rq()};
    const auto p = h->mul(GroupElement(std::vector<Rational>(a.begin(), a.end())),
                          GroupElement(std::vector<Rational>(b.begin(), b.end())));
    const auto i = h->inv(GroupElement(std::vector<Rational>(a.begin(), a.end())));
    const auto pm = mat_mul(a, b);
    const auto im = mat_inv(a);
    if (!p.is_exact() || !i.is_exact() || p.exact() != std::vector<Rational>(pm.begin(), pm.end()) ||
        i.exact() != std::vector<Rational>(im.begin(), im.end()))
      ++bad;
  }
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double err = 0.0;
  for (int t = 0; t < 10000; ++t) {
    std::array<double, 3> a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    const auto p = h->mul(GroupElement(std::vector<double>(a.begin(), a.end())),
                          GroupElement(std::vector<double>(b.begin(), b.end())));
    const auto i = h->inv(GroupElement(std::vector<double>(a.begin(), a.end())));
    const auto pm = mat_mul(a, b);
    const auto im = mat_inv(a);
    for (int k = 0; k < 3; ++k) err = std::max({err, std::abs(p[k] - pm[k]), std::abs(i[k] - im[k])});
  }
  const double s = seconds_since(t0);
  return {bad == 0 && err < 1e-12 && s < 5.0,
          fmt("rational mismatches %d/10000, float max error %.2e, %.2f s (< 5 s)", bad, err, s)};
}

// ---------------------------------------------------------------- 2, 3

Outcome vaughan() {
  auto t0 = std::chrono::steady_clock::now();
  const double e = vaughan_check(10000);
  const double s = seconds_since(t0);
  return {e < 1e-9 && s < 10.0, fmt("max_error %.3e at N = 10^4, %.2f s (< 10 s)", e, s)};
}

Outcome log_identity() {
  const double e = von_mangoldt_log_identity(10000);
  return {e < 1e-9, fmt("max_error %.3e at N = 10^4", e)};
}

// ---------------------------------------------------------------- 4

Outcome tau_cross() {
  auto t0 = std::chrono::steady_clock::now();
  const auto t = tau_table(1000000);
  const auto hecke = tau_from_hecke(t, 1000);
  int int_bad = 0;
  for (std::int64_t n = 1; n <= 1000; ++n) int_bad += hecke[n] != t.exact[n];

  const auto ext = hecke_extend(builtin_delta_spec(t), 100000);
  double norm_err = 0.0;
  for (std::int64_t n = 1; n <= 100000; ++n) norm_err = std::max(norm_err, std::abs(ext.re(n) - t.normalized[n]));

  auto big = [](__int128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    BigInt r = static_cast<std::uint64_t>(u >> 64);
    r <<= 64;
    r += static_cast<std::uint64_t>(u);
    return neg ? BigInt(-r) : r;
  };
  const auto primes = primes_up_to(1000000);
  int rec_bad = 0, rec_checked = 0;
  for (const auto p32 : primes) {
    const std::int64_t p = p32;
    if (p * p > 1000000) break;
    const BigInt p11 = boost::multiprecision::pow(BigInt(p), 11);
    const BigInt tp = big(t.exact[p]);
    std::int64_t pk = p, pkm1 = 1;
    while (pk <= 1000000 / p) {
      const BigInt lhs = tp * big(t.exact[pk]);
      const BigInt rhs = big(t.exact[pk * p]) + p11 * big(t.exact[pkm1]);
      rec_bad += lhs != rhs;
      ++rec_checked;
      pkm1 = pk;
      pk *= p;
    }
  }
  int del_bad = 0, del_checked = 0;
  for (const auto p32 : primes) {
    if (p32 > 100000) break;
    const BigInt tp = big(t.exact[p32]);
    del_bad += tp * tp > 4 * boost::multiprecision::pow(BigInt(p32), 11);
    ++del_checked;
  }
  const double s = seconds_since(t0);
  return {int_bad == 0 && norm_err < 1e-9 && rec_bad == 0 && del_bad == 0 && s < 120.0,
          fmt("integer mismatches %d (n <= 10^3), normalized max diff %.2e (n <= 10^5), Hecke relation failures "
              "%d/%d, Deligne failures %d/%d, %.1f s (< 120 s)",
              int_bad, norm_err, rec_bad, rec_checked, del_bad, del_checked, s)};
}

// ---------------------------------------------------------------- 5

Outcome rankin_selberg() {
  const auto lam = cache().get("tau", 1000000);
  long double s = 0, s5 = 0;
  for (std::int64_t n = 1; n <= 1000000; ++n) {
    s += static_cast<long double>(lam.re(n)) * lam.re(n);
    if (n == 100000) s5 = s;
  }
  const double a = static_cast<double>(s5 / 1e5), b = static_cast<double>(s / 1e6);
  const double rel = std::abs(a - b) / b;
  return {rel < 0.10, fmt("mean |lambda|^2: %.6f at 10^5, %.6f at 10^6, relative difference %.4f (< 0.10)", a, b, rel)};
}

// ---------------------------------------------------------------- 6

// min_{1<=k<=K} ||k alpha|| via the continued fraction convergents of alpha
double cf_min_distance(long double alpha, std::int64_t K) {
  long double x = alpha;
  std::int64_t p0 = 1, q0 = 0, p1 = 0, q1 = 1;
  double best = 1.0;
  for (int it = 0; it < 60; ++it) {
    x = 1.0L / (x - std::floor(x));
    const auto a = static_cast<std::int64_t>(std::floor(x));
    const std::int64_t p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > K) break;
    best = static_cast<double>(std::abs(q2 * alpha - p2));
    p0 = p1, q0 = q1, p1 = p2, q1 = q2;
  }
  return best;
}

Outcome leibman() {
  auto t0 = std::chrono::steady_clock::now();
  auto circle = build_nilmanifold(torus_spec(1, 1));
  int bad = 0, total = 0;
  for (std::int64_t q = 1; q <= 50; ++q)
    for (std::int64_t p = 0; p < q; ++p) {
      auto g = torus_sequence(circle, std::vector<std::vector<Rational>>{{Rational(0)}, {Rational(p, q)}});
      const auto w = leibman_search(g, 1e5, 50, 0.0);
      ++total;
      if (!w || w->character.modulus() != q / std::gcd(p, q)) ++bad;
    }
  auto g = torus_sequence(circle, std::vector<std::vector<double>>{{0.0}, {kGolden}});
  const auto w = leibman_search(g, 1e5, 50, 1.0);
  const double oracle = 1e5 * cf_min_distance(static_cast<long double>(kGolden), 50);
  const bool oracle_none = oracle > 1.0;
  const double s = seconds_since(t0);
  return {bad == 0 && !w && oracle_none && s < 5.0,
          fmt("rational wrong moduli %d/%d; golden ratio witness %s, oracle min N||k alpha|| = %.1f; %.2f s (< 5 s)",
              bad, total, w ? "found" : "none", oracle, s)};
}

// ---------------------------------------------------------------- 7, 8

struct Case {
  std::string name;
  PolySequence g;
  TestFunction F;
};

std::vector<Case> trend_cases() {
  std::vector<Case> out;
  out.push_back({"linear e(n phi)", torus_sequence(build_nilmanifold(torus_spec(1, 1)),
                                                   std::vector<std::vector<double>>{{0.0}, {kGolden}}),
                 TestFunction::character({1})});
  out.push_back({"quadratic torus", torus_sequence(build_nilmanifold(torus_spec(1, 2)),
                                                   std::vector<std::vector<double>>{{0.0}, {kGolden}, {kSqrt2}}),
                 TestFunction::character({1})});
  // g(n) = (n beta, n alpha, 0) corrected by -C(n,2) alpha beta in the centre; the
  // reduced point is ({n beta}, {n alpha}, -n beta floor(n alpha)) mod 1.
  const double alpha = kSqrt2, beta = kGolden;
  auto h = build_nilmanifold(heisenberg_spec());
  out.push_back({"heisenberg bracket",
                 make_poly_sequence(h, {GroupElement(std::vector<double>{0.0, 0.0, 0.0}),
                                        GroupElement(std::vector<double>{beta, alpha, 0.0}),
                                        GroupElement(std::vector<double>{0.0, 0.0, -alpha * beta})}),
                 TestFunction::product({TestFunction::vertical_character(3, -1), TestFunction::bump(0),
                                        TestFunction::bump(1)})});
  return out;
}

// max over n <= 2000 of |F(g(n)) - e(beta n floor(n alpha)) psi({alpha n}) psi({beta n})|
double bracket_example_error(const Case& c) {
  const long double alpha = kSqrt2, beta = kGolden;
  OrbitWalker w(c.g, 1);
  double err = 0.0;
  for (std::int64_t n = 1; n <= 2000; ++n, w.advance()) {
    const long double fa = std::floor(n * alpha);
    long double ph = beta * n * fa;
    ph -= std::floor(ph);
    const long double xa = n * alpha - fa, xb = n * beta - std::floor(n * beta);
    const Complex direct = e1(static_cast<double>(ph)) * bump(static_cast<double>(xa)) * bump(static_cast<double>(xb));
    err = std::max(err, std::abs(c.F.eval_reduced(w.coords(), w.dim()) - direct));
  }
  return err;
}

Outcome trend(const std::vector<std::pair<std::string, const MultFuncTable*>>& fs, const std::string& extra) {
  const std::vector<std::int64_t> Ns = {10000, 100000, 1000000, 10000000};
  std::string detail = extra;
  bool pass = true;
  for (const auto& [fname, f] : fs)
    for (const auto& c : trend_cases()) {
      const auto reps = decay_scan(*f, c.g, c.F, Ns, 1, 0);
      const double base = reps[0].decay_stat;
      double worst = 0.0;
      std::string series;
      for (const auto& r : reps) {
        worst = std::max(worst, r.decay_stat / base);
        series += fmt("%s%.3e", series.empty() ? "" : " ", r.decay_stat);
      }
      const bool ok = worst <= 2.0;
      pass = pass && ok;
      detail += fmt("\n      %-4s %-18s decay_stat [%s] max ratio %.2f%s", fname.c_str(), c.name.c_str(),
                    series.c_str(), worst, ok ? "" : "  <-- exceeds 2x");
    }
  return {pass, detail};
}

Outcome trend_main() {
  auto t0 = std::chrono::steady_clock::now();
  const double ex = bracket_example_error(trend_cases()[2]);
  const auto mu = cache().get("mobius", 10000000);
  const auto tau = cache().get("tau", 10000000);
  auto r = trend({{"mu", &mu}, {"tau", &tau}}, fmt("bracket example pointwise error %.1e", ex));
  const double s = seconds_since(t0);
  r.pass = r.pass && ex < 1e-9 && s < 600.0;
  r.detail = fmt("%.1f s (< 600 s); ", s) + r.detail;
  return r;
}

Outcome trend_product() {
  auto t0 = std::chrono::steady_clock::now();
  const auto f = pointwise_product(cache().get("mobius", 10000000), cache().get("tau", 10000000),
                                   FuncKind::mobius_times_lambda);
  auto r = trend({{"mu*tau", &f}}, "");
  r.detail = fmt("%.1f s", seconds_since(t0)) + r.detail;
  return r;
}

// ---------------------------------------------------------------- 9

// Single-threaded reference: chunk sums in order, then the same pairwise tree.
Complex reference_sum(const MultFuncTable& f, const PolySequence& g, const TestFunction& F, std::int64_t N,
                      std::int64_t chunk) {
  using LC = std::complex<long double>;
  auto tree = [](std::vector<LC> v) {
    while (v.size() > 1) {
      std::vector<LC> next;
      for (std::size_t i = 0; i + 1 < v.size(); i += 2) next.push_back(v[i] + v[i + 1]);
      if (v.size() % 2) next.push_back(v.back());
      v = std::move(next);
    }
    return v.empty() ? LC(0) : v[0];
  };
  std::vector<LC> parts;
  for (std::int64_t lo = 1; lo <= N; lo += chunk) {
    LC s = 0;
    for (std::int64_t n = lo; n < lo + chunk && n <= N; ++n) s += LC(f(n + 1).real(), f(n + 1).imag());
    parts.push_back(s);
  }
  const LC mean = tree(parts) / static_cast<long double>(N);
  parts.clear();
  OrbitWalker w(g, 1);
  for (std::int64_t lo = 1; lo <= N; lo += chunk) {
    LC s = 0;
    for (std::int64_t n = lo; n < lo + chunk && n <= N; ++n, w.advance()) {
      const Complex x = F.eval_reduced(w.coords(), w.dim());
      s += (LC(f(n + 1).real(), f(n + 1).imag()) - mean) * LC(x.real(), x.imag());
    }
    parts.push_back(s);
  }
  const LC S = tree(parts) * (1.0L / (1.0L * static_cast<long double>(N)));
  return {static_cast<double>(S.real()), static_cast<double>(S.imag())};
}

Outcome centering() {
  const auto mu = cache().get("mobius", 2000000);
  const auto lam = cache().get("liouville", 2000000);
  const auto tau = cache().get("tau", 2000000);
  const MultFuncTable* fs[] = {&mu, &lam, &tau};
  const auto cases = trend_cases();
  std::mt19937_64 rng(2024);
  int nonzero = 0;
  for (int t = 0; t < 20; ++t) {
    const auto& f = *fs[t % 3];
    const std::int64_t W = 1 + static_cast<std::int64_t>(rng() % 30);
    std::int64_t b = static_cast<std::int64_t>(rng() % W);
    while (std::gcd(b, W) != 1) ++b;
    const std::int64_t N = 1000 + static_cast<std::int64_t>(rng() % ((f.N - b) / W - 1000));
    const auto r = correlation_sum(f, cases[t % 3].g, TestFunction::constant(1.0), N, W, b);
    nonzero += r.S != Complex(0.0, 0.0);
  }
  int mismatch = 0;
  const std::int64_t chunk = 8192;
  for (const auto& c : cases) {
    const Complex ref = reference_sum(mu, c.g, c.F, 1000000, chunk);
    for (int threads : {1, omp_get_max_threads(), 4}) {
      CorrelationOptions opt;
      opt.chunk_size = chunk;
      opt.threads = threads;
      const Complex S = correlation_sum(mu, c.g, c.F, 1000000, 1, 1, opt).S;
      mismatch += std::memcmp(&S, &ref, sizeof S) != 0;
    }
  }
  return {nonzero == 0 && mismatch == 0,
          fmt("F = 1 nonzero results %d/20; W = 1 runs differing bitwise from the reference %d/9", nonzero, mismatch)};
}

// ---------------------------------------------------------------- 10

Outcome condition_suite() {
  const auto mu = cache().get("mobius", 2000002);
  const auto r = check_conditions(mu, 1, 1, 2.0, 1000000);
  const double target = 6.0 / (std::numbers::pi * std::numbers::pi);
  const bool fl2 = std::abs(r.fl2_ratio - target) < 0.01;
  const bool weq = std::isfinite(r.w_equi_stat) && r.w_equi_stat <= 10.0;
  const auto tau = cache().get("tau", 1000000);
  auto g = trend_cases()[0];
  double worst = 0.0;
  for (const MultFuncTable* f : {&mu, &tau}) {
    const auto d = log_weight_decompose(*f, g.g, g.F, 999999, 1, 0);
    worst = std::max(worst, d.relative_error());
  }
  return {fl2 && weq && worst < 1e-6,
          fmt("fl2_ratio %.5f vs 6/pi^2 = %.5f; w_equi_stat %.4f (finite, <= 10); MV reassembly relative error "
              "%.2e (< 1e-6)",
              r.fl2_ratio, target, r.w_equi_stat, worst)};
}

// ---------------------------------------------------------------- 11

Outcome performance() {
  auto t0 = std::chrono::steady_clock::now();
  const auto mu = sieve_mobius(100000000);
  const double ts = seconds_since(t0);
  const std::int64_t M = mertens(mu, 100000000);
  const auto c = trend_cases()[2];
  auto t1 = std::chrono::steady_clock::now();
  const auto r = correlation_sum(mu, c.g, c.F, 10000000, 1, 0);
  const double tc = seconds_since(t1);
  return {ts < 60.0 && tc < 30.0 && M == 1928,
          fmt("Mobius sieve to 10^8 %.2f s (< 60 s, M(10^8) = %lld); 10^7-term Heisenberg correlation %.2f s "
              "(< 30 s, |S| = %.2e); %d hardware threads available (criterion assumes 8)",
              ts, static_cast<long long>(M), tc, std::abs(r.S), omp_get_max_threads())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Heisenberg group law vs matrix embedding", heisenberg_law},
      {"Vaughan identity", vaughan},
      {"log n = sum Lambda(d)", log_identity},
      {"Ramanujan tau cross-validation", tau_cross},
      {"Rankin-Selberg stability", rankin_selberg},
      {"Leibman search exactness", leibman},
      {"decay trend, mu and lambda_Delta", trend_main},
      {"decay trend, mu * lambda_Delta", trend_product},
      {"centering and reduction invariants", centering},
      {"condition suite and MV identity", condition_suite},
      {"performance", performance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu  %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
