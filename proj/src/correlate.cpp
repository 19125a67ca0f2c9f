#include "nilcorr/correlate.hpp"

#include "nilcorr/errors.hpp"
#include "nilcorr/orbit.hpp"

#include "json.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

namespace nilcorr {

namespace {

using LC = std::complex<long double>;

int thread_count(int requested) { return requested > 0 ? requested : omp_get_max_threads(); }

template <class T>
T tree_sum(std::vector<T> v) {
  if (v.empty()) return T{};
  while (v.size() > 1) {
    const std::size_t half = v.size() / 2;
    for (std::size_t i = 0; i < half; ++i) v[i] = v[2 * i] + v[2 * i + 1];
    if (v.size() % 2) {
      v[half] = v.back();
      v.resize(half + 1);
    } else {
      v.resize(half);
    }
  }
  return v[0];
}

void validate(const MultFuncTable& f, const PolySequence& g, const TestFunction& F, std::int64_t N, std::int64_t W,
              std::int64_t b, const CorrelationOptions& opt) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be positive");
  if (W < 1 || b < 0) throw Error(ErrorKind::InvalidArgument, "need W >= 1 and b >= 0");
  if (opt.chunk_size < 1) throw Error(ErrorKind::InvalidArgument, "chunk_size must be positive");
  if (std::gcd(W, b) != 1) throw Error(ErrorKind::NonCoprime, "gcd(b, W) != 1", {b, W});
  if (N > (f.N - b) / W) throw Error(ErrorKind::TableTooShort, "table shorter than W N + b", {f.N, W * N + b});
  if (!g.manifold || F.max_coord() >= g.manifold->dim())
    throw Error(ErrorKind::DimensionMismatch, "test function and sequence live on different manifolds");
}

// Splits off the constant summands of F.
std::optional<TestFunction> non_constant_part(const TestFunction& F) {
  if (F.kind() == TestFunction::Kind::constant) return std::nullopt;
  if (F.kind() != TestFunction::Kind::sum) return F;
  std::vector<TestFunction> rest;
  for (const auto& t : F.children())
    if (t.kind() != TestFunction::Kind::constant) rest.push_back(t);
  if (rest.empty()) return std::nullopt;
  if (rest.size() == 1) return rest[0];
  return TestFunction::sum(std::move(rest));
}

std::int64_t chunk_count(std::int64_t N, std::int64_t chunk) { return (N + chunk - 1) / chunk; }

}  // namespace

CorrelationReport correlation_sum(const MultFuncTable& f, const PolySequence& g, const TestFunction& F, std::int64_t N,
                                  std::int64_t W, std::int64_t b, const CorrelationOptions& opt) {
  validate(f, g, F, N, W, b, opt);
  const auto t0 = std::chrono::steady_clock::now();
  const int threads = thread_count(opt.threads);
  const std::int64_t chunk = opt.chunk_size;
  const std::int64_t chunks = chunk_count(N, chunk);

  CorrelationReport r;
  r.N = N;
  r.W = W;
  r.b = b;

  std::vector<LC> part(static_cast<std::size_t>(chunks));
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    LC s = 0;
    const std::int64_t hi = std::min(N, (c + 1) * chunk);
    for (std::int64_t n = c * chunk + 1; n <= hi; ++n) {
      const Complex v = f(W * n + b);
      s += LC(v.real(), v.imag());
    }
    part[c] = s;
  }
  const LC mean = tree_sum(part) / static_cast<long double>(N);
  const long double scale = static_cast<long double>(euler_phi(W)) / (static_cast<long double>(W) * N);
  r.mean_f = Complex(static_cast<double>(mean.real()), static_cast<double>(mean.imag()));
  r.mean_paper = Complex(static_cast<double>(mean.real() * scale * N), static_cast<double>(mean.imag() * scale * N));

  if (const auto rest = non_constant_part(F)) {
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
      const std::int64_t lo = c * chunk + 1, hi = std::min(N, (c + 1) * chunk);
      OrbitWalker w(g, lo);
      LC s = 0;
      for (std::int64_t n = lo; n <= hi; ++n, w.advance()) {
        const Complex v = f(W * n + b);
        const LC centered = LC(v.real(), v.imag()) - mean;
        const Complex x = rest->eval_reduced(w.coords(), w.dim());
        s += centered * LC(x.real(), x.imag());
      }
      part[c] = s;
    }
    const LC S = tree_sum(part) * scale;
    r.S = Complex(static_cast<double>(S.real()), static_cast<double>(S.imag()));
  }

  r.lip_estimate = estimate_lip(F, *g.manifold, opt.lip_grid);
  r.decay_stat = std::abs(r.S) * std::log(static_cast<double>(N)) / (1.0 + r.lip_estimate);
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<CorrelationReport> decay_scan(const MultFuncTable& f, const PolySequence& g, const TestFunction& F,
                                          const std::vector<std::int64_t>& N_list, std::int64_t W, std::int64_t b,
                                          const CorrelationOptions& opt) {
  for (std::size_t i = 1; i < N_list.size(); ++i)
    if (N_list[i] <= N_list[i - 1]) throw Error(ErrorKind::InvalidArgument, "N_list must be increasing");
  std::vector<CorrelationReport> out;
  out.reserve(N_list.size());
  for (const auto N : N_list) out.push_back(correlation_sum(f, g, F, N, W, b, opt));
  return out;
}

std::string to_csv(const std::vector<CorrelationReport>& reports) {
  std::ostringstream os;
  os.precision(17);
  os << "N,W,b,re_S,im_S,abs_S,decay_stat,lip_estimate,runtime_ms\n";
  for (const auto& r : reports)
    os << r.N << ',' << r.W << ',' << r.b << ',' << r.S.real() << ',' << r.S.imag() << ',' << std::abs(r.S) << ','
       << r.decay_stat << ',' << r.lip_estimate << ',' << r.runtime_ms << '\n';
  return os.str();
}

std::string to_json(const CorrelationReport& r) {
  nlohmann::json j;
  j["N"] = r.N;
  j["W"] = r.W;
  j["b"] = r.b;
  j["S"] = {r.S.real(), r.S.imag()};
  j["abs_S"] = std::abs(r.S);
  j["mean_f"] = {r.mean_f.real(), r.mean_f.imag()};
  j["mean_paper"] = {r.mean_paper.real(), r.mean_paper.imag()};
  j["lip_estimate"] = r.lip_estimate;
  j["decay_stat"] = r.decay_stat;
  j["runtime_ms"] = r.runtime_ms;
  return j.dump(2);
}

double MVDecomposition::relative_error() const {
  const double scale = std::max(std::abs(total), 1e-300);
  return std::abs(reassembled() - total) / scale;
}

MVDecomposition log_weight_decompose(const MultFuncTable& f, const PolySequence& g, const TestFunction& F,
                                     std::int64_t N, std::int64_t W, std::int64_t b, const CorrelationOptions& opt) {
  validate(f, g, F, N, W, b, opt);
  const std::int64_t M = W * N + b;
  if (M > (std::int64_t(1) << 32)) throw Error(ErrorKind::CapacityExceeded, "W N + b exceeds 2^32", {M});

  MVDecomposition d;
  d.N = N;
  d.W = W;
  d.b = b;
  {
    const auto N2 = static_cast<__int128>(N) * N;
    std::int64_t u = static_cast<std::int64_t>(std::cbrt(static_cast<double>(N) * static_cast<double>(N)));
    while (u > 0 && static_cast<__int128>(u) * u * u > N2) --u;
    while (static_cast<__int128>(u + 1) * (u + 1) * (u + 1) <= N2) ++u;
    d.U = u;
  }
  const std::int64_t U = d.U;

  std::vector<std::uint32_t> spf(static_cast<std::size_t>(M + 1), 0);
  for (const auto p : primes_up_to(static_cast<std::int64_t>(std::sqrt(static_cast<double>(M))) + 1))
    for (std::int64_t k = static_cast<std::int64_t>(p) * p; k <= M; k += p)
      if (!spf[k]) spf[k] = p;
  for (std::int64_t k = 2; k <= M; ++k)
    if (!spf[k]) spf[k] = static_cast<std::uint32_t>(k);

  // Dyadic slots: small k = 0..63, large k = 0..63.
  auto slot = [U](std::int64_t p) -> int {
    if (p <= U) {
      int k = 0;
      while ((static_cast<__int128>(p) << (k + 1)) <= U) ++k;
      return k;
    }
    int k = 0;
    while (p > (static_cast<__int128>(U) << (k + 1))) ++k;
    return 64 + k;
  };

  struct Acc {
    LC total, small, large, power, nonsplit;
    std::vector<LC> dyadic = std::vector<LC>(128);
    Acc operator+(const Acc& o) const {
      Acc r;
      r.total = total + o.total;
      r.small = small + o.small;
      r.large = large + o.large;
      r.power = power + o.power;
      r.nonsplit = nonsplit + o.nonsplit;
      for (std::size_t i = 0; i < dyadic.size(); ++i) r.dyadic[i] = dyadic[i] + o.dyadic[i];
      return r;
    }
  };

  const std::int64_t chunk = opt.chunk_size;
  const std::int64_t chunks = chunk_count(N, chunk);
  std::vector<Acc> part(static_cast<std::size_t>(chunks));
#pragma omp parallel for num_threads(thread_count(opt.threads)) schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t lo = c * chunk + 1, hi = std::min(N, (c + 1) * chunk);
    OrbitWalker w(g, lo);
    Acc a;
    for (std::int64_t n = lo; n <= hi; ++n, w.advance()) {
      const std::int64_t m = W * n + b;
      const Complex x = F.eval_reduced(w.coords(), w.dim());
      const LC wx(x.real(), x.imag());
      const Complex fm = f(m);
      const LC lfm(fm.real(), fm.imag());
      a.total += std::log(static_cast<long double>(m)) * lfm * wx;
      std::int64_t r = m;
      while (r > 1) {
        const std::int64_t p = spf[r];
        int e = 0;
        while (r % p == 0) {
          r /= p;
          ++e;
        }
        const long double lp = std::log(static_cast<long double>(p));
        const Complex split = f(p) * f(m / p);
        const LC ls(split.real(), split.imag());
        const LC term = lp * ls * wx;
        (p <= U ? a.small : a.large) += term;
        a.dyadic[slot(p)] += term;
        a.nonsplit += lp * (lfm - ls) * wx;
        if (e > 1) a.power += static_cast<long double>(e - 1) * lp * lfm * wx;
      }
    }
    part[c] = std::move(a);
  }
  const Acc sum = tree_sum(std::move(part));
  auto cd = [](const LC& z) { return Complex(static_cast<double>(z.real()), static_cast<double>(z.imag())); };
  d.total = cd(sum.total);
  d.small_prime_part = cd(sum.small);
  d.large_prime_part = cd(sum.large);
  d.prime_power_part = cd(sum.power);
  d.nonsplit_part = cd(sum.nonsplit);
  for (int k = 0; k < 64; ++k) {
    if (U >> k == 0) break;
    DyadicRange s{false, k, std::ldexp(static_cast<double>(U), -(k + 1)), std::ldexp(static_cast<double>(U), -k),
                  cd(sum.dyadic[k])};
    d.dyadic_breakdown.push_back(s);
  }
  for (int k = 0; k < 64; ++k) {
    if (std::ldexp(static_cast<double>(U), k) >= static_cast<double>(M)) break;
    DyadicRange s{true, k, std::ldexp(static_cast<double>(U), k), std::ldexp(static_cast<double>(U), k + 1),
                  cd(sum.dyadic[64 + k])};
    d.dyadic_breakdown.push_back(s);
  }
  return d;
}

std::int64_t icbrt(std::int64_t n) {
  if (n <= 0) return 0;
  auto r = static_cast<std::int64_t>(std::cbrt(static_cast<double>(n)));
  while (r > 0 && static_cast<__int128>(r) * r * r > n) --r;
  while (static_cast<__int128>(r + 1) * (r + 1) * (r + 1) <= n) ++r;
  return r;
}

double vaughan_check(std::int64_t N) {
  if (N < 27) throw Error(ErrorKind::InvalidArgument, "vaughan_check needs N >= 27", {N});
  const auto mu = sieve_mobius(N);
  const auto lam = sieve_von_mangoldt(N);
  const std::int64_t V = icbrt(N);
  const auto N2 = static_cast<__int128>(N) * N;
  auto below_two_thirds = [N2](std::int64_t d) { return static_cast<__int128>(d) * d * d <= N2; };

  // a_d = sum_{bc = d; b, c <= V} mu(b) Lambda(c)
  std::vector<double> a(static_cast<std::size_t>(N + 1), 0.0);
  for (std::int64_t x = 1; x <= V; ++x)
    for (std::int64_t c = 1; c <= V && x * c <= N; ++c) a[x * c] += mu.small[x] * lam.re(c);
  // b_w = sum_{c | w, c > V} mu(c)
  std::vector<double> bw(static_cast<std::size_t>(N + 1), 0.0);
  for (std::int64_t c = V + 1; c <= N; ++c)
    if (mu.small[c])
      for (std::int64_t w = c; w <= N; w += c) bw[w] += mu.small[c];

  std::vector<double> rhs(static_cast<std::size_t>(N + 1), 0.0);
  for (std::int64_t n = 1; n <= V; ++n) rhs[n] += lam.re(n);
  for (std::int64_t d = 1; d <= N && below_two_thirds(d); ++d)
    if (a[d] != 0.0)
      for (std::int64_t n = d; n <= N; n += d) rhs[n] -= a[d];
  for (std::int64_t d = 1; d <= V; ++d)
    if (mu.small[d])
      for (std::int64_t n = d; n <= N; n += d) rhs[n] += mu.small[d] * std::log(static_cast<double>(n / d));
  for (std::int64_t d = V + 1; d <= N; ++d) {
    const double ld = lam.re(d);
    if (ld == 0.0) continue;
    for (std::int64_t w = V + 1; d * w <= N; ++w) rhs[d * w] += ld * bw[w];
  }

  double err = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) err = std::max(err, std::abs(lam.re(n) - rhs[n]));
  return err;
}

double von_mangoldt_log_identity(std::int64_t N) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be positive", {N});
  const auto lam = sieve_von_mangoldt(N);
  std::vector<double> s(static_cast<std::size_t>(N + 1), 0.0);
  for (std::int64_t d = 2; d <= N; ++d) {
    const double l = lam.re(d);
    if (l != 0.0)
      for (std::int64_t n = d; n <= N; n += d) s[n] += l;
  }
  double err = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) err = std::max(err, std::abs(std::log(static_cast<double>(n)) - s[n]));
  return err;
}

}  // namespace nilcorr
