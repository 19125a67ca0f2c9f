#include "nilcorr/multfunc.hpp"

#include "nilcorr/errors.hpp"
#include "nilcorr/rational.hpp"
#include "json.hpp"
#include "progscan.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace nilcorr {

namespace {

int thread_count(int requested) { return requested > 0 ? requested : omp_get_max_threads(); }

void check_budget(std::int64_t N, std::size_t bytes_per_entry, const SieveOptions& opt) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1", {N});
  if (N >= (std::int64_t(1) << 32) ||
      static_cast<double>(N) * static_cast<double>(bytes_per_entry) > static_cast<double>(opt.memory_budget))
    throw Error(ErrorKind::CapacityExceeded, "table does not fit the memory budget", {N});
}

std::int64_t isqrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Runs body(lo, hi) over [1, N] in segments of opt.segment, in parallel.
template <class Body>
void for_segments(std::int64_t N, const SieveOptions& opt, Body body) {
  const std::int64_t S = std::max<std::int64_t>(opt.segment, 1024);
  const std::int64_t count = (N + S - 1) / S;
#pragma omp parallel for num_threads(thread_count(opt.threads)) schedule(dynamic)
  for (std::int64_t s = 0; s < count; ++s) body(1 + s * S, std::min(N + 1, 1 + (s + 1) * S));
}

}  // namespace

const char* to_string(FuncKind k) {
  switch (k) {
    case FuncKind::mobius: return "mobius";
    case FuncKind::liouville: return "liouville";
    case FuncKind::lambda_pi_gl2: return "lambda_pi_gl2";
    case FuncKind::lambda_pi_imported: return "lambda_pi_imported";
    case FuncKind::mobius_times_lambda: return "mobius_times_lambda";
    case FuncKind::von_mangoldt: return "von_mangoldt";
    case FuncKind::custom: return "custom";
  }
  return "custom";
}

FuncKind func_kind_from_string(const std::string& s) {
  for (auto k : {FuncKind::mobius, FuncKind::liouville, FuncKind::lambda_pi_gl2, FuncKind::lambda_pi_imported,
                 FuncKind::mobius_times_lambda, FuncKind::von_mangoldt, FuncKind::custom})
    if (s == to_string(k)) return k;
  throw Error(ErrorKind::InvalidArgument, "unknown function kind: " + s);
}

double MultFuncTable::log_base(std::int64_t n) const { return std::log(static_cast<double>(base[n])); }

MultFuncTable real_table(FuncKind kind, std::vector<double> values_from_1, Normalization norm) {
  MultFuncTable t;
  t.kind = kind;
  t.normalization = norm;
  t.N = static_cast<std::int64_t>(values_from_1.size());
  t.real.reserve(values_from_1.size() + 1);
  t.real.push_back(0.0);
  t.real.insert(t.real.end(), values_from_1.begin(), values_from_1.end());
  return t;
}

MultFuncTable complex_table(FuncKind kind, std::vector<Complex> values_from_1, Normalization norm) {
  MultFuncTable t;
  t.kind = kind;
  t.normalization = norm;
  t.N = static_cast<std::int64_t>(values_from_1.size());
  t.cplx.reserve(values_from_1.size() + 1);
  t.cplx.push_back(0.0);
  t.cplx.insert(t.cplx.end(), values_from_1.begin(), values_from_1.end());
  return t;
}

MultFuncTable pointwise_product(const MultFuncTable& f, const MultFuncTable& g, FuncKind kind) {
  MultFuncTable t;
  t.kind = kind;
  t.N = std::min(f.N, g.N);
  t.normalization =
      f.normalization == Normalization::analytic || g.normalization == Normalization::analytic ? Normalization::analytic
                                                                                              : Normalization::arithmetic;
  if (f.is_real() && g.is_real()) {
    t.real.assign(static_cast<std::size_t>(t.N + 1), 0.0);
    for (std::int64_t n = 1; n <= t.N; ++n) t.real[n] = f.re(n) * g.re(n);
  } else {
    t.cplx.assign(static_cast<std::size_t>(t.N + 1), 0.0);
    for (std::int64_t n = 1; n <= t.N; ++n) t.cplx[n] = f(n) * g(n);
  }
  return t;
}

std::vector<std::uint32_t> primes_up_to(std::int64_t n) {
  std::vector<std::uint32_t> out;
  if (n < 2) return out;
  std::vector<bool> comp(static_cast<std::size_t>(n + 1), false);
  for (std::int64_t i = 2; i <= n; ++i) {
    if (comp[i]) continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::int64_t j = i * i; j <= n; j += i) comp[j] = true;
  }
  return out;
}

MultFuncTable sieve_mobius(std::int64_t N, const SieveOptions& opt) {
  check_budget(N, 1, opt);
  MultFuncTable t;
  t.kind = FuncKind::mobius;
  t.N = N;
  t.small.assign(static_cast<std::size_t>(N + 1), 0);
  const auto primes = primes_up_to(isqrt(N));
  for_segments(N, opt, [&](std::int64_t lo, std::int64_t hi) {
    const auto len = static_cast<std::size_t>(hi - lo);
    std::vector<std::uint32_t> prod(len, 1);
    std::int8_t* mu = t.small.data() + lo;
    std::fill(mu, mu + len, std::int8_t(1));
    for (std::uint32_t p : primes) {
      const std::int64_t p2 = std::int64_t(p) * p;
      for (std::int64_t m = (lo + p - 1) / p * p; m < hi; m += p) {
        prod[m - lo] *= p;
        mu[m - lo] = static_cast<std::int8_t>(-mu[m - lo]);
      }
      for (std::int64_t m = (lo + p2 - 1) / p2 * p2; m < hi; m += p2) mu[m - lo] = 0;
    }
    for (std::size_t i = 0; i < len; ++i)
      if (mu[i] != 0 && prod[i] != static_cast<std::uint32_t>(lo + static_cast<std::int64_t>(i)))
        mu[i] = static_cast<std::int8_t>(-mu[i]);
  });
  return t;
}

MultFuncTable sieve_liouville(std::int64_t N, const SieveOptions& opt) {
  check_budget(N, 1, opt);
  MultFuncTable t;
  t.kind = FuncKind::liouville;
  t.N = N;
  t.small.assign(static_cast<std::size_t>(N + 1), 0);
  const auto primes = primes_up_to(isqrt(N));
  for_segments(N, opt, [&](std::int64_t lo, std::int64_t hi) {
    const auto len = static_cast<std::size_t>(hi - lo);
    std::vector<std::uint32_t> prod(len, 1);
    std::int8_t* lam = t.small.data() + lo;
    std::fill(lam, lam + len, std::int8_t(1));
    for (std::uint32_t p : primes)
      for (std::int64_t pk = p; pk < hi; pk *= p)
        for (std::int64_t m = (lo + pk - 1) / pk * pk; m < hi; m += pk) {
          prod[m - lo] *= p;
          lam[m - lo] = static_cast<std::int8_t>(-lam[m - lo]);
        }
    for (std::size_t i = 0; i < len; ++i)
      if (prod[i] != static_cast<std::uint32_t>(lo + static_cast<std::int64_t>(i)))
        lam[i] = static_cast<std::int8_t>(-lam[i]);
  });
  return t;
}

MultFuncTable sieve_von_mangoldt(std::int64_t N, const SieveOptions& opt) {
  check_budget(N, 4, opt);
  MultFuncTable t;
  t.kind = FuncKind::von_mangoldt;
  t.N = N;
  t.base.assign(static_cast<std::size_t>(N + 1), 0);
  const auto primes = primes_up_to(isqrt(N));
  for_segments(N, opt, [&](std::int64_t lo, std::int64_t hi) {
    const auto len = static_cast<std::size_t>(hi - lo);
    std::vector<char> comp(len, 0);
    for (std::uint32_t p : primes)
      for (std::int64_t m = std::max<std::int64_t>(std::int64_t(p) * p, (lo + p - 1) / p * p); m < hi; m += p)
        comp[m - lo] = 1;
    for (std::size_t i = 0; i < len; ++i) {
      const std::int64_t n = lo + static_cast<std::int64_t>(i);
      if (n >= 2 && !comp[i]) t.base[n] = static_cast<std::uint32_t>(n);
    }
  });
  for (std::uint32_t p : primes)
    for (std::int64_t pk = std::int64_t(p) * p; pk <= N; pk *= p) t.base[pk] = p;
  return t;
}

std::int64_t mertens(const MultFuncTable& mu, std::int64_t N) {
  if (N > mu.N) throw Error(ErrorKind::TableTooShort, "table shorter than N", {N, mu.N});
  std::int64_t s = 0;
  for (std::int64_t n = 1; n <= N; ++n) s += static_cast<std::int64_t>(mu.re(n));
  return s;
}

// ---------------------------------------------------------------------------
// Ramanujan τ

namespace {

using boost::multiprecision::int256_t;

struct Montgomery {
  std::uint32_t p, pinv, r2;
  explicit Montgomery(std::uint32_t mod) : p(mod) {
    std::uint32_t inv = mod;  // Newton iteration for mod^{-1} mod 2^32
    for (int i = 0; i < 5; ++i) inv *= 2 - mod * inv;
    pinv = static_cast<std::uint32_t>(0u - inv);
    r2 = static_cast<std::uint32_t>((static_cast<unsigned __int128>(1) << 64) % mod);
  }
  std::uint32_t reduce(std::uint64_t t) const {
    const std::uint32_t m = static_cast<std::uint32_t>(t) * pinv;
    const std::uint64_t u = (t + static_cast<std::uint64_t>(m) * p) >> 32;
    return static_cast<std::uint32_t>(u >= p ? u - p : u);
  }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const { return reduce(static_cast<std::uint64_t>(a) * b); }
  std::uint32_t to(std::uint32_t a) const { return mul(a, r2); }
  std::uint32_t from(std::uint32_t a) const { return reduce(a); }
  std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    const std::uint32_t s = a + b;
    return s >= p ? s - p : s;
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) const { return a >= b ? a - b : a + p - b; }
  std::uint32_t pow(std::uint32_t a, std::uint64_t e) const {  // Montgomery form in and out
    std::uint32_t r = to(1);
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
};

struct NttPrime {
  std::uint32_t p;
  std::uint32_t g;  // primitive root
};

// p - 1 divisible by 2^25 for all five.
constexpr std::array<NttPrime, 5> kPrimes{
    {{167772161u, 3u}, {469762049u, 3u}, {1811939329u, 13u}, {2013265921u, 31u}, {2113929217u, 5u}}};

// rt[half + j] = w^j for the primitive (2 half)-th root w, every level.
std::vector<std::uint32_t> twiddles(std::size_t n, const Montgomery& M, std::uint32_t g, bool inverse) {
  const std::uint32_t gm = M.to(g);
  std::vector<std::uint32_t> rt(std::max<std::size_t>(n, 2));
  for (std::size_t half = 1; half < n; half <<= 1) {
    std::uint32_t w = M.pow(gm, (M.p - 1) / (2 * half));
    if (inverse) w = M.pow(w, M.p - 2);
    rt[half] = M.to(1);
    for (std::size_t j = 1; j < half; ++j) rt[half + j] = M.mul(rt[half + j - 1], w);
  }
  return rt;
}

// Forward transform, natural order in, bit-reversed order out (no permutation pass).
void ntt_dif(std::vector<std::uint32_t>& a, const Montgomery& M, const std::vector<std::uint32_t>& rt) {
  const std::size_t n = a.size();
  const std::uint32_t p = M.p, pinv = M.pinv;
  std::uint32_t* data = a.data();
  for (std::size_t half = n >> 1; half >= 1; half >>= 1) {
    const std::uint32_t* w = rt.data() + half;
    for (std::size_t i = 0; i < n; i += 2 * half) {
      std::uint32_t* x = data + i;
      std::uint32_t* y = data + i + half;
      for (std::size_t j = 0; j < half; ++j) {
        const std::uint32_t u = x[j], v = y[j];
        const std::uint32_t s = u + v;
        x[j] = s >= p ? s - p : s;
        const std::uint64_t t = static_cast<std::uint64_t>(u >= v ? u - v : u + p - v) * w[j];
        const std::uint32_t m = static_cast<std::uint32_t>(t) * pinv;
        const auto r = static_cast<std::uint32_t>((t + static_cast<std::uint64_t>(m) * p) >> 32);
        y[j] = r >= p ? r - p : r;
      }
    }
  }
}

// Inverse transform, bit-reversed order in, natural order out, scaled by 1/n.
void ntt_dit_inverse(std::vector<std::uint32_t>& a, const Montgomery& M, const std::vector<std::uint32_t>& rt) {
  const std::size_t n = a.size();
  const std::uint32_t p = M.p, pinv = M.pinv;
  std::uint32_t* data = a.data();
  for (std::size_t half = 1; half < n; half <<= 1) {
    const std::uint32_t* w = rt.data() + half;
    for (std::size_t i = 0; i < n; i += 2 * half) {
      std::uint32_t* x = data + i;
      std::uint32_t* y = data + i + half;
      for (std::size_t j = 0; j < half; ++j) {
        const std::uint64_t t = static_cast<std::uint64_t>(y[j]) * w[j];
        const std::uint32_t m = static_cast<std::uint32_t>(t) * pinv;
        std::uint32_t v = static_cast<std::uint32_t>((t + static_cast<std::uint64_t>(m) * p) >> 32);
        v = v >= p ? v - p : v;
        const std::uint32_t u = x[j];
        const std::uint32_t s = u + v;
        x[j] = s >= p ? s - p : s;
        y[j] = u >= v ? u - v : u + p - v;
      }
    }
  }
  const std::uint32_t ninv = M.pow(M.to(static_cast<std::uint32_t>(n % M.p)), M.p - 2);
  for (auto& x : a) x = M.mul(x, ninv);
}

// Squares a (Montgomery form, length L) and keeps the first `keep` terms.
void square_truncate(std::vector<std::uint32_t>& a, const Montgomery& M, const std::vector<std::uint32_t>& fwd,
                     const std::vector<std::uint32_t>& inv, std::size_t keep) {
  ntt_dif(a, M, fwd);
  for (auto& x : a) x = M.mul(x, x);
  ntt_dit_inverse(a, M, inv);
  std::fill(a.begin() + static_cast<std::ptrdiff_t>(keep), a.end(), 0u);
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

__int128 to_int128(const int256_t& x) {
  const bool neg = x < 0;
  const int256_t ax = neg ? int256_t(-x) : x;
  const int256_t mask = (int256_t(1) << 64) - 1;
  const auto lo = static_cast<std::uint64_t>(ax & mask);
  const auto hi = static_cast<std::uint64_t>((ax >> 64) & mask);
  const auto v = static_cast<__int128>((static_cast<unsigned __int128>(hi) << 64) | lo);
  return neg ? -v : v;
}

}  // namespace

TauTable tau_table(std::int64_t N, const TauOptions& opt) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1", {N});
  if (N > opt.cap || N > (std::int64_t(1) << 24))
    throw Error(ErrorKind::CapacityExceeded, "tau table above cap", {N, std::min(opt.cap, std::int64_t(1) << 24)});
  const auto n = static_cast<std::size_t>(N);  // coefficients of q^0..q^{N-1} of η^24 / q

  // η^3 = Σ (-1)^k (2k+1) q^{k(k+1)/2}; B = (η^3)^2 exactly.
  std::vector<std::pair<std::size_t, std::int64_t>> eta3;
  for (std::int64_t k = 0; k * (k + 1) / 2 < N; ++k) eta3.emplace_back(k * (k + 1) / 2, (k % 2 ? -1 : 1) * (2 * k + 1));
  std::vector<std::int64_t> B(n, 0);
  for (std::size_t i = 0; i < eta3.size(); ++i)
    for (std::size_t j = 0; j < eta3.size() && eta3[i].first + eta3[j].first < n; ++j)
      B[eta3[i].first + eta3[j].first] += eta3[i].second * eta3[j].second;

  std::size_t L = 1;
  while (L < 2 * n) L <<= 1;
  std::vector<std::vector<std::uint32_t>> residues;
  std::vector<std::uint32_t> a;
  for (const auto& P : kPrimes) {
    const Montgomery M(P.p);
    a.assign(L, 0u);
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t r = B[i] % static_cast<std::int64_t>(P.p);
      if (r < 0) r += P.p;
      a[i] = M.to(static_cast<std::uint32_t>(r));
    }
    const auto fwd = twiddles(L, M, P.g, false), inv = twiddles(L, M, P.g, true);
    square_truncate(a, M, fwd, inv, n);
    square_truncate(a, M, fwd, inv, n);
    std::vector<std::uint32_t> res(n);
    for (std::size_t i = 0; i < n; ++i) res[i] = M.from(a[i]);
    residues.push_back(std::move(res));
  }
  a.clear();
  a.shrink_to_fit();

  // Garner: x = d0 + m0 (d1 + m1 (d2 + ...)), then symmetric range.
  constexpr std::size_t K = kPrimes.size();
  std::array<std::array<std::uint64_t, K>, K> inv{};
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < i; ++j) inv[i][j] = powmod(kPrimes[j].p % kPrimes[i].p, kPrimes[i].p - 2, kPrimes[i].p);
  int256_t Mprod = 1;
  for (const auto& P : kPrimes) Mprod *= P.p;
  const int256_t half = Mprod / 2;

  TauTable t;
  t.N = N;
  const std::int64_t ecap = std::min(N, opt.exact_cap);
  t.exact.assign(static_cast<std::size_t>(ecap + 1), 0);
  t.normalized.assign(n + 1, 0.0);
#pragma omp parallel for num_threads(thread_count(opt.threads)) schedule(static)
  for (std::int64_t idx = 0; idx < N; ++idx) {
    std::array<std::uint64_t, K> d{};
    for (std::size_t i = 0; i < K; ++i) {
      const std::uint64_t m = kPrimes[i].p;
      std::uint64_t x = residues[i][idx];
      for (std::size_t j = 0; j < i; ++j) x = mulmod((x + m - d[j] % m) % m, inv[i][j], m);
      d[i] = x;
    }
    int256_t x = d[K - 1];
    for (std::size_t i = K - 1; i-- > 0;) x = x * kPrimes[i].p + d[i];
    if (x > half) x -= Mprod;
    const std::int64_t nn = idx + 1;
    if (nn <= ecap) t.exact[nn] = to_int128(x);
    const long double v = x.convert_to<long double>();
    t.normalized[nn] = static_cast<double>(v / std::pow(static_cast<long double>(nn), 5.5L));
  }
  return t;
}

MultFuncTable normalize_gl2(const TauTable& t) {
  MultFuncTable out;
  out.kind = FuncKind::lambda_pi_gl2;
  out.normalization = Normalization::analytic;
  out.N = t.N;
  out.real = t.normalized;
  return out;
}

std::vector<__int128> tau_from_hecke(const TauTable& t, std::int64_t N) {
  if (N < 1 || N >= static_cast<std::int64_t>(t.exact.size()))
    throw Error(ErrorKind::TableTooShort, "exact tau values do not cover N", {N});
  std::vector<__int128> v(static_cast<std::size_t>(N + 1), 0);
  v[1] = 1;
  const auto primes = primes_up_to(N);
  for (std::uint32_t p : primes) {
    const __int128 tp = t.exact[p];
    v[p] = tp;
    if (p > N / p) continue;
    __int128 p11 = 1;
    for (int i = 0; i < 11; ++i) p11 *= p;
    __int128 prev = 1, cur = tp;
    for (std::int64_t pk = std::int64_t(p) * p; pk <= N; pk *= p) {
      const __int128 next = tp * cur - p11 * prev;
      v[pk] = next;
      prev = cur;
      cur = next;
      if (pk > N / p) break;
    }
  }
  std::vector<std::uint32_t> spf(static_cast<std::size_t>(N + 1), 0), pp(static_cast<std::size_t>(N + 1), 0);
  for (std::uint32_t p : primes)
    for (std::int64_t m = p; m <= N; m += p)
      if (!spf[m]) spf[m] = p;
  for (std::int64_t n = 2; n <= N; ++n) {
    const std::uint32_t p = spf[n];
    const std::int64_t r = n / p;
    pp[n] = (r > 1 && spf[r] == p) ? pp[r] * p : p;
    if (pp[n] != n) v[n] = v[pp[n]] * v[n / pp[n]];
  }
  return v;
}

AutomorphicSpec builtin_delta_spec(const TauTable& t) {
  AutomorphicSpec s;
  s.m_rank = 2;
  s.source = SatakeSource::builtin_delta;
  s.conductor_label = "1.12.a.a";
  for (std::uint32_t p : primes_up_to(t.N)) {
    const double lam = t.normalized[p];
    const double im = std::sqrt(std::max(0.0, 4.0 - lam * lam)) / 2.0;
    s.satake[p] = {Complex(lam / 2.0, im), Complex(lam / 2.0, -im)};
  }
  return s;
}

MultFuncTable hecke_extend(const AutomorphicSpec& spec, std::int64_t N) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1", {N});
  const auto primes = primes_up_to(N);
  for (std::uint32_t p : primes)
    if (!spec.satake.count(p)) throw Error(ErrorKind::MissingPrimeData, "no Satake parameters for a prime", {p});

  std::vector<Complex> v(static_cast<std::size_t>(N + 1), 0.0);
  v[1] = 1.0;
  for (std::uint32_t p : primes) {
    const auto& alpha = spec.satake.at(p);
    const std::size_t m = alpha.size();
    std::vector<Complex> e(m + 1, 0.0);  // elementary symmetric polynomials
    e[0] = 1.0;
    for (const Complex& a : alpha)
      for (std::size_t j = m; j >= 1; --j) e[j] += e[j - 1] * a;
    std::vector<Complex> h{1.0};
    std::int64_t pk = p;
    for (std::size_t k = 1; pk <= N; ++k, pk *= p) {
      Complex s = 0.0;
      for (std::size_t j = 1; j <= std::min(k, m); ++j) s += (j % 2 ? 1.0 : -1.0) * e[j] * h[k - j];
      h.push_back(s);
      v[pk] = s;
      if (pk > N / p) break;
    }
  }
  // smallest prime factor and prime-power part
  std::vector<std::uint32_t> spf(static_cast<std::size_t>(N + 1), 0), pp(static_cast<std::size_t>(N + 1), 0);
  for (std::uint32_t p : primes)
    for (std::int64_t m = p; m <= N; m += p)
      if (!spf[m]) spf[m] = p;
  for (std::int64_t n = 2; n <= N; ++n) {
    const std::uint32_t p = spf[n];
    const std::int64_t r = n / p;
    pp[n] = (r > 1 && spf[r] == p) ? pp[r] * p : p;
    if (pp[n] != n) v[n] = v[pp[n]] * v[n / pp[n]];
  }
  if (spec.source == SatakeSource::builtin_delta) {
    std::vector<double> re(static_cast<std::size_t>(N));
    for (std::int64_t n = 1; n <= N; ++n) re[n - 1] = v[n].real();
    return real_table(FuncKind::lambda_pi_gl2, std::move(re), Normalization::analytic);
  }
  v.erase(v.begin());
  return complex_table(FuncKind::lambda_pi_imported, std::move(v));
}

void check_satake_bound(const AutomorphicSpec& spec) {
  const int m = spec.m_rank;
  const auto e_num = static_cast<unsigned>(m * m - 1), e_den = static_cast<unsigned>(m * m + 1);
  for (const auto& [p, alpha] : spec.satake) {
    const BigInt rhs = boost::multiprecision::pow(BigInt(p), e_num);
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      const Rational re = exact_rational(alpha[j].real()), im = exact_rational(alpha[j].imag());
      const Rational a2 = re * re + im * im;
      // (|alpha|^2)^{m^2+1} <= p^{m^2-1}
      const BigInt num = numerator(a2), den = denominator(a2);
      if (boost::multiprecision::pow(num, e_den) > rhs * boost::multiprecision::pow(den, e_den))
        throw Error(ErrorKind::BoundViolation, "Satake parameter exceeds the Luo-Rudnick-Sarnak bound",
                    {p, static_cast<std::int64_t>(j + 1)});
    }
  }
}

namespace {

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

Complex parse_complex(const nlohmann::json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw Error(ErrorKind::Schema, where + ": expected [re, im]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

ImportedLFunction parse_lfunc_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Schema, "top level must be an object");
  ImportedLFunction out;
  auto& s = out.spec;
  s.source = SatakeSource::imported;
  if (!j.contains("label") || !j["label"].is_string()) throw Error(ErrorKind::Schema, "label: required string");
  s.conductor_label = j["label"].get<std::string>();
  if (!j.contains("rank") || !j["rank"].is_number_integer() || j["rank"].get<int>() < 2)
    throw Error(ErrorKind::Schema, "rank: required integer >= 2");
  s.m_rank = j["rank"].get<int>();
  if (j.contains("normalization") && j["normalization"] != "analytic")
    throw Error(ErrorKind::Schema, "normalization: only \"analytic\" is supported");
  if (j.contains("archimedean")) s.archimedean = j["archimedean"].dump();

  const bool has_primes = j.contains("primes");
  const bool has_coeffs = j.contains("coefficients");
  if (!has_primes && !has_coeffs) throw Error(ErrorKind::Schema, "primes or coefficients required");
  if (has_primes) {
    if (!j["primes"].is_array() || j["primes"].empty()) throw Error(ErrorKind::Schema, "primes: nonempty array required");
    for (std::size_t i = 0; i < j["primes"].size(); ++i) {
      const auto& e = j["primes"][i];
      const std::string where = "primes[" + std::to_string(i) + "]";
      if (!e.is_object() || !e.contains("p") || !e["p"].is_number_integer() || !is_prime(e["p"].get<std::int64_t>()))
        throw Error(ErrorKind::Schema, where + ".p: prime required");
      if (!e.contains("alphas") || !e["alphas"].is_array() || e["alphas"].size() != static_cast<std::size_t>(s.m_rank))
        throw Error(ErrorKind::Schema, where + ".alphas: rank entries required");
      std::vector<Complex> alpha;
      for (const auto& a : e["alphas"]) alpha.push_back(parse_complex(a, where + ".alphas"));
      s.satake[e["p"].get<std::int64_t>()] = std::move(alpha);
    }
    check_satake_bound(s);
  }
  if (has_coeffs) {
    if (!j["coefficients"].is_array() || j["coefficients"].empty())
      throw Error(ErrorKind::Schema, "coefficients: nonempty array required");
    std::vector<Complex> a;
    for (const auto& v : j["coefficients"]) a.push_back(parse_complex(v, "coefficients"));
    out.table = complex_table(FuncKind::lambda_pi_imported, std::move(a));
    if (std::abs(out.table(1) - Complex(1.0)) > 1e-6)
      throw Error(ErrorKind::IngestionMismatch, "coefficient a_1 must be 1");
    if (multiplicativity_defect(out.table, 1000) > 1e-6)
      throw Error(ErrorKind::IngestionMismatch, "imported coefficients are not multiplicative");
    if (has_primes) {
      const std::int64_t P = s.satake.rbegin()->first;
      const auto h = hecke_extend(s, std::min(out.table.N, P));
      for (std::int64_t n = 1; n <= h.N; ++n)
        if (std::abs(h(n) - out.table(n)) > 1e-6)
          throw Error(ErrorKind::IngestionMismatch, "coefficients disagree with the Euler product", {n});
    }
  } else {
    out.table = hecke_extend(s, s.satake.rbegin()->first);
  }
  return out;
}

ImportedLFunction import_lfunc_coeffs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_lfunc_json(ss.str());
}

double multiplicativity_defect(const MultFuncTable& f, int samples, std::uint64_t seed) {
  if (f.N < 6) return 0.0;
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples;) {
    const std::int64_t m = 2 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(f.N / 2 - 1));
    const std::int64_t hi = f.N / m;
    if (hi < 2) continue;
    const std::int64_t n = 2 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - 1));
    if (std::gcd(m, n) != 1) continue;
    worst = std::max(worst, std::abs(f(m * n) - f(m) * f(n)));
    ++s;
  }
  return worst;
}

Complex ap_sum(const MultFuncTable& f, std::int64_t q, std::int64_t b, std::int64_t N) {
  if (q < 1 || b < 1 || b > q || q > N) throw Error(ErrorKind::InvalidArgument, "need 1 <= b <= q <= N", {q, b, N});
  if (N > f.N) throw Error(ErrorKind::TableTooShort, "table shorter than N", {N, f.N});
  std::complex<long double> s = 0;
  for (std::int64_t n = b; n <= N; n += q) {
    const Complex v = f(n);
    s += std::complex<long double>(v.real(), v.imag());
  }
  return {static_cast<double>(s.real()), static_cast<double>(s.imag())};
}

std::int64_t euler_phi(std::int64_t n) {
  std::int64_t r = n;
  for (std::int64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      r -= r / p;
    }
  if (n > 1) r -= r / n;
  return r;
}

ConditionReport check_conditions(const MultFuncTable& f, std::int64_t W, std::int64_t b, double C, std::int64_t N,
                                 int threads) {
  if (W < 1 || b < 1 || b > W) throw Error(ErrorKind::InvalidArgument, "need 1 <= b <= W", {W, b});
  if (std::gcd(W, b) != 1) throw Error(ErrorKind::NonCoprime, "b and W are not coprime", {b, W});
  if (N < 3) throw Error(ErrorKind::InvalidArgument, "N must be >= 3", {N});
  const double logN = std::log(static_cast<double>(N));
  const double LC = std::pow(logN, C);
  if (static_cast<double>(W) > LC) throw Error(ErrorKind::InvalidArgument, "W exceeds (log N)^C", {W});
  const std::int64_t need = std::max(N, W * N + W);
  if (need > f.N) throw Error(ErrorKind::TableTooShort, "table shorter than max(N, WN+W)", {need, f.N});

  ConditionReport r;
  r.N = N;
  r.W = W;
  r.b = b;
  r.C = C;
  r.q_max = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(LC)));
  r.min_length = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(static_cast<double>(N) / LC)));
  const double phi_ratio = static_cast<double>(euler_phi(W)) / static_cast<double>(W);

  std::vector<Complex> v(static_cast<std::size_t>(N));
  std::complex<long double> s = 0;
  for (std::int64_t n = 1; n <= N; ++n) {
    v[n - 1] = f(W * n + b);
    s += std::complex<long double>(v[n - 1].real(), v[n - 1].imag());
  }
  r.mean = Complex(static_cast<double>(s.real() / N), static_cast<double>(s.imag() / N));
  r.mean_paper = phi_ratio * r.mean;
  for (auto& x : v) x -= r.mean;
  const auto best = detail::scan_progressions(v, r.q_max, r.min_length, thread_count(threads));
  r.w_equi_stat = phi_ratio * std::max(0.0, best.value) * logN;
  r.witness_a = best.a;
  r.witness_q = best.q;
  r.witness_length = best.length;

  long double lp2 = 0, fl2 = 0;
  for (std::int64_t n = 1; n <= N; ++n) fl2 += std::norm(f(n));
  for (std::uint32_t p : primes_up_to(N)) lp2 += std::norm(f(p)) * std::log(static_cast<long double>(p));
  r.lp2_ratio = static_cast<double>(lp2 / N);
  r.fl2_ratio = static_cast<double>(fl2 / N);
  for (std::int64_t bp = 1; bp <= W; ++bp) {
    if (std::gcd(bp, W) != 1) continue;
    long double t = 0;
    for (std::int64_t n = 1; n <= N; ++n) t += std::norm(f(W * n + bp));
    r.wl2_ratios.emplace_back(bp, static_cast<double>(phi_ratio * t / N));
  }
  return r;
}

}  // namespace nilcorr
