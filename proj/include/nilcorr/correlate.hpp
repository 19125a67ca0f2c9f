#pragma once

// Centered correlation sums of multiplicative functions with nilsequences,
// the log-weighted decomposition over primes and two divisor-sum identities.

#include "nilcorr/multfunc.hpp"
#include "nilcorr/polyseq.hpp"
#include "nilcorr/testfn.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nilcorr {

struct CorrelationOptions {
  std::int64_t chunk_size = std::int64_t(1) << 16;
  int threads = 0;
  int lip_grid = 256;
};

struct CorrelationReport {
  std::int64_t N = 0, W = 1, b = 1;
  Complex S;
  Complex mean_f;      // (1/N) sum f(Wn+b), the centering constant
  Complex mean_paper;  // phi(W)/W times mean_f
  double lip_estimate = 0.0;
  double decay_stat = 0.0;  // |S| log N / (1 + lip_estimate)
  double runtime_ms = 0.0;
};

// S = phi(W)/(W N) sum_{n<=N} (f(Wn+b) - mean_f) F(g(n) Gamma).
//
// Terms are summed in fixed chunks of opt.chunk_size and the chunk sums are
// combined pairwise, so the result depends on the chunk size but not on the
// thread count.  Constant summands of F (a constant node, or constant terms of
// a top-level sum) contribute sum (f - mean_f) = 0 and are dropped before
// summation.
CorrelationReport correlation_sum(const MultFuncTable& f, const PolySequence& g, const TestFunction& F, std::int64_t N,
                                  std::int64_t W, std::int64_t b, const CorrelationOptions& opt = {});

std::vector<CorrelationReport> decay_scan(const MultFuncTable& f, const PolySequence& g, const TestFunction& F,
                                          const std::vector<std::int64_t>& N_list, std::int64_t W, std::int64_t b,
                                          const CorrelationOptions& opt = {});

std::string to_csv(const std::vector<CorrelationReport>& reports);  // N,W,b,re_S,im_S,abs_S,decay_stat,lip_estimate,runtime_ms
std::string to_json(const CorrelationReport& r);

// Primes p in (lo, hi].
struct DyadicRange {
  bool large = false;  // small: (U/2^(k+1), U/2^k]; large: (2^k U, 2^(k+1) U]
  int k = 0;
  double lo = 0.0, hi = 0.0;
  Complex value;
};

// With m = Wn + b and w(n) = F(g(n) Gamma):
//   total      = sum_n log(m) f(m) w(n)
//   small/large = sum_n sum_{p | m} log p f(p) f(m/p) w(n), split at U
//   prime_power = sum_n sum_{p^k | m, k >= 2} log p f(m) w(n)
//   nonsplit    = sum_n sum_{p | m} log p (f(m) - f(p) f(m/p)) w(n)
// The four parts add up to the total for every f.
struct MVDecomposition {
  std::int64_t N = 0, W = 1, b = 1;
  std::int64_t U = 0;  // floor(N^(2/3))
  Complex total;
  Complex small_prime_part, large_prime_part, prime_power_part, nonsplit_part;
  std::vector<DyadicRange> dyadic_breakdown;

  Complex reassembled() const { return small_prime_part + large_prime_part + prime_power_part + nonsplit_part; }
  double relative_error() const;
};

MVDecomposition log_weight_decompose(const MultFuncTable& f, const PolySequence& g, const TestFunction& F,
                                     std::int64_t N, std::int64_t W, std::int64_t b,
                                     const CorrelationOptions& opt = {});

std::int64_t icbrt(std::int64_t n);  // floor(n^(1/3))

// max_{n<=N} |Lambda(n) - (Type I and II terms of Vaughan's identity with
// U = V = N^(1/3))|.
double vaughan_check(std::int64_t N);

// max_{n<=N} |log n - sum_{d|n} Lambda(d)|
double von_mangoldt_log_identity(std::int64_t N);

}  // namespace nilcorr
