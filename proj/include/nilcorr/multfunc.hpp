#pragma once

// Tables of arithmetic functions on 1..N: sieved Möbius, Liouville and von
// Mangoldt, Ramanujan τ from the q-expansion of Δ, Hecke extension of Satake
// parameters, imported L-function coefficients, and the class-M' statistics.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nilcorr {

using Complex = std::complex<double>;

enum class FuncKind { mobius, liouville, lambda_pi_gl2, lambda_pi_imported, mobius_times_lambda, von_mangoldt, custom };
enum class Normalization { arithmetic, analytic };

const char* to_string(FuncKind k);
FuncKind func_kind_from_string(const std::string& s);

// Values at n = 1..N; index 0 is unused.  Exactly one storage vector is
// filled: `small` for μ and λ, `base` for Λ (p when n = p^k, else 0, the
// value being log p), `real` or `cplx` otherwise.
struct MultFuncTable {
  FuncKind kind = FuncKind::custom;
  Normalization normalization = Normalization::arithmetic;
  std::int64_t N = 0;
  std::vector<std::int8_t> small;
  std::vector<std::uint32_t> base;
  std::vector<double> real;
  std::vector<Complex> cplx;

  bool is_real() const { return cplx.empty(); }
  double re(std::int64_t n) const {
    if (!small.empty()) return small[n];
    if (!base.empty()) return base[n] ? log_base(n) : 0.0;
    if (!real.empty()) return real[n];
    return cplx[n].real();
  }
  Complex operator()(std::int64_t n) const { return cplx.empty() ? Complex(re(n), 0.0) : cplx[n]; }
  Complex prime_value(std::int64_t p) const { return (*this)(p); }

 private:
  double log_base(std::int64_t n) const;
};

MultFuncTable real_table(FuncKind kind, std::vector<double> values_from_1, Normalization norm = Normalization::arithmetic);
MultFuncTable complex_table(FuncKind kind, std::vector<Complex> values_from_1,
                            Normalization norm = Normalization::analytic);

// f(n) g(n)
MultFuncTable pointwise_product(const MultFuncTable& f, const MultFuncTable& g, FuncKind kind);

struct SieveOptions {
  std::size_t memory_budget = std::size_t(2) << 30;  // bytes
  std::int64_t segment = std::int64_t(1) << 18;
  int threads = 0;  // 0 = OpenMP default
};

std::vector<std::uint32_t> primes_up_to(std::int64_t n);

MultFuncTable sieve_mobius(std::int64_t N, const SieveOptions& opt = {});
MultFuncTable sieve_liouville(std::int64_t N, const SieveOptions& opt = {});
MultFuncTable sieve_von_mangoldt(std::int64_t N, const SieveOptions& opt = {});

// Sum of mu(n) for n <= N computed from a table.
std::int64_t mertens(const MultFuncTable& mu, std::int64_t N);

struct TauOptions {
  std::int64_t cap = std::int64_t(1) << 24;
  std::int64_t exact_cap = 1000000;  // exact τ(n) kept for n <= exact_cap
  int threads = 0;
};

struct TauTable {
  std::int64_t N = 0;
  std::vector<__int128> exact;      // τ(n), n <= min(N, exact_cap)
  std::vector<double> normalized;   // τ(n) n^{-11/2}, n <= N
};

// Coefficients of Δ = q Π(1-q^n)^24 = η^24 with η^3 = Σ (-1)^k (2k+1) q^{k(k+1)/2}:
// the η^3 series is squared sparsely and the result raised to the 4th power by
// NTT modulo five primes with Garner reconstruction.
TauTable tau_table(std::int64_t N, const TauOptions& opt = {});
MultFuncTable normalize_gl2(const TauTable& t);

// τ(n) for n <= N rebuilt in integers from τ(p) alone:
// τ(p^{k+1}) = τ(p) τ(p^k) - p^11 τ(p^{k-1}) and multiplicativity.
// Needs N <= t.exact.size() - 1 and fits __int128 for N <= 10^6.
std::vector<__int128> tau_from_hecke(const TauTable& t, std::int64_t N);

enum class SatakeSource { builtin_delta, imported };

struct AutomorphicSpec {
  int m_rank = 2;
  std::map<std::int64_t, std::vector<Complex>> satake;  // p -> alpha_j(p)
  SatakeSource source = SatakeSource::imported;
  std::string conductor_label;
  std::string archimedean;  // opaque metadata, not used in computation
};

// alpha = (lambda(p) ± i sqrt(4 - lambda(p)^2)) / 2 from the normalized τ.
AutomorphicSpec builtin_delta_spec(const TauTable& t);

// lambda(p^k) = h_k(alpha_1(p), ..., alpha_m(p)), extended multiplicatively.
MultFuncTable hecke_extend(const AutomorphicSpec& spec, std::int64_t N);

// |alpha|^2 <= p^{1 - 2/(m^2+1)} checked in exact rational arithmetic on the
// double inputs.  Throws BoundViolation with data {p, j} (j is 1-based).
void check_satake_bound(const AutomorphicSpec& spec);

struct ImportedLFunction {
  AutomorphicSpec spec;
  MultFuncTable table;
};

// {label, rank, normalization: "analytic", primes: [{p, alphas: [[re,im],...]}],
//  coefficients: optional [[re,im], ...] for n = 1..N}
ImportedLFunction parse_lfunc_json(const std::string& text);
ImportedLFunction import_lfunc_coeffs(const std::string& path);

// max |f(mn) - f(m) f(n)| over `samples` random coprime pairs with mn <= N.
double multiplicativity_defect(const MultFuncTable& f, int samples, std::uint64_t seed = 1);

// sum_{n <= N, n ≡ b (mod q)} f(n)
Complex ap_sum(const MultFuncTable& f, std::int64_t q, std::int64_t b, std::int64_t N);

std::int64_t euler_phi(std::int64_t n);

struct ConditionReport {
  std::int64_t N = 0, W = 1, b = 1;
  double C = 0.0;
  std::int64_t q_max = 0;        // floor((log N)^C)
  std::int64_t min_length = 0;   // ceil(N / (log N)^C)
  Complex mean;                  // (1/N) sum f(Wn+b), used for centering
  Complex mean_paper;            // phi(W)/W times mean
  double w_equi_stat = 0.0;
  std::int64_t witness_a = 1, witness_q = 1, witness_length = 0;
  double lp2_ratio = 0.0;
  double fl2_ratio = 0.0;
  std::vector<std::pair<std::int64_t, double>> wl2_ratios;  // (b', ratio)
};

// Needs f on 1..max(N, W N + W).
ConditionReport check_conditions(const MultFuncTable& f, std::int64_t W, std::int64_t b, double C, std::int64_t N,
                                 int threads = 0);

}  // namespace nilcorr
