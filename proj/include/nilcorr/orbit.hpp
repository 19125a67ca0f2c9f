#pragma once

// Sequential evaluation of n -> reduce(g(n)).frac for consecutive n.
//
// Torus and Heisenberg sequences use exact modular fixed-point arithmetic:
// torus phases at 2^-128, Heisenberg horizontal coordinates at 2^-64 (modulo
// 2^64) and the central coordinate at 2^-128.  The binomial coefficients
// C(n,i) are advanced with Pascal's rule, so there is no drift with n.
// Coefficients are used through their exact dyadic value rounded to that
// resolution (exact for doubles in [2^-11, 2^53) on the Heisenberg path).
// Other groups fall back to poly_eval + reduce in double precision.

#include "nilcorr/polyseq.hpp"

#include <cstdint>
#include <vector>

namespace nilcorr {

using u128 = unsigned __int128;

u128 to_fixed128(const Rational& r);  // floor(frac(r) * 2^128)
u128 mod_2_128(const BigInt& v);
double fixed_to_unit(u128 x);         // x / 2^128 in [0,1)

class OrbitWalker {
 public:
  OrbitWalker(const PolySequence& g, std::int64_t n0);

  enum class Mode { torus, heisenberg, slow };
  Mode mode() const { return mode_; }
  static bool fast_path_available(const PolySequence& g);

  int dim() const { return dim_; }
  std::int64_t n() const { return n_; }
  const double* coords() const { return out_.data(); }
  void advance();

 private:
  void emit();

  Mode mode_ = Mode::slow;
  int dim_ = 0;
  int deg_ = 0;
  std::int64_t n_ = 0;
  std::vector<double> out_;

  // torus: difference table v[k*dim + j] = sum_i alpha_ij C(n, i-k)
  std::vector<u128> diff_;

  // heisenberg
  u128 kappa_ = 1;
  std::vector<u128> a_, b_, c_;  // a,b at 2^-64 (mod 2^128), c at 2^-128
  std::vector<u128> binom_;      // C(n,i) mod 2^128
  std::vector<u128> pairs_;      // C(C(n,i), 2) mod 2^128
  std::vector<u128> ab_;         // a_j b_i mod 2^128, row-major j*(d+1)+i

  PolySequence seq_;
};

// Exact copy of g (double coordinates converted to their exact values).
PolySequence to_exact(const PolySequence& g);

// l -> g(a + q l), exact when g is exact.
PolySequence compose_affine(const PolySequence& g, std::int64_t q, std::int64_t a);

}  // namespace nilcorr
