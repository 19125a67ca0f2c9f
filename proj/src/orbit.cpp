#include "nilcorr/orbit.hpp"

#include "nilcorr/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nilcorr {

namespace {

const BigInt& two128() {
  static const BigInt v = BigInt(1) << 128;
  return v;
}

u128 from_big(const BigInt& v) {
  const BigInt mask64 = (BigInt(1) << 64) - 1;
  const auto lo = static_cast<std::uint64_t>(v & mask64);
  const auto hi = static_cast<std::uint64_t>((v >> 64) & mask64);
  return (static_cast<u128>(hi) << 64) | lo;
}

// floor(r * 2^64) mod 2^128
u128 to_fixed64(const Rational& r) { return mod_2_128(floor_big(r * Rational(BigInt(1) << 64))); }

}  // namespace

u128 mod_2_128(const BigInt& v) {
  BigInt m = v % two128();
  if (m < 0) m += two128();
  return from_big(m);
}

u128 to_fixed128(const Rational& r) { return mod_2_128(floor_big(frac(r) * Rational(two128()))); }

double fixed_to_unit(u128 x) {
  const double v = std::ldexp(static_cast<double>(static_cast<std::uint64_t>(x >> 64)), -64) +
                   std::ldexp(static_cast<double>(static_cast<std::uint64_t>(x)), -128);
  return v >= 1.0 ? 0.0 : v;
}

PolySequence to_exact(const PolySequence& g) {
  if (g.is_exact()) return g;
  PolySequence out{g.manifold, {}};
  for (const auto& c : g.coeffs) {
    if (c.is_exact()) {
      out.coeffs.push_back(c);
      continue;
    }
    std::vector<Rational> e;
    for (double v : c.coords()) e.push_back(exact_rational(v));
    out.coeffs.emplace_back(std::move(e));
  }
  return out;
}

PolySequence compose_affine(const PolySequence& g, std::int64_t q, std::int64_t a) {
  const PolySequence e = to_exact(g);
  const int deg = g.manifold->is_abelian() ? g.degree() : std::max(g.degree(), g.manifold->degree());
  return interpolate(g.manifold, deg, [&](std::int64_t l) { return poly_eval(e, BigInt(a) + BigInt(q) * l); });
}

bool OrbitWalker::fast_path_available(const PolySequence& g) {
  const Nilmanifold& G = *g.manifold;
  if (G.is_abelian()) return true;
  if (G.family() == Family::heisenberg) return denominator(G.constant(0, 1, 2)) == 1;
  return false;
}

OrbitWalker::OrbitWalker(const PolySequence& g, std::int64_t n0) : dim_(g.manifold->dim()), deg_(g.degree()), n_(n0) {
  out_.assign(static_cast<std::size_t>(dim_), 0.0);
  const Nilmanifold& G = *g.manifold;
  const PolySequence e = fast_path_available(g) ? to_exact(g) : g;
  const int d = deg_;
  if (G.is_abelian()) {
    mode_ = Mode::torus;
    diff_.assign(static_cast<std::size_t>(d + 1) * dim_, 0);
    for (int k = 0; k <= d; ++k)
      for (int j = 0; j < dim_; ++j) {
        Rational s = 0;
        for (int i = k; i <= d; ++i) s += Rational(binomial(BigInt(n0), static_cast<unsigned>(i - k))) * e.coeffs[i].exact()[j];
        diff_[static_cast<std::size_t>(k) * dim_ + j] = to_fixed128(s);
      }
  } else if (fast_path_available(g)) {
    mode_ = Mode::heisenberg;
    kappa_ = mod_2_128(numerator(G.constant(0, 1, 2)));
    for (int i = 0; i <= d; ++i) {
      const auto& c = e.coeffs[i].exact();
      a_.push_back(to_fixed64(c[0]));
      b_.push_back(to_fixed64(c[1]));
      c_.push_back(to_fixed128(c[2]));
      const BigInt bin = binomial(BigInt(n0), static_cast<unsigned>(i));
      binom_.push_back(mod_2_128(bin));
      pairs_.push_back(mod_2_128(binomial(bin, 2)));
    }
    ab_.resize(static_cast<std::size_t>(d + 1) * (d + 1));
    for (int j = 0; j <= d; ++j)
      for (int i = 0; i <= d; ++i) ab_[static_cast<std::size_t>(j) * (d + 1) + i] = a_[j] * b_[i];
  } else {
    mode_ = Mode::slow;
    seq_ = g;
  }
  emit();
}

void OrbitWalker::emit() {
  switch (mode_) {
    case Mode::torus:
      for (int j = 0; j < dim_; ++j) out_[j] = fixed_to_unit(diff_[j]);
      break;
    case Mode::heisenberg: {
      const int d = deg_;
      u128 x = 0, y = 0, z = 0;
      for (int i = 0; i <= d; ++i) {
        const u128 ci = binom_[i];
        x += ci * a_[i];
        y += ci * b_[i];
        z += ci * c_[i] + kappa_ * pairs_[i] * ab_[static_cast<std::size_t>(i) * (d + 1) + i];
        for (int j = 0; j < i; ++j) z += kappa_ * (binom_[j] * ci) * ab_[static_cast<std::size_t>(j) * (d + 1) + i];
      }
      // A fractional part that would round to 1.0 as a double is carried into
      // the integer part, so the three outputs describe the same coset.
      constexpr std::uint64_t kNearOne = ~std::uint64_t(0) - 2047;
      auto xlow = static_cast<std::uint64_t>(x);
      auto ylow = static_cast<std::uint64_t>(y);
      auto yhigh = static_cast<std::uint64_t>(y >> 64);
      if (xlow >= kNearOne) xlow = 0;
      if (ylow >= kNearOne) {
        ylow = 0;
        ++yhigh;
      }
      const std::uint64_t corr = static_cast<std::uint64_t>(kappa_) * xlow * yhigh;
      z -= static_cast<u128>(corr) << 64;
      out_[0] = fixed_to_unit(static_cast<u128>(xlow) << 64);
      out_[1] = fixed_to_unit(static_cast<u128>(ylow) << 64);
      out_[2] = fixed_to_unit(z);
      break;
    }
    case Mode::slow: {
      const auto r = seq_.manifold->reduce(poly_eval(seq_, n_));
      for (int j = 0; j < dim_; ++j) out_[j] = r.frac[j];
      break;
    }
  }
}

void OrbitWalker::advance() {
  ++n_;
  switch (mode_) {
    case Mode::torus:
      for (int k = 0; k < deg_; ++k)
        for (int j = 0; j < dim_; ++j)
          diff_[static_cast<std::size_t>(k) * dim_ + j] += diff_[static_cast<std::size_t>(k + 1) * dim_ + j];
      break;
    case Mode::heisenberg:
      for (int i = deg_; i >= 1; --i) {
        pairs_[i] += binom_[i] * binom_[i - 1] + pairs_[i - 1];
        binom_[i] += binom_[i - 1];
      }
      break;
    case Mode::slow: break;
  }
  emit();
}

}  // namespace nilcorr
