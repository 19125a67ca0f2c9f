#include "nilcorr/polyseq.hpp"

#include "nilcorr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nilcorr {

namespace {

bool is_identity(const GroupElement& x) {
  if (x.is_exact()) {
    for (const auto& r : x.exact())
      if (r != 0) return false;
    return true;
  }
  for (double c : x.coords())
    if (c != 0.0) return false;
  return true;
}

void trim(std::vector<GroupElement>& c) {
  while (c.size() > 1 && is_identity(c.back())) c.pop_back();
}

Rational reduce_mod1(const Rational& r) { return frac(r); }

double reduce_mod1(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

}  // namespace

bool PolySequence::is_exact() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const GroupElement& c) { return c.is_exact(); });
}

PolySequence make_poly_sequence(ManifoldPtr g, std::vector<GroupElement> coeffs, bool validate, double tol) {
  if (coeffs.empty()) throw Error(ErrorKind::InvalidArgument, "a polynomial sequence needs at least g_0");
  for (const auto& c : coeffs) g->check_dim(c);
  if (validate) {
    for (std::size_t i = 1; i < coeffs.size(); ++i)
      if (!g->in_subgroup(coeffs[i], static_cast<int>(i), tol))
        throw Error(ErrorKind::Filtration,
                    "coefficient g_" + std::to_string(i) + " does not lie in G_" + std::to_string(i),
                    {static_cast<std::int64_t>(i)});
  }
  return PolySequence{std::move(g), std::move(coeffs)};
}

PolySequence torus_sequence(ManifoldPtr torus, const std::vector<std::vector<double>>& alphas) {
  std::vector<GroupElement> c;
  for (const auto& a : alphas) c.emplace_back(a);
  return make_poly_sequence(std::move(torus), std::move(c));
}

PolySequence torus_sequence(ManifoldPtr torus, const std::vector<std::vector<Rational>>& alphas) {
  std::vector<GroupElement> c;
  for (const auto& a : alphas) c.emplace_back(a);
  return make_poly_sequence(std::move(torus), std::move(c));
}

GroupElement poly_eval(const PolySequence& g, const BigInt& n) {
  if (abs(n) > BigInt(kMaxEvalIndex))
    throw Error(ErrorKind::Overflow, "sequence index " + n.str() + " exceeds 2^53");
  const Nilmanifold& G = *g.manifold;
  GroupElement acc = g.coeffs[0];
  for (int i = 1; i <= g.degree(); ++i) {
    const BigInt c = binomial(n, static_cast<unsigned>(i));
    if (c == 0) continue;
    acc = G.mul(acc, G.pow(g.coeffs[i], c));
  }
  return acc;
}

PolySequence interpolate(ManifoldPtr g, int degree, const std::function<GroupElement(std::int64_t)>& f) {
  const Nilmanifold& G = *g;
  std::vector<GroupElement> c;
  c.push_back(f(0));
  for (int k = 1; k <= degree; ++k) {
    GroupElement partial = c[0];
    for (int j = 1; j < k; ++j) partial = G.mul(partial, G.pow(c[j], binomial(BigInt(k), static_cast<unsigned>(j))));
    c.push_back(G.mul(G.inv(partial), f(k)));
  }
  trim(c);
  return PolySequence{std::move(g), std::move(c)};
}

PolySequence discrete_derivative(const PolySequence& g, std::int64_t h) {
  const Nilmanifold& G = *g.manifold;
  const int d = g.degree();
  if (h == 0 || d == 0) return PolySequence{g.manifold, {G.identity()}};
  if (G.is_abelian()) {
    // C(n+h, i) = sum_j C(h, i-j) C(n, j)
    const int m = G.dim();
    std::vector<GroupElement> out;
    const BigInt hb(h);
    if (g.is_exact()) {
      for (int j = 0; j < d; ++j) {
        std::vector<Rational> b(static_cast<std::size_t>(m), Rational(0));
        for (int i = j + 1; i <= d; ++i) {
          const Rational w(binomial(hb, static_cast<unsigned>(i - j)));
          for (int t = 0; t < m; ++t) b[t] += w * g.coeffs[i].exact()[t];
        }
        out.emplace_back(std::move(b));
      }
    } else {
      for (int j = 0; j < d; ++j) {
        std::vector<double> b(static_cast<std::size_t>(m), 0.0);
        for (int i = j + 1; i <= d; ++i) {
          const double w = binomial(hb, static_cast<unsigned>(i - j)).convert_to<double>();
          for (int t = 0; t < m; ++t) b[t] += w * g.coeffs[i][t];
        }
        out.emplace_back(std::move(b));
      }
    }
    trim(out);
    return PolySequence{g.manifold, std::move(out)};
  }
  return interpolate(g.manifold, d, [&](std::int64_t n) { return G.mul(poly_eval(g, n + h), G.inv(poly_eval(g, n))); });
}

PolySequence pointwise_product(const PolySequence& a, const PolySequence& b) {
  if (a.manifold.get() != b.manifold.get() && a.manifold->dim() != b.manifold->dim())
    throw Error(ErrorKind::DimensionMismatch, "sequences live on different groups");
  const Nilmanifold& G = *a.manifold;
  const int d = std::max(a.degree(), b.degree());
  if (G.is_abelian()) {
    std::vector<GroupElement> c;
    for (int i = 0; i <= d; ++i) {
      const GroupElement x = i <= a.degree() ? a.coeffs[i] : G.identity();
      const GroupElement y = i <= b.degree() ? b.coeffs[i] : G.identity();
      c.push_back(G.mul(x, y));
    }
    trim(c);
    return PolySequence{a.manifold, std::move(c)};
  }
  // The product of two degree-d sequences on a filtered group has degree at most d
  // for the same filtration, but the binomial expansion needs the group degree.
  const int deg = std::max(d, G.degree());
  return interpolate(a.manifold, deg, [&](std::int64_t n) { return G.mul(poly_eval(a, n), poly_eval(b, n)); });
}

namespace {

GroupElement iterated_derivative(const PolySequence& g, const std::vector<std::int64_t>& h, std::size_t t,
                                 std::int64_t n) {
  if (t == 0) return poly_eval(g, n);
  const Nilmanifold& G = *g.manifold;
  return G.mul(iterated_derivative(g, h, t - 1, n + h[t - 1]), G.inv(iterated_derivative(g, h, t - 1, n)));
}

}  // namespace

MembershipReport check_filtration_membership(const PolySequence& g, int samples, std::uint64_t seed, double tol) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be positive");
  MembershipReport rep;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> hd(-10, 10), nd(-50, 50);
  const Nilmanifold& G = *g.manifold;
  const int d = std::max(g.degree(), G.degree());
  for (int s = 0; s < samples; ++s) {
    for (int i = 1; i <= d; ++i) {
      std::vector<std::int64_t> h(static_cast<std::size_t>(i));
      for (auto& v : h) v = hd(rng);
      const std::int64_t n = nd(rng);
      const GroupElement x = iterated_derivative(g, h, h.size(), n);
      ++rep.checks;
      double defect = 0.0;
      bool bad = false;
      if (x.is_exact()) {
        bad = !G.in_subgroup(x, i);
        if (bad) defect = G.subgroup_defect(x, i);
      } else {
        defect = G.subgroup_defect(x, i);
        bad = defect > tol;
      }
      if (bad) rep.violations.push_back({i, h, n, defect});
    }
  }
  return rep;
}

TorusPolynomial::TorusPolynomial(std::vector<double> alphas) : alphas_(std::move(alphas)) {
  for (auto& a : alphas_) a = reduce_mod1(a);
}

TorusPolynomial::TorusPolynomial(std::vector<Rational> alphas) {
  for (auto& a : alphas) {
    a = reduce_mod1(a);
    alphas_.push_back(to_double(a));
  }
  exact_ = std::move(alphas);
}

double TorusPolynomial::eval(std::int64_t n) const {
  Rational s = 0;
  for (int i = 0; i <= degree(); ++i) {
    const Rational a = exact_ ? (*exact_)[i] : exact_rational(alphas_[i]);
    s += a * Rational(binomial(BigInt(n), static_cast<unsigned>(i)));
  }
  return to_double(frac(s));
}

double dist_to_int(double x) {
  const double f = x - std::floor(x);
  return std::min(f, 1.0 - f);
}

Rational dist_to_int(const Rational& x) {
  const Rational f = frac(x);
  const Rational g = 1 - f;
  return f < g ? f : g;
}

double smoothness_norm(const TorusPolynomial& t, double N) {
  if (N < 1.0) throw Error(ErrorKind::InvalidArgument, "N must be at least 1");
  double best = 0.0;
  if (t.is_exact() && N == std::floor(N) && N < 9.0e15) {
    const Rational nr(BigInt(static_cast<long long>(N)));
    Rational p = 1, top = 0;
    for (int j = 1; j <= t.degree(); ++j) {
      p *= nr;
      const Rational v = p * dist_to_int(t.exact()[j]);
      if (v > top) top = v;
    }
    return to_double(top);
  }
  double p = 1.0;
  for (int j = 1; j <= t.degree(); ++j) {
    p *= N;
    best = std::max(best, p * dist_to_int(t.alphas()[j]));
  }
  return best;
}

namespace {

// Stirling numbers of the second kind S(j,k) and signed first kind s(k,j).
std::vector<std::vector<BigInt>> stirling2(int n) {
  std::vector<std::vector<BigInt>> s(static_cast<std::size_t>(n) + 1, std::vector<BigInt>(static_cast<std::size_t>(n) + 1, 0));
  s[0][0] = 1;
  for (int j = 1; j <= n; ++j)
    for (int k = 1; k <= j; ++k) s[j][k] = BigInt(k) * s[j - 1][k] + s[j - 1][k - 1];
  return s;
}

std::vector<std::vector<BigInt>> stirling1(int n) {
  std::vector<std::vector<BigInt>> s(static_cast<std::size_t>(n) + 1, std::vector<BigInt>(static_cast<std::size_t>(n) + 1, 0));
  s[0][0] = 1;
  for (int k = 1; k <= n; ++k)
    for (int j = 1; j <= k; ++j) s[k][j] = s[k - 1][j - 1] - BigInt(k - 1) * s[k - 1][j];
  return s;
}

BigInt factorial(int k) {
  BigInt f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<Rational> monomial_to_binomial(const std::vector<Rational>& a) {
  const int d = static_cast<int>(a.size()) - 1;
  const auto s = stirling2(std::max(d, 0));
  std::vector<Rational> b(a.size(), Rational(0));
  for (int j = 0; j <= d; ++j)
    for (int k = 0; k <= j; ++k) b[k] += a[j] * Rational(s[j][k] * factorial(k));
  return b;
}

std::vector<Rational> binomial_to_monomial(const std::vector<Rational>& b) {
  const int d = static_cast<int>(b.size()) - 1;
  const auto s = stirling1(std::max(d, 0));
  std::vector<Rational> a(b.size(), Rational(0));
  for (int k = 0; k <= d; ++k)
    for (int j = 0; j <= k; ++j) a[j] += b[k] * Rational(s[k][j], factorial(k));
  return a;
}

std::int64_t HorizontalCharacter::modulus() const {
  std::int64_t m = 0;
  for (auto v : k) m = std::max<std::int64_t>(m, v < 0 ? -v : v);
  return m;
}

bool is_horizontal(const Nilmanifold& g, const std::vector<std::int64_t>& k) {
  const int m = g.dim();
  if (static_cast<int>(k.size()) != m) return false;
  if (g.is_abelian()) return true;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      Rational s = 0;
      for (int c = 0; c < m; ++c)
        if (k[c] != 0) s += Rational(k[c]) * g.constant(a, b, c);
      if (s != 0) return false;
    }
  return true;
}

double char_eval(const HorizontalCharacter& eta, const GroupElement& x) {
  if (x.is_exact()) {
    Rational s = 0;
    for (std::size_t i = 0; i < eta.k.size(); ++i)
      if (eta.k[i] != 0) s += Rational(eta.k[i]) * x.exact()[i];
    return to_double(frac(s));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < eta.k.size(); ++i) s += static_cast<double>(eta.k[i]) * x[static_cast<int>(i)];
  return reduce_mod1(s);
}

TorusPolynomial char_compose(const HorizontalCharacter& eta, const PolySequence& g) {
  if (!is_horizontal(*g.manifold, eta.k))
    throw Error(ErrorKind::CharacterManifoldMismatch, "k is not a horizontal character of this manifold");
  if (g.is_exact()) {
    std::vector<Rational> a;
    for (const auto& c : g.coeffs) {
      Rational s = 0;
      for (std::size_t i = 0; i < eta.k.size(); ++i)
        if (eta.k[i] != 0) s += Rational(eta.k[i]) * c.exact()[i];
      a.push_back(s);
    }
    return TorusPolynomial(std::move(a));
  }
  std::vector<double> a;
  for (const auto& c : g.coeffs) {
    double s = 0.0;
    for (std::size_t i = 0; i < eta.k.size(); ++i) s += static_cast<double>(eta.k[i]) * c[static_cast<int>(i)];
    a.push_back(s);
  }
  return TorusPolynomial(std::move(a));
}

namespace {

// Coordinates that every horizontal character must leave at zero: repeatedly
// take annihilation equations with a single surviving unknown.
std::vector<char> forced_zero(const Nilmanifold& g) {
  const int m = g.dim();
  std::vector<char> zero(static_cast<std::size_t>(m), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        int live = -1, count = 0;
        for (int c = 0; c < m; ++c)
          if (!zero[c] && g.constant(a, b, c) != 0) {
            live = c;
            ++count;
          }
        if (count == 1) {
          zero[live] = 1;
          changed = true;
        }
      }
  }
  return zero;
}

std::int64_t rank_value(std::int64_t r) { return r % 2 == 1 ? (r + 1) / 2 : -(r / 2); }

}  // namespace

void for_each_character(const Nilmanifold& g, std::int64_t q_max,
                        const std::function<bool(const HorizontalCharacter&)>& visit) {
  if (q_max < 1) throw Error(ErrorKind::InvalidArgument, "Q_max must be at least 1");
  const int m = g.dim();
  const auto zero = forced_zero(g);
  std::vector<int> free;
  for (int i = 0; i < m; ++i)
    if (!zero[i]) free.push_back(i);
  if (free.empty()) return;
  const std::size_t r = free.size();
  HorizontalCharacter eta;
  eta.k.assign(static_cast<std::size_t>(m), 0);
  std::vector<std::int64_t> rank(r, 0);
  for (std::int64_t s = 1; s <= q_max; ++s) {
    const std::int64_t top = 2 * s;
    std::fill(rank.begin(), rank.end(), 0);
    while (true) {
      bool on_shell = false;
      for (std::size_t i = 0; i < r; ++i) {
        const std::int64_t v = rank_value(rank[i]);
        eta.k[free[i]] = v;
        if (v == s || v == -s) on_shell = true;
      }
      if (on_shell && is_horizontal(g, eta.k) && !visit(eta)) return;
      std::size_t pos = r;
      while (pos > 0) {
        --pos;
        if (rank[pos] < top) {
          ++rank[pos];
          break;
        }
        rank[pos] = 0;
        if (pos == 0) {
          pos = r + 1;
          break;
        }
      }
      if (pos == r + 1) break;
    }
  }
}

std::vector<HorizontalCharacter> enumerate_characters(const Nilmanifold& g, std::int64_t q_max) {
  std::vector<HorizontalCharacter> out;
  for_each_character(g, q_max, [&](const HorizontalCharacter& e) {
    out.push_back(e);
    return true;
  });
  return out;
}

}  // namespace nilcorr
