#include "nilcorr/testfn.hpp"

#include "nilcorr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

namespace nilcorr {

Complex e1(double t) {
  const double a = 2.0 * std::numbers::pi * (t - std::floor(t));
  return {std::cos(a), std::sin(a)};
}

double bump(double t) {
  if (t <= kBumpLo || t >= kBumpHi) return 0.0;
  const double s = std::sin(std::numbers::pi * (t - kBumpLo) / (kBumpHi - kBumpLo));
  return s * s;
}

struct TestFunction::Node {
  Kind kind = Kind::constant;
  Complex c{1.0, 0.0};
  std::vector<std::int64_t> k;
  int j = 0;
  std::vector<std::shared_ptr<const Node>> kids;
};

TestFunction TestFunction::constant(Complex c) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::constant;
  n->c = c;
  return TestFunction(std::move(n));
}

TestFunction TestFunction::character(std::vector<std::int64_t> k) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::character;
  n->k = std::move(k);
  return TestFunction(std::move(n));
}

TestFunction TestFunction::vertical_character(int dim, std::int64_t k) {
  std::vector<std::int64_t> v(static_cast<std::size_t>(dim), 0);
  v.back() = k;
  return character(std::move(v));
}

TestFunction TestFunction::coord(int j) {
  if (j < 0) throw Error(ErrorKind::EvaluationDomain, "negative coordinate index");
  auto n = std::make_shared<Node>();
  n->kind = Kind::coord;
  n->j = j;
  return TestFunction(std::move(n));
}

TestFunction TestFunction::frac(TestFunction child) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::frac;
  n->kids.push_back(child.node_);
  return TestFunction(std::move(n));
}

TestFunction TestFunction::bump(int j) {
  if (j < 0) throw Error(ErrorKind::EvaluationDomain, "negative coordinate index");
  auto n = std::make_shared<Node>();
  n->kind = Kind::bump;
  n->j = j;
  return TestFunction(std::move(n));
}

TestFunction TestFunction::product(std::vector<TestFunction> factors) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::product;
  for (auto& f : factors) n->kids.push_back(f.node_);
  return TestFunction(std::move(n));
}

TestFunction TestFunction::sum(std::vector<TestFunction> terms) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::sum;
  for (auto& f : terms) n->kids.push_back(f.node_);
  return TestFunction(std::move(n));
}

TestFunction::Kind TestFunction::kind() const { return node_->kind; }
Complex TestFunction::scalar() const { return node_->c; }
const std::vector<std::int64_t>& TestFunction::k() const { return node_->k; }
int TestFunction::index() const { return node_->j; }

std::vector<TestFunction> TestFunction::children() const {
  std::vector<TestFunction> out;
  for (const auto& c : node_->kids) out.push_back(TestFunction(c));
  return out;
}

Complex TestFunction::eval_reduced(const double* x, int dim) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::constant: return n.c;
    case Kind::character: {
      if (static_cast<int>(n.k.size()) != dim)
        throw Error(ErrorKind::EvaluationDomain, "character length does not match the dimension");
      double s = 0.0;
      for (int i = 0; i < dim; ++i)
        if (n.k[i] != 0) s += static_cast<double>(n.k[i]) * x[i];
      return e1(s);
    }
    case Kind::coord:
      if (n.j >= dim) throw Error(ErrorKind::EvaluationDomain, "coordinate " + std::to_string(n.j + 1) + " undefined");
      return {x[n.j], 0.0};
    case Kind::frac: {
      const Complex v = TestFunction(n.kids[0]).eval_reduced(x, dim);
      if (std::abs(v.imag()) > 1e-12) throw Error(ErrorKind::EvaluationDomain, "frac of a complex value");
      return {v.real() - std::floor(v.real()), 0.0};
    }
    case Kind::bump:
      if (n.j >= dim) throw Error(ErrorKind::EvaluationDomain, "coordinate " + std::to_string(n.j + 1) + " undefined");
      return {nilcorr::bump(x[n.j]), 0.0};
    case Kind::product: {
      Complex p{1.0, 0.0};
      for (const auto& c : n.kids) {
        p *= TestFunction(c).eval_reduced(x, dim);
        if (p == Complex{0.0, 0.0}) break;
      }
      return p;
    }
    case Kind::sum: {
      Complex s{0.0, 0.0};
      for (const auto& c : n.kids) s += TestFunction(c).eval_reduced(x, dim);
      return s;
    }
  }
  return {0.0, 0.0};
}

Complex TestFunction::eval(const Nilmanifold& g, const GroupElement& x) const {
  const auto r = g.reduce(x);
  return eval_reduced(r.frac.coords().data(), g.dim());
}

int TestFunction::max_coord() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::coord:
    case Kind::bump: return n.j;
    case Kind::character: {
      int m = -1;
      for (std::size_t i = 0; i < n.k.size(); ++i)
        if (n.k[i] != 0) m = static_cast<int>(i);
      return m;
    }
    default: {
      int m = -1;
      for (const auto& c : n.kids) m = std::max(m, TestFunction(c).max_coord());
      return m;
    }
  }
}

std::string TestFunction::describe() const {
  const Node& n = *node_;
  std::ostringstream os;
  switch (n.kind) {
    case Kind::constant:
      if (n.c.imag() == 0.0)
        os << n.c.real();
      else
        os << "(" << n.c.real() << (n.c.imag() < 0 ? "" : "+") << n.c.imag() << "i)";
      break;
    case Kind::character: {
      os << "e(";
      bool first = true;
      for (std::size_t i = 0; i < n.k.size(); ++i) {
        if (n.k[i] == 0) continue;
        if (!first) os << (n.k[i] > 0 ? "+" : "");
        if (n.k[i] == -1)
          os << "-";
        else if (n.k[i] != 1)
          os << n.k[i] << "*";
        os << "x" << i + 1;
        first = false;
      }
      if (first) os << "0";
      os << ")";
      break;
    }
    case Kind::coord: os << "x" << n.j + 1; break;
    case Kind::frac: os << "frac(" << TestFunction(n.kids[0]).describe() << ")"; break;
    case Kind::bump: os << "psi(x" << n.j + 1 << ")"; break;
    case Kind::product:
    case Kind::sum: {
      const char* sep = n.kind == Kind::product ? "*" : " + ";
      if (n.kind == Kind::sum) os << "(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << sep;
        os << TestFunction(n.kids[i]).describe();
      }
      if (n.kind == Kind::sum) os << ")";
      break;
    }
  }
  return os.str();
}

namespace {

// One-variable factor of a product term.
enum class Atom { coord, bump };

struct Term {
  Complex scalar{1.0, 0.0};
  std::map<int, std::int64_t> freq;        // character frequency per coordinate
  std::map<int, std::vector<Atom>> atoms;  // real factors per coordinate
};

constexpr int kQuadraturePoints = 1000000;

std::mutex g_cache_mutex;
std::map<std::string, Complex> g_cache;

Complex quadrature(std::int64_t freq, const std::vector<Atom>& atoms) {
  std::string key = std::to_string(freq) + ":";
  for (auto a : atoms) key += a == Atom::coord ? 'c' : 'b';
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
  }
  const double h = 1.0 / kQuadraturePoints;
  double re = 0.0, im = 0.0;
  for (int i = 0; i < kQuadraturePoints; ++i) {
    const double t = (i + 0.5) * h;
    double v = 1.0;
    for (auto a : atoms) v *= a == Atom::coord ? t : bump(t);
    if (v == 0.0) continue;
    const Complex c = freq == 0 ? Complex{1.0, 0.0} : e1(static_cast<double>(freq) * t);
    re += v * c.real();
    im += v * c.imag();
  }
  const Complex r{re * h, im * h};
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_cache.emplace(key, r);
  return r;
}

Complex integrate_coordinate(std::int64_t freq, const std::vector<Atom>& atoms) {
  if (atoms.empty()) return freq == 0 ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
  if (freq == 0 && atoms.size() == 1 && atoms[0] == Atom::coord) return {0.5, 0.0};
  return quadrature(freq, atoms);
}

void check_index(int j, int dim) {
  if (j >= dim) throw Error(ErrorKind::EvaluationDomain, "coordinate " + std::to_string(j + 1) + " undefined");
}

// Expands the node into a sum of separable product terms.
std::vector<Term> expand(const TestFunction& f, int dim) {
  using K = TestFunction::Kind;
  switch (f.kind()) {
    case K::constant: {
      Term t;
      t.scalar = f.scalar();
      return {t};
    }
    case K::character: {
      if (static_cast<int>(f.k().size()) != dim)
        throw Error(ErrorKind::EvaluationDomain, "character length does not match the dimension");
      Term t;
      for (int i = 0; i < dim; ++i)
        if (f.k()[i] != 0) t.freq[i] = f.k()[i];
      return {t};
    }
    case K::coord: {
      check_index(f.index(), dim);
      Term t;
      t.atoms[f.index()].push_back(Atom::coord);
      return {t};
    }
    case K::bump: {
      check_index(f.index(), dim);
      Term t;
      t.atoms[f.index()].push_back(Atom::bump);
      return {t};
    }
    case K::frac: {
      const auto child = f.children()[0];
      if (child.kind() == K::coord) return expand(child, dim);
      if (child.kind() == K::constant && child.scalar().imag() == 0.0) {
        Term t;
        const double v = child.scalar().real();
        t.scalar = {v - std::floor(v), 0.0};
        return {t};
      }
      throw Error(ErrorKind::UnknownIntegral, "integral of " + f.describe() + " is not determined by the grammar");
    }
    case K::sum: {
      std::vector<Term> out;
      for (const auto& c : f.children()) {
        auto part = expand(c, dim);
        out.insert(out.end(), part.begin(), part.end());
      }
      return out;
    }
    case K::product: {
      std::vector<Term> acc{Term{}};
      for (const auto& c : f.children()) {
        auto part = expand(c, dim);
        std::vector<Term> next;
        for (const auto& a : acc)
          for (const auto& b : part) {
            Term t = a;
            t.scalar *= b.scalar;
            for (const auto& [j, k] : b.freq) t.freq[j] += k;
            for (const auto& [j, v] : b.atoms) t.atoms[j].insert(t.atoms[j].end(), v.begin(), v.end());
            next.push_back(std::move(t));
          }
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

}  // namespace

Complex TestFunction::integral(int dim) const {
  Complex total{0.0, 0.0};
  for (const auto& t : expand(*this, dim)) {
    Complex v = t.scalar;
    for (int j = 0; j < dim && v != Complex{0.0, 0.0}; ++j) {
      const auto fi = t.freq.find(j);
      const auto ai = t.atoms.find(j);
      const std::int64_t freq = fi == t.freq.end() ? 0 : fi->second;
      static const std::vector<Atom> none;
      v *= integrate_coordinate(freq, ai == t.atoms.end() ? none : ai->second);
    }
    total += v;
  }
  return total;
}

double estimate_lip(const TestFunction& f, const Nilmanifold& g, int grid_size, double h) {
  const int m = g.dim();
  static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  std::vector<double> alpha(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double r = std::sqrt(primes[j % 16] + 16.0 * (j / 16));
    alpha[j] = r - std::floor(r);
  }
  double sup = 0.0, ratio = 0.0;
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int i = 0; i < grid_size; ++i) {
    for (int j = 0; j < m; ++j) {
      const double v = static_cast<double>(i + 1) * alpha[j];
      x[j] = v - std::floor(v);
    }
    const GroupElement gx(x);
    const Complex fx = f.eval_reduced(x.data(), m);
    sup = std::max(sup, std::abs(fx));
    for (int j = 0; j < m; ++j) {
      const GroupElement y = g.mul(g.basis_element(j, h), gx);
      const double d = g.dist(y, gx);
      if (d <= 0.0) continue;
      ratio = std::max(ratio, std::abs(f.eval(g, y) - fx) / d);
    }
  }
  return sup + ratio;
}

double gamma_invariance_defect(const TestFunction& f, const Nilmanifold& g, int samples, std::uint64_t seed) {
  const int m = g.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst = 0.0;
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int i = 0; i < samples; ++i) {
    for (auto& v : x) v = u(rng);
    const GroupElement gx(x);
    const Complex fx = f.eval(g, gx);
    for (int j = 0; j < m; ++j)
      for (double s : {1.0, -1.0}) worst = std::max(worst, std::abs(f.eval(g, g.mul(gx, g.basis_element(j, s))) - fx));
  }
  return worst;
}

}  // namespace nilcorr
