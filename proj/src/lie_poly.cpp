#include "lie_poly.hpp"

#include <algorithm>

namespace nilcorr::detail {

Poly Poly::constant(int nvars, const Rational& c) {
  Poly p(nvars);
  if (c != 0) p.terms_.emplace(Monomial(static_cast<std::size_t>(nvars), 0), c);
  return p;
}

Poly Poly::variable(int nvars, int v) {
  Poly p(nvars);
  Monomial m(static_cast<std::size_t>(nvars), 0);
  m[static_cast<std::size_t>(v)] = 1;
  p.terms_.emplace(std::move(m), Rational(1));
  return p;
}

int Poly::total_degree() const {
  int best = 0;
  for (const auto& [m, c] : terms_) {
    int d = 0;
    for (auto e : m) d += e;
    best = std::max(best, d);
  }
  return best;
}

void Poly::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
    return;
  }
  it->second += c;
  if (it->second == 0) terms_.erase(it);
}

Poly& Poly::operator+=(const Poly& o) {
  if (nvars_ == 0) nvars_ = o.nvars_;
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (nvars_ == 0) nvars_ = o.nvars_;
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Poly Poly::operator*(const Poly& o) const {
  Poly out(std::max(nvars_, o.nvars_));
  Monomial m(static_cast<std::size_t>(out.nvars_), 0);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : o.terms_) {
      for (std::size_t v = 0; v < m.size(); ++v) m[v] = static_cast<std::uint8_t>(ma[v] + mb[v]);
      out.add_term(m, ca * cb);
    }
  }
  return out;
}

Poly Poly::scaled(const Rational& q) const {
  Poly out(nvars_);
  if (q == 0) return out;
  for (const auto& [m, c] : terms_) out.terms_.emplace(m, c * q);
  return out;
}

CompiledPoly::CompiledPoly(const Poly& p) {
  for (const auto& [m, c] : p.terms()) {
    Term t{to_double(c), c, static_cast<std::uint32_t>(factors_.size()), 0};
    for (std::size_t v = 0; v < m.size(); ++v) {
      if (m[v] == 0) continue;
      factors_.emplace_back(static_cast<std::uint16_t>(v), m[v]);
      max_exp_ = std::max<int>(max_exp_, m[v]);
    }
    t.end = static_cast<std::uint32_t>(factors_.size());
    terms_.push_back(std::move(t));
  }
}

double CompiledPoly::eval(const std::vector<std::vector<double>>& powers) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double v = t.coef_d;
    for (auto f = t.begin; f < t.end; ++f) v *= powers[factors_[f].first][factors_[f].second];
    s += v;
  }
  return s;
}

Rational CompiledPoly::eval(const std::vector<Rational>& vars) const {
  Rational s = 0;
  for (const auto& t : terms_) {
    Rational v = t.coef;
    for (auto f = t.begin; f < t.end; ++f) {
      const Rational& x = vars[factors_[f].first];
      if (x == 0) {
        v = 0;
        break;
      }
      for (int e = 0; e < factors_[f].second; ++e) v *= x;
    }
    s += v;
  }
  return s;
}

}  // namespace nilcorr::detail
