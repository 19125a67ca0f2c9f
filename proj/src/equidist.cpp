#include "nilcorr/equidist.hpp"

#include "nilcorr/errors.hpp"
#include "nilcorr/orbit.hpp"
#include "progscan.hpp"

#include "json.hpp"
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nilcorr {

namespace {

void check_args(const PolySequence& g, std::int64_t N, const std::vector<TestFunction>& family, double delta) {
  if (family.empty()) throw Error(ErrorKind::InvalidArgument, "test family is empty");
  if (N < 1 || N >= kMaxEvalIndex) throw Error(ErrorKind::EvaluationDomain, "N out of range", {N});
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  const int m = g.manifold->dim();
  for (const auto& f : family)
    if (f.max_coord() >= m) throw Error(ErrorKind::DimensionMismatch, "test function uses a missing coordinate");
}

std::vector<Complex> integrals(const std::vector<TestFunction>& family, int dim) {
  std::vector<Complex> out;
  for (const auto& f : family) out.push_back(f.integral(dim));
  return out;
}

std::vector<double> scales(const PolySequence& g, const std::vector<TestFunction>& family, const EquidistOptions& opt) {
  std::vector<double> out(family.size(), 1.0);
  if (opt.mode == GapMode::raw) return out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double lip = family[i].declared_lip > 0 ? family[i].declared_lip : estimate_lip(family[i], *g.manifold, opt.lip_grid);
    out[i] = lip > 0 ? lip : 1.0;
  }
  return out;
}

// Reduced orbit coordinates for n = 1..N, row-major.
std::vector<double> orbit_coords(const PolySequence& g, std::int64_t N) {
  const int m = g.manifold->dim();
  std::vector<double> out(static_cast<std::size_t>(N) * m);
  OrbitWalker w(g, 1);
  for (std::int64_t n = 0; n < N; ++n) {
    std::copy(w.coords(), w.coords() + m, out.begin() + n * m);
    if (n + 1 < N) w.advance();
  }
  return out;
}

void finish(EquidistReport& r, const std::vector<TestFunction>& family) {
  r.worst_gap = 0.0;
  r.worst_index = -1;
  for (std::size_t i = 0; i < r.gaps.size(); ++i)
    if (r.worst_index < 0 || r.gaps[i] > r.worst_gap) {
      r.worst_gap = r.gaps[i];
      r.worst_index = static_cast<int>(i);
    }
  r.worst_test_fn = family[static_cast<std::size_t>(r.worst_index)].describe();
  r.pass = r.worst_gap <= r.delta;
}

}  // namespace

EquidistReport empirical_discrepancy(const PolySequence& g, std::int64_t N, const std::vector<TestFunction>& family,
                                     double delta, const EquidistOptions& opt) {
  check_args(g, N, family, delta);
  const int m = g.manifold->dim();
  const auto I = integrals(family, m);
  const auto sc = scales(g, family, opt);
  std::vector<Complex> sums(family.size());
  OrbitWalker w(g, 1);
  for (std::int64_t n = 1; n <= N; ++n) {
    for (std::size_t i = 0; i < family.size(); ++i) sums[i] += family[i].eval_reduced(w.coords(), m);
    if (n < N) w.advance();
  }
  EquidistReport r;
  r.N = N;
  r.delta = delta;
  for (std::size_t i = 0; i < family.size(); ++i)
    r.gaps.push_back(std::abs(sums[i] / static_cast<double>(N) - I[i]) / sc[i]);
  finish(r, family);
  return r;
}

EquidistReport total_discrepancy(const PolySequence& g, std::int64_t N, const std::vector<TestFunction>& family,
                                 double delta, const EquidistOptions& opt) {
  check_args(g, N, family, delta);
  const int m = g.manifold->dim();
  const auto I = integrals(family, m);
  const auto sc = scales(g, family, opt);
  const auto coords = orbit_coords(g, N);
  const auto q_max = static_cast<std::int64_t>(std::ceil(1.0 / delta - 1e-12));
  const auto lmin = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(delta * static_cast<double>(N) - 1e-9)));
  const int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();

  EquidistReport r;
  r.N = N;
  r.delta = delta;
  detail::WindowBest overall;
  int overall_index = -1;
  std::vector<Complex> values(static_cast<std::size_t>(N));
  for (std::size_t f = 0; f < family.size(); ++f) {
    const auto& F = family[f];
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::int64_t n = 0; n < N; ++n) values[n] = F.eval_reduced(coords.data() + n * m, m) - I[f];
    const auto best = detail::scan_progressions(values, q_max, lmin, threads);
    const double gap = best.value / sc[f];
    r.gaps.push_back(gap);
    if (gap > overall.value) {
      overall = best;
      overall.value = gap;
      overall_index = static_cast<int>(f);
    }
  }
  finish(r, family);
  if (overall_index >= 0) r.witness = Progression{overall.a, overall.q, overall.length};
  return r;
}

LeibmanDefaults leibman_defaults(double delta) {
  const double inv2 = 1.0 / (delta * delta);
  return {static_cast<std::int64_t>(std::ceil(inv2 - 1e-9)), inv2};
}

std::optional<LeibmanWitness> leibman_search(const PolySequence& g, double N, std::int64_t q_max, double norm_bound) {
  if (q_max < 1) throw Error(ErrorKind::InvalidArgument, "q_max must be >= 1");
  if (!(norm_bound >= 0.0)) throw Error(ErrorKind::InvalidArgument, "norm_bound must be nonnegative");
  std::optional<LeibmanWitness> out;
  for_each_character(*g.manifold, q_max, [&](const HorizontalCharacter& eta) {
    const double norm = smoothness_norm(char_compose(eta, g), N);
    if (norm <= norm_bound) {
      out = LeibmanWitness{eta, norm, q_max};
      return false;
    }
    return true;
  });
  return out;
}

PolySequence product_sequence(const PolySequence& g, std::int64_t q, std::int64_t p, std::int64_t a_p, std::int64_t p2,
                              std::int64_t a_p2) {
  if (q < 1 || p < 1 || p2 < 1) throw Error(ErrorKind::InvalidArgument, "q, p, p2 must be >= 1");
  const PolySequence left = compose_affine(g, q * p, a_p);
  const PolySequence right = compose_affine(g, q * p2, a_p2);
  const ProductManifold pm = product_manifold(*g.manifold, *g.manifold);
  const int m = g.manifold->dim();
  const int d = std::max(left.degree(), right.degree());
  const auto unit = [m](bool exact) {
    return exact ? GroupElement(std::vector<Rational>(static_cast<std::size_t>(m))) : GroupElement::identity(m);
  };
  std::vector<GroupElement> coeffs;
  for (int i = 0; i <= d; ++i) {
    const GroupElement a = i <= left.degree() ? left.coeffs[i] : unit(left.is_exact());
    const GroupElement b = i <= right.degree() ? right.coeffs[i] : unit(right.is_exact());
    coeffs.push_back(pm.pair(a, b));
  }
  return make_poly_sequence(pm.manifold, std::move(coeffs), false);
}

std::string to_json(const EquidistReport& r) {
  nlohmann::json j;
  j["N"] = r.N;
  j["delta"] = r.delta;
  j["worst_test_fn"] = r.worst_test_fn;
  j["worst_gap"] = r.worst_gap;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["gaps"] = r.gaps;
  if (r.witness) j["witness_progression"] = {{"a", r.witness->a}, {"q", r.witness->q}, {"length", r.witness->length}};
  else j["witness_progression"] = nullptr;
  return j.dump(2);
}

std::string to_csv(const EquidistReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "N,delta,q,a,L,test_fn,gap\n";
  const Progression p = r.witness.value_or(Progression{1, 1, r.N});
  os << r.N << ',' << r.delta << ',' << p.q << ',' << p.a << ',' << p.length << ",\"" << r.worst_test_fn << "\","
     << r.worst_gap << '\n';
  return os.str();
}

}  // namespace nilcorr
