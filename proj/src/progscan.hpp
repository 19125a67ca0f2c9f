#pragma once

// Worst average over arithmetic progressions a + q[L] inside [1, N].

#include <algorithm>
#include <complex>
#include <cstdint>
#include <vector>

namespace nilcorr::detail {

struct WindowBest {
  double value = -1.0;  // |mean| over the window, -1 if none qualified
  std::int64_t a = 1, q = 1, length = 0;
};

using LComplex = std::complex<long double>;

// Windows of one residue class with prefix sums P (size M+1).  Endpoints run
// over a grid of spacing max(ceil(lmin/4), ceil(M/512)) plus the last term.
inline void scan_windows(const std::vector<LComplex>& P, std::int64_t a, std::int64_t q, std::int64_t lmin,
                         WindowBest& best) {
  const auto M = static_cast<std::int64_t>(P.size()) - 1;
  if (M < lmin) return;
  const std::int64_t B = std::max<std::int64_t>({1, (lmin + 3) / 4, (M + 511) / 512});
  std::vector<std::int64_t> cuts;
  for (std::int64_t c = 0; c < M; c += B) cuts.push_back(c);
  cuts.push_back(M);
  for (std::size_t s = 0; s < cuts.size(); ++s)
    for (std::size_t e = s + 1; e < cuts.size(); ++e) {
      const std::int64_t L = cuts[e] - cuts[s];
      if (L < lmin) continue;
      const double v = static_cast<double>(std::abs(P[cuts[e]] - P[cuts[s]]) / static_cast<long double>(L));
      if (v > best.value) best = {v, a + q * cuts[s], q, L};
    }
}

// values[n-1] is the centered value at n.  Scans q = 1..q_max in order and
// merges per-q results sequentially, so the answer is independent of threads.
template <class T>
WindowBest scan_progressions(const std::vector<T>& values, std::int64_t q_max, std::int64_t lmin, int threads) {
  const auto N = static_cast<std::int64_t>(values.size());
  std::vector<WindowBest> per_q(static_cast<std::size_t>(std::max<std::int64_t>(q_max, 0)));
#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (std::int64_t q = 1; q <= q_max; ++q) {
    WindowBest best;
    std::vector<LComplex> P;
    for (std::int64_t a = 1; a <= std::min(q, N); ++a) {
      P.assign(1, LComplex(0));
      for (std::int64_t n = a; n <= N; n += q) {
        const std::complex<double> v(values[n - 1]);
        P.push_back(P.back() + LComplex(v.real(), v.imag()));
      }
      scan_windows(P, a, q, lmin, best);
    }
    per_q[q - 1] = best;
  }
  WindowBest out;
  for (const auto& b : per_q)
    if (b.value > out.value) out = b;
  return out;
}

}  // namespace nilcorr::detail
