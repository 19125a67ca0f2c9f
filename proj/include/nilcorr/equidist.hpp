#pragma once

// Empirical equidistribution tests for polynomial orbits on G/Γ:
// discrepancy over [N] and over sub-progressions, Leibman-style
// horizontal-character search, and the product sequences m -> (g(qpm+a), g(qp'm+a')).

#include "nilcorr/polyseq.hpp"
#include "nilcorr/testfn.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nilcorr {

// raw: |avg - integral|.  lipschitz: |avg - integral| / ||F||_Lip, with the
// declared bound when present and estimate_lip otherwise.
enum class GapMode { raw, lipschitz };

struct Progression {
  std::int64_t a = 1;  // first term
  std::int64_t q = 1;
  std::int64_t length = 0;
};

struct EquidistReport {
  std::int64_t N = 0;
  double delta = 0.0;
  int worst_index = -1;
  std::string worst_test_fn;
  double worst_gap = 0.0;
  bool pass = true;
  std::optional<Progression> witness;  // total mode only
  std::vector<double> gaps;            // per test function
};

struct EquidistOptions {
  GapMode mode = GapMode::raw;
  int lip_grid = 256;
  int threads = 0;  // 0 = OpenMP default
};

// Averages over n = 1..N.
EquidistReport empirical_discrepancy(const PolySequence& g, std::int64_t N, const std::vector<TestFunction>& family,
                                     double delta, const EquidistOptions& opt = {});

// Progressions a + q[L] inside [1, N] with q <= ceil(1/delta) and
// L >= ceil(delta N).  Every (q, a mod q) is scanned; window endpoints run over
// a block grid of spacing max(ceil(L_min/4), ceil(M/512)) in the index of the
// progression, plus its last term.
EquidistReport total_discrepancy(const PolySequence& g, std::int64_t N, const std::vector<TestFunction>& family,
                                 double delta, const EquidistOptions& opt = {});

struct LeibmanWitness {
  HorizontalCharacter character;
  double norm = 0.0;
  std::int64_t search_bound = 0;
};

struct LeibmanDefaults {
  std::int64_t q_max;
  double norm_bound;
};
// q_max = ceil(delta^-2), norm_bound = delta^-2
LeibmanDefaults leibman_defaults(double delta);

// First character in for_each_character order with
// smoothness_norm(char_compose(eta, g), N) <= norm_bound.  No result means no
// obstruction was found up to q_max.
std::optional<LeibmanWitness> leibman_search(const PolySequence& g, double N, std::int64_t q_max, double norm_bound);

// m -> (g(q p m + a_p), g(q p2 m + a_p2)) on the product manifold.
PolySequence product_sequence(const PolySequence& g, std::int64_t q, std::int64_t p, std::int64_t a_p, std::int64_t p2,
                              std::int64_t a_p2);

std::string to_json(const EquidistReport& r);
std::string to_csv(const EquidistReport& r);  // N,delta,q,a,L,test_fn,gap

}  // namespace nilcorr
