#pragma once

#include <cstdint>
#include <vector>

#include "favard/families.hpp"

namespace favard {

// Estimate of psi{alpha : |map(alpha, x) - map(alpha, y)| <= delta |x - y|}.
struct BadSetEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

// Stratified estimate for one pair: equal-width strata over [0,1] when A is
// one-dimensional, a jittered g x g grid (g = ceil(sqrt(psi_samples))) when
// it is two-dimensional. The standard error is the binomial one with the
// count shifted by one success and one failure, so it never vanishes.
BadSetEstimate bad_set_measure(const ProjectionFamily& fam, const Point& x, const Point& y, double delta,
                               int psi_samples, std::uint64_t seed, std::uint64_t stream = 0);

struct TransversalityPair {
  Point x;
  Point y;
  double delta = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double ratio = 0.0;
};

struct DeltaSummary {
  double delta = 0.0;
  double worst_ratio = 0.0;
  double mean_ratio = 0.0;
  double mean_estimate = 0.0;
  double mean_std_error = 0.0;
};

struct TransversalityReport {
  double s = 0.0;
  int m = 1;
  std::vector<double> deltas;
  // max over pairs and deltas of estimate / (delta^m |x - y|^(m - s)).
  double worst_ratio = 0.0;
  TransversalityPair worst_pair;
  std::vector<DeltaSummary> per_delta;
  int pair_count = 0;
  int psi_samples = 0;
  std::uint64_t seed = 0;
};

// Samples `pairs` distinct pairs uniformly from Omega (pair i uses its own
// random stream) and estimates the bad-set measure for every delta.
TransversalityReport transversality_estimate(const ProjectionFamily& fam, double s, const std::vector<double>& deltas,
                                             int pairs, int psi_samples, std::uint64_t seed);

struct TubeReport {
  std::vector<double> deltas;
  // max over sampled lines of H^{n-1}(vantage within delta of the line) / delta^{n-1}.
  std::vector<double> max_ratio;
  double worst_ratio = 0.0;
  double worst_delta = 0.0;
  Point worst_p;
  Point worst_q;
  // (ratio at the smallest delta / ratio at the largest)^(1 / decades spanned).
  double growth_per_decade = 1.0;
  // growth_per_decade < 3.
  bool holds = true;
  int lines = 0;
  std::uint64_t seed = 0;
};

// H^{n-1} measure of the part of the vantage set within distance delta of the
// line through p and q: exact for circles and segments, one-dimensional
// tanh-sinh quadrature over the line axis for spheres.
double tube_measure(const Vantage& vantage, const Point& p, const Point& q, double delta);

// Samples `lines` lines through two random points of visible_box (coincident
// points are resampled) and reports the tube ratios.
TubeReport tube_condition_check(const Vantage& vantage, const Box& visible_box, const std::vector<double>& deltas,
                                int lines, std::uint64_t seed);

}  // namespace favard
