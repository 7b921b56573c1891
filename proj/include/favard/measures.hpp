#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "favard/geometry.hpp"

namespace favard {

// Probability measure with density w_k / side^dim on cell k. Integrals are
// evaluated at the centers of the quadrature_order^dim congruent sub-cells.
class CellMeasure {
 public:
  CellMeasure(CellSet support, std::vector<double> weights, int quadrature_order = 4);

  const CellSet& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  int quadrature_order() const { return order_; }
  CellMeasure with_quadrature_order(int order) const;

  std::size_t points_per_cell() const;
  std::size_t point_count() const { return support_.size() * points_per_cell(); }
  // Quadrature points (sub-cell centers) and their masses, cell by cell.
  void quadrature(std::vector<Point>& points, std::vector<double>& masses) const;

  // mu(B(center, radius)): exact disk/rectangle overlap in the plane,
  // quadrature-point count in space.
  double mass_in_ball(const Point& center, double radius) const;

 private:
  CellSet support_;
  std::vector<double> weights_;
  int order_;
};

// Uniform mass 1/count on every cell.
CellMeasure equidistributed_measure(const CellSet& cells, int quadrature_order = 4);

// Double integral of |x - y|^-s for x uniform on the unit square (cube) and
// y uniform on its translate by the integer vector `offset`. Finite for
// s < dim, and for any s > 0 when the cells do not touch.
double unit_cell_interaction(const CellIndex& offset, double s, int dim);

// Riesz s-energy of the uniform probability measure on the unit square
// (dim 2) or cube (dim 3). Requires 0 <= s < dim.
double self_energy_constant(double s, int dim);

struct EnergyOptions {
  // Add each sub-cell's exact self-energy.
  bool include_self = true;
  // Replace the point-pair kernel by the exact sub-cell interaction for
  // sub-cells at most near_radius grid steps apart (per axis).
  bool near_field = true;
  int near_radius = 4;
};

// Double integral of |x - y|^-s. Distinct quadrature-point pairs are summed
// directly, with the near-field and self terms from EnergyOptions.
// Bit-identical for any thread count.
double riesz_energy(const CellMeasure& mu, double s, const EnergyOptions& options = {});

// Image of a measure on the line, or on the circle when `circular` (angles in
// [0, 2pi)).
struct PushforwardMeasure1D {
  std::vector<double> positions;
  std::vector<double> weights;
  double bin_width = 0.0;
  bool circular = false;

  double total_mass() const;
  // Mass of atoms in [lo, hi).
  double mass_in(double lo, double hi) const;
  // Histogram over [lo, hi) with bins of width bin_width.
  std::vector<double> density(double lo, double hi) const;
};

using ScalarMap = std::function<std::optional<double>(const Point&)>;

// Pushes the quadrature atoms of mu through `map`. Throws DomainError naming
// the first point where the map is undefined.
PushforwardMeasure1D pushforward(const ScalarMap& map, const CellMeasure& mu, double bin_width,
                                 bool circular = false);

struct FrostmanReport {
  double exponent = 0.0;
  // max over samples of mu(B(x, r)) / r^t.
  double constant = 0.0;
  // constant relative to the whole-support scale value 1 / diam^t.
  double max_violation_ratio = 0.0;
  Point worst_center;
  double worst_radius = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
};

// Samples x uniformly in the support's bounding box and r log-uniformly in
// [side, diam]; deterministic under the seed.
FrostmanReport frostman_check(const CellMeasure& mu, double t, int samples, std::uint64_t seed);

// Normalized sum of uniform measures on a maximal family of disjoint radius-r
// balls, greedily centered at quadrature points of positive mass, each ball
// weighted by its mu-mass. Balls are drawn as cells of side <= r/4 whose
// centers lie in the ball. `s` is the exponent the measure is built for and is
// only range-checked.
CellMeasure auxiliary_measure(const CellMeasure& mu, double r, double s);

}  // namespace favard
