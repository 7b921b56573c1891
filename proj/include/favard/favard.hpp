#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "favard/families.hpp"
#include "favard/geometry.hpp"
#include "favard/measures.hpp"

namespace favard {

struct LengthEstimate {
  double value = 0.0;
  // "parameter-integral", "minkowski", "buffon" or "visibility-integral".
  std::string method;
  // What `value` integrates against: "psi-average", "lebesgue", "lebesgue-extended",
  // "area", "volume" or "arc-length".
  std::string normalization;
  // Pitch, boundary spacing or angular resolution.
  double resolution = 0.0;
  // Quadrature nodes or Monte Carlo drops.
  long long samples = 0;
  double error_bar = 0.0;
  std::uint64_t seed = 0;
};

enum class ImageMode {
  // Closed-form box images where the family has them, sampling otherwise.
  Auto,
  // Always use boundary sampling with Lipschitz inflation.
  Sampled,
};

// Measure of the image of `cells` under map(alpha, .): the union of per-cell
// image intervals (arcs on the circle). Sampled cell images come from the
// cell boundary at spacing <= resolution, widened by the family's local
// Lipschitz bound, so they contain the true image. With `extended`, alpha may
// lie in the family's extended parameter range.
double image_measure(const ProjectionFamily& fam, const Param& alpha, const CellSet& cells, double resolution,
                     ImageMode mode = ImageMode::Auto, bool extended = false);

struct ParameterIntegral {
  // Integral of the image measure against psi.
  LengthEstimate psi_average;
  // Integral against Lebesgue measure on A.
  LengthEstimate lebesgue;
  // Integral against Lebesgue measure on the extended range; equals the
  // measure of E + Gamma for curve families.
  std::optional<LengthEstimate> lebesgue_extended;
};

// Trapezoid rule with quad_points nodes per parameter axis (tensor grid on
// [0,1]^2 for two-dimensional A).
ParameterIntegral favard_parameter_integral(const ProjectionFamily& fam, const CellSet& cells, int quad_points,
                                            double resolution, ImageMode mode = ImageMode::Auto);

// Rasterized area of E + Gamma for the graph curve of `curve` (no curvature
// condition needed). Requires pitch <= side / 2.
LengthEstimate favard_minkowski(const CurveSpec& curve, const CellSet& cells, double pitch);
// Voxelized volume of E + Gamma for the rescaled surface of `surface`.
// Requires 2^-7 <= pitch <= side / 2.
LengthEstimate favard_minkowski(const SurfaceSpec& surface, const CellSet& cells, double pitch);

// Bounding box of E plus the bounding box of Gamma, padded by one cell side.
Box buffon_default_box(const CurveSpec& curve, const CellSet& cells);

// Fraction of uniform drops (alpha, beta) in the box for which
// (alpha, beta) - Gamma meets E, times the box area. Each drop is tested
// exactly. Drop i uses random stream i.
LengthEstimate buffon_mc(const CurveSpec& curve, const CellSet& cells, long long drops,
                         const std::optional<Box>& sample_box, std::uint64_t seed);

// Angular measure of the radial image of E seen from a. Cell images are the
// exact angular ranges of the cells. Throws DomainError when a touches E.
double visibility(const Point& a, const CellSet& cells, double resolution);

// Integral of visibility over a planar vantage set against arc length:
// rectangle rule on the circle, trapezoid rule on a segment.
LengthEstimate visibility_integral(const Vantage& vantage, const CellSet& cells, int quad_points, double resolution);

struct EnergyBoundReport {
  double energy = 0.0;
  double favard = 0.0;
  double product = 0.0;
  // Positive mass but a vanishing Favard value.
  bool inconsistent = false;
};

// I_s(nu) times a psi-averaged parameter integral of the same family.
// The support of nu must lie in Omega.
EnergyBoundReport energy_lower_bound_check(const ProjectionFamily& fam, const CellMeasure& nu, double s,
                                           const LengthEstimate& fav, const EnergyOptions& options = {});

struct DimensionEstimate {
  Param alpha{};
  double slope = 0.0;
  double r2 = 0.0;
  std::vector<double> scales;
  std::vector<double> counts;
};

struct MarstrandReport {
  std::vector<DimensionEstimate> per_alpha;
  double median = 0.0;
  std::uint64_t seed = 0;
};

// Box-counting dimension of the image of the order-8 quadrature points of
// the cells, at scales side * 2^k for k = 0..scales-1, for `alphas`
// psi-random parameters. Requires scales >= 4.
MarstrandReport marstrand_dimension_experiment(const ProjectionFamily& fam, const CellSet& cells, int alphas,
                                               std::uint64_t seed, int scales = 5);

// Exact image of the planar cells under x -> x_2 - slope * x_1 (the shadow
// along lines of the given slope).
IntervalUnion line_projection_image(const CellSet& cells, double slope);

}  // namespace favard
