#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "favard/geometry.hpp"

namespace favard {

enum class Codomain { Line, Circle, Sphere };

// Parameter value; only the first param_dim() entries are meaningful.
using Param = std::array<double, 2>;

// Image of a point: a real number (Line), an angle in [0, 2pi) (Circle), or a
// unit vector (Sphere).
struct Image {
  std::array<double, 3> v{0.0, 0.0, 0.0};
};

// Uniform interface for a family of maps x -> map(alpha, x) from a domain
// Omega into a one- or two-dimensional codomain, with a parameter probability
// measure psi on the parameter set A.
class ProjectionFamily {
 public:
  virtual ~ProjectionFamily() = default;

  virtual std::string name() const = 0;
  virtual int domain_dim() const = 0;
  virtual int param_dim() const = 0;
  virtual Codomain codomain() const = 0;
  int codomain_dim() const { return codomain() == Codomain::Sphere ? 2 : 1; }

  // Bounding box of Omega and exact membership.
  virtual Box domain() const = 0;
  virtual bool in_domain(const Point& x) const { return domain().contains(x, 1e-12); }

  // Maps u in [0,1]^param_dim to A so that uniform u gives psi.
  virtual Param param_at(std::span<const double> u) const = 0;
  // Lebesgue (arc-length, area) measure of A.
  virtual double param_measure() const = 0;
  virtual bool param_admissible(const Param& alpha) const = 0;

  // Larger parameter range over which the Lebesgue integral of the image
  // length equals the measure of E + Gamma (curve and surface families).
  virtual Param extended_param_at(std::span<const double> u) const { return param_at(u); }
  virtual double extended_param_measure() const { return param_measure(); }

  virtual std::optional<Image> try_map(const Param& alpha, const Point& x) const = 0;
  // Throws DomainError when the map is undefined at (alpha, x).
  Image map(const Param& alpha, const Point& x) const;
  // Scalar coordinate for one-dimensional codomains (value or angle).
  double map_scalar(const Param& alpha, const Point& x) const;

  // Distance in the codomain: |a - b| on the line, chord length otherwise.
  double image_distance(const Image& a, const Image& b) const;

  // Sub-box of `region` on which map(alpha, .) is defined, if any.
  virtual std::optional<Box> clip(const Param& alpha, const Box& region) const;
  // Per-axis bounds on |d map / d x_k| over `region` (scalar codomains).
  virtual std::array<double, 3> axis_lipschitz(const Param& alpha, const Box& region) const = 0;
  // Exact image of a box when it has a closed form (angles may be unwrapped
  // past 2pi); nullopt otherwise or when the map is undefined on the box.
  virtual std::optional<Interval> exact_image(const Param& alpha, const Box& region) const;
};

using FamilyPtr = std::shared_ptr<const ProjectionFamily>;

// A graph curve t -> (t, gamma(t)) on I = [lo, hi] with strictly monotone,
// Lambda-bi-Lipschitz derivative and sup |gamma'| <= 1.
struct CurveSpec {
  std::function<double(double)> gamma;
  std::function<double(double)> dgamma;
  double lo = -1.0;
  double hi = 1.0;
  double lambda = 1.0;
  // +1 when gamma' increases (concave up), -1 when it decreases.
  int sign = -1;
  std::string label = "curve";

  double half_width() const { return 0.5 * (hi - lo); }
  // min and max of gamma over [t0, t1] clipped to I; nullopt when disjoint.
  std::optional<std::pair<double, double>> range_on(double t0, double t1) const;
  // Solves gamma'(t) = slope by bisection; nullopt when out of range.
  std::optional<double> solve_derivative(double slope) const;
};

// Checks sup |gamma'| <= 1, the sampled bi-Lipschitz bounds, monotonicity and
// consistency of gamma' with gamma; throws InvalidInput naming the first
// violating sample.
void validate_curve(const CurveSpec& spec, int samples = 2001);

// gamma(t) = -c t^2 / 2 on [-1, 1], 0 < c <= 1.
CurveSpec parabola_curve(double curvature = 1.0);
// Upper arc of the circle of the given radius over |t| <= radius / sqrt(2),
// shifted so gamma(0) = 0.
CurveSpec circular_arc_curve(double radius = 1.0);

// Even profile f on [-L, L] generating the surface gamma(s) = f(|s|) / zscale.
struct SurfaceSpec {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  double radius = 1.0;
  std::string label = "surface";
};

void validate_surface(const SurfaceSpec& spec, int samples = 201);
// f(x) = c x^2 / 2.
SurfaceSpec paraboloid_surface(double curvature = 1.0, double radius = 1.0);

// Vantage sets for radial projections.
struct Vantage {
  enum class Kind { Circle, Segment, Sphere };
  Kind kind = Kind::Circle;
  Point center;
  double radius = 0.0;
  Point a;
  Point b;

  static Vantage circle(const Point& center, double radius);
  static Vantage segment(const Point& a, const Point& b);
  static Vantage sphere(const Point& center, double radius);

  int ambient_dim() const { return kind == Kind::Sphere ? 3 : 2; }
  int param_dim() const { return kind == Kind::Sphere ? 2 : 1; }
  // Arc length or area.
  double measure() const;
  // Uniform u in [0,1]^param_dim maps to the normalized measure.
  Point at(std::span<const double> u) const;
  // Smallest distance from the vantage set to the box (0 when they meet).
  double distance_to(const Box& box) const;
};

// x -> x_1 cos(theta) + x_2 sin(theta), theta uniform on [0, pi).
FamilyPtr orthogonal_family(const Box& domain = Box::square(0, 0, 1, 1));
// x -> direction of x - a for a on the vantage set; visible_box is Omega.
FamilyPtr radial_family(const Vantage& vantage, const Box& visible_box);
// a -> a_2 + gamma(lambda - a_1), lambda uniform on [lo + h, hi], Omega = [0, h]^2.
FamilyPtr curve_family(const CurveSpec& spec);
// Same map with gamma(t) = slope * t; not transversal, not validated.
FamilyPtr straight_line_family(double slope, double lo = -1.0, double hi = 1.0);
// a -> a_3 + gamma(alpha - (a_1, a_2)), alpha uniform on the disk of radius
// L/3, Omega the ball of radius L/3.
FamilyPtr surface_family(const SurfaceSpec& spec);

// The rescaled surface height used by surface_family.
std::function<double(double, double)> surface_height(const SurfaceSpec& spec);

// Point where a + Gamma and b + Gamma cross, if they do.
std::optional<Point> curve_intersection(const CurveSpec& spec, const Point& a, const Point& b);

// Parametrized C^1 piece t -> position(t), t in [t0, t1].
struct CurvePiece {
  std::function<Point(double)> position;
  std::function<Point(double)> velocity;
  double t0 = 0.0;
  double t1 = 1.0;
};

// A simple graph piece together with the rotation (in quarter turns,
// counter-clockwise) that was applied to the original curve; apply the same
// rotation to the set E.
struct DecomposedPiece {
  CurveSpec spec;
  int quarter_turns = 0;
};

// Splits pieces where the tangent slope is +-1 and rotates each part so it is
// a graph with |gamma'| <= 1. Rejects pieces whose curvature vanishes.
std::vector<DecomposedPiece> decompose_curve(const std::vector<CurvePiece>& pieces, int samples = 4096);

}  // namespace favard
