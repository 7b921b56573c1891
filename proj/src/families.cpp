#include "favard/families.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "favard/errors.hpp"

namespace favard {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string describe(const Point& p) {
  std::string s = "(" + fmt(p.x[0]) + ", " + fmt(p.x[1]);
  if (p.dim == 3) s += ", " + fmt(p.x[2]);
  return s + ")";
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

double clamp01(double u) { return std::clamp(u, 0.0, 1.0); }

// Bisection for a sign change of f on [a, b].
template <class F>
double bisect(F f, double a, double b, double tol = 1e-14) {
  double fa = f(a);
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Image ProjectionFamily::map(const Param& alpha, const Point& x) const {
  auto img = try_map(alpha, x);
  if (!img)
    throw DomainError(name() + " map undefined at parameter (" + fmt(alpha[0]) +
                      (param_dim() == 2 ? ", " + fmt(alpha[1]) : std::string()) + ") and point " + describe(x));
  return *img;
}

double ProjectionFamily::map_scalar(const Param& alpha, const Point& x) const {
  if (codomain() == Codomain::Sphere) throw InvalidInput("map_scalar needs a one-dimensional codomain");
  return map(alpha, x).v[0];
}

double ProjectionFamily::image_distance(const Image& a, const Image& b) const {
  switch (codomain()) {
    case Codomain::Line:
      return std::abs(a.v[0] - b.v[0]);
    case Codomain::Circle:
      return 2.0 * std::abs(std::sin(0.5 * (a.v[0] - b.v[0])));
    case Codomain::Sphere: {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += (a.v[k] - b.v[k]) * (a.v[k] - b.v[k]);
      return std::sqrt(acc);
    }
  }
  return 0.0;
}

std::optional<Box> ProjectionFamily::clip(const Param&, const Box& region) const { return region; }

std::optional<Interval> ProjectionFamily::exact_image(const Param&, const Box&) const { return std::nullopt; }

// ---------------------------------------------------------------- curves

std::optional<std::pair<double, double>> CurveSpec::range_on(double t0, double t1) const {
  t0 = std::max(t0, lo);
  t1 = std::min(t1, hi);
  if (t0 > t1) return std::nullopt;
  double g0 = gamma(t0), g1 = gamma(t1);
  double mn = std::min(g0, g1), mx = std::max(g0, g1);
  const double d0 = dgamma(t0), d1 = dgamma(t1);
  if ((d0 < 0 && d1 > 0) || (d0 > 0 && d1 < 0)) {
    const double tc = bisect([this](double t) { return dgamma(t); }, t0, t1);
    const double gc = gamma(tc);
    mn = std::min(mn, gc);
    mx = std::max(mx, gc);
  }
  return std::pair{mn, mx};
}

std::optional<double> CurveSpec::solve_derivative(double slope) const {
  const double d_lo = dgamma(lo), d_hi = dgamma(hi);
  if (slope < std::min(d_lo, d_hi) || slope > std::max(d_lo, d_hi)) return std::nullopt;
  return bisect([&](double t) { return dgamma(t) - slope; }, lo, hi);
}

void validate_curve(const CurveSpec& spec, int samples) {
  if (!spec.gamma || !spec.dgamma) throw InvalidInput("curve needs gamma and its derivative");
  if (!std::isfinite(spec.lo) || !std::isfinite(spec.hi) || !(spec.lo < spec.hi))
    throw InvalidInput("curve interval must be finite and non-empty");
  if (!(spec.lambda >= 1.0) || !std::isfinite(spec.lambda))
    throw InvalidInput("bi-Lipschitz constant must be finite and >= 1");
  if (spec.sign != 1 && spec.sign != -1) throw InvalidInput("curve sign must be +1 or -1");
  if (samples < 3) throw InvalidInput("curve validation needs at least 3 samples");
  const double tol = 1e-9;
  const double step = (spec.hi - spec.lo) / (samples - 1);
  double prev_t = spec.lo, prev_d = spec.dgamma(spec.lo), prev_g = spec.gamma(spec.lo);
  for (int k = 0; k < samples; ++k) {
    const double t = k == samples - 1 ? spec.hi : spec.lo + k * step;
    const double d = spec.dgamma(t), g = spec.gamma(t);
    if (!std::isfinite(d) || !std::isfinite(g)) throw InvalidInput("curve is not finite at t = " + fmt(t));
    if (std::abs(d) > 1.0 + tol) throw InvalidInput("sup |gamma'| <= 1 violated at t = " + fmt(t) + ", gamma' = " + fmt(d));
    if (k > 0) {
      const double dt = t - prev_t;
      const double ratio = (d - prev_d) / dt;
      if (spec.sign * ratio <= 0.0)
        throw InvalidInput("gamma' is not strictly monotone in the declared direction near t = " + fmt(t));
      const double mag = std::abs(ratio);
      if (mag < 1.0 / spec.lambda - tol || mag > spec.lambda + tol)
        throw InvalidInput("bi-Lipschitz bound violated on [" + fmt(prev_t) + ", " + fmt(t) + "]: ratio " + fmt(mag) +
                           " outside [1/" + fmt(spec.lambda) + ", " + fmt(spec.lambda) + "]");
      const double secant = (g - prev_g) / dt;
      if (std::abs(secant - spec.dgamma(0.5 * (t + prev_t))) > spec.lambda * dt + 1e-7)
        throw InvalidInput("gamma' is inconsistent with gamma near t = " + fmt(t));
    }
    prev_t = t;
    prev_d = d;
    prev_g = g;
  }
}

CurveSpec parabola_curve(double curvature) {
  if (!(curvature > 0.0) || curvature > 1.0) throw InvalidInput("parabola curvature must lie in (0, 1]");
  CurveSpec c;
  c.gamma = [curvature](double t) { return -0.5 * curvature * t * t; };
  c.dgamma = [curvature](double t) { return -curvature * t; };
  c.lo = -1.0;
  c.hi = 1.0;
  c.lambda = std::max(curvature, 1.0 / curvature);
  c.sign = -1;
  c.label = "parabola";
  return c;
}

CurveSpec circular_arc_curve(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("arc radius must be positive");
  CurveSpec c;
  c.gamma = [radius](double t) { return std::sqrt(std::max(0.0, radius * radius - t * t)) - radius; };
  c.dgamma = [radius](double t) { return -t / std::sqrt(std::max(1e-300, radius * radius - t * t)); };
  c.hi = radius / std::sqrt(2.0);
  c.lo = -c.hi;
  c.lambda = std::max(2.0 * std::sqrt(2.0) / radius, radius) * (1.0 + 1e-9);
  c.sign = -1;
  c.label = "arc";
  return c;
}

// -------------------------------------------------------------- surfaces

namespace {

double surface_zscale(const SurfaceSpec& spec) {
  double mx = 0.0;
  for (int k = 0; k <= 1000; ++k) mx = std::max(mx, std::abs(spec.df(spec.radius * k / 1000.0)));
  return std::max(1.0, mx);
}

}  // namespace

void validate_surface(const SurfaceSpec& spec, int samples) {
  if (!spec.f || !spec.df || !spec.d2f) throw InvalidInput("surface needs f, f' and f''");
  if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) throw InvalidInput("surface radius must be positive");
  if (samples < 3) throw InvalidInput("surface validation needs at least 3 samples");
  const double L = spec.radius;
  for (int k = 0; k < samples; ++k) {
    const double x = L * k / (samples - 1);
    if (std::abs(spec.f(x) - spec.f(-x)) > 1e-12 * (1.0 + std::abs(spec.f(x))))
      throw InvalidInput("surface profile is not even at x = " + fmt(x));
    if (!(spec.d2f(x) > 0.0)) throw InvalidInput("f'' <= 0 detected at x = " + fmt(x));
  }
  // d^2 gamma / dx^2 = f''(r) x^2 / r^2 + f'(r) y^2 / r^3 on the disk of radius L.
  double worst = INFINITY;
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < samples; ++j) {
      const double x = -L + 2.0 * L * i / (samples - 1), y = -L + 2.0 * L * j / (samples - 1);
      const double r = std::hypot(x, y);
      if (r > L) continue;
      const double v = r == 0.0 ? spec.d2f(0.0) : spec.d2f(r) * x * x / (r * r) + spec.df(r) * y * y / (r * r * r);
      worst = std::min(worst, v);
    }
  if (!(worst > 0.0)) throw InvalidInput("second x-derivative of the surface is not positive on the disk");
}

SurfaceSpec paraboloid_surface(double curvature, double radius) {
  if (!(curvature > 0.0) || !std::isfinite(curvature)) throw InvalidInput("paraboloid curvature must be positive");
  SurfaceSpec s;
  s.f = [curvature](double x) { return 0.5 * curvature * x * x; };
  s.df = [curvature](double x) { return curvature * x; };
  s.d2f = [curvature](double) { return curvature; };
  s.radius = radius;
  s.label = "paraboloid";
  return s;
}

std::function<double(double, double)> surface_height(const SurfaceSpec& spec) {
  validate_surface(spec);
  const double zscale = surface_zscale(spec);
  auto f = spec.f;
  return [f, zscale](double x, double y) { return f(std::hypot(x, y)) / zscale; };
}

// -------------------------------------------------------------- vantage

Vantage Vantage::circle(const Point& center, double radius) {
  if (center.dim != 2) throw InvalidInput("circle vantage lives in the plane");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("vantage radius must be positive");
  Vantage v;
  v.kind = Kind::Circle;
  v.center = center;
  v.radius = radius;
  return v;
}

Vantage Vantage::segment(const Point& a, const Point& b) {
  if (a.dim != 2 || b.dim != 2) throw InvalidInput("segment vantage lives in the plane");
  if (distance(a, b) == 0.0) throw InvalidInput("segment vantage needs distinct endpoints");
  Vantage v;
  v.kind = Kind::Segment;
  v.a = a;
  v.b = b;
  return v;
}

Vantage Vantage::sphere(const Point& center, double radius) {
  if (center.dim != 3) throw InvalidInput("sphere vantage lives in space");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("vantage radius must be positive");
  Vantage v;
  v.kind = Kind::Sphere;
  v.center = center;
  v.radius = radius;
  return v;
}

double Vantage::measure() const {
  switch (kind) {
    case Kind::Circle:
      return kTwoPi * radius;
    case Kind::Segment:
      return distance(a, b);
    case Kind::Sphere:
      return 4.0 * kPi * radius * radius;
  }
  return 0.0;
}

Point Vantage::at(std::span<const double> u) const {
  switch (kind) {
    case Kind::Circle: {
      const double phi = kTwoPi * clamp01(u[0]);
      return Point::xy(center[0] + radius * std::cos(phi), center[1] + radius * std::sin(phi));
    }
    case Kind::Segment: {
      const double t = clamp01(u[0]);
      return Point::xy(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]));
    }
    case Kind::Sphere: {
      const double z = 1.0 - 2.0 * clamp01(u[0]);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = kTwoPi * clamp01(u[1]);
      return Point::xyz(center[0] + radius * rho * std::cos(phi), center[1] + radius * rho * std::sin(phi),
                        center[2] + radius * z);
    }
  }
  return {};
}

double Vantage::distance_to(const Box& box) const {
  if (box.dim != ambient_dim()) throw InvalidInput("vantage and box dimensions differ");
  if (kind == Kind::Segment) {
    // Liang-Barsky clip: the segment meets the box iff the clipped range is non-empty.
    double c0 = 0.0, c1 = 1.0;
    for (int k = 0; k < 2 && c0 <= c1; ++k) {
      const double d = b[k] - a[k];
      if (d == 0.0) {
        if (a[k] < box.lo[k] || a[k] > box.hi[k]) c0 = 2.0;
        continue;
      }
      double e0 = (box.lo[k] - a[k]) / d, e1 = (box.hi[k] - a[k]) / d;
      if (e0 > e1) std::swap(e0, e1);
      c0 = std::max(c0, e0);
      c1 = std::min(c1, e1);
    }
    if (c0 <= c1) return 0.0;
    auto f = [&](double t) { return box.distance_to(Point::xy(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))); };
    // Distance to a convex set is convex along the segment: golden-section search.
    double lo = 0.0, hi = 1.0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
      const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
      if (f(m1) <= f(m2))
        hi = m2;
      else
        lo = m1;
    }
    return std::min({f(0.0), f(1.0), f(0.5 * (lo + hi))});
  }
  const double near = box.distance_to(center);
  double far = 0.0;
  for (int c = 0; c < (1 << box.dim); ++c) {
    double acc = 0.0;
    for (int k = 0; k < box.dim; ++k) {
      const double corner = (c & (1 << k)) ? box.hi[k] : box.lo[k];
      acc += (corner - center.x[k]) * (corner - center.x[k]);
    }
    far = std::max(far, std::sqrt(acc));
  }
  if (radius < near) return near - radius;
  if (radius > far) return radius - far;
  return 0.0;
}

// -------------------------------------------------------------- families

namespace {

class OrthogonalFamily final : public ProjectionFamily {
 public:
  explicit OrthogonalFamily(const Box& domain) : domain_(domain) {
    if (domain.dim != 2) throw InvalidInput("orthogonal family acts on the plane");
  }
  std::string name() const override { return "orthogonal"; }
  int domain_dim() const override { return 2; }
  int param_dim() const override { return 1; }
  Codomain codomain() const override { return Codomain::Line; }
  Box domain() const override { return domain_; }
  Param param_at(std::span<const double> u) const override { return {kPi * clamp01(u[0]), 0.0}; }
  double param_measure() const override { return kPi; }
  bool param_admissible(const Param& a) const override { return a[0] >= 0.0 && a[0] <= kPi; }
  std::optional<Image> try_map(const Param& a, const Point& x) const override {
    return Image{{x[0] * std::cos(a[0]) + x[1] * std::sin(a[0]), 0.0, 0.0}};
  }
  std::array<double, 3> axis_lipschitz(const Param& a, const Box&) const override {
    return {std::abs(std::cos(a[0])), std::abs(std::sin(a[0])), 0.0};
  }
  std::optional<Interval> exact_image(const Param& a, const Box& r) const override {
    const double c = std::cos(a[0]), s = std::sin(a[0]);
    const double lo = std::min(r.lo[0] * c, r.hi[0] * c) + std::min(r.lo[1] * s, r.hi[1] * s);
    const double hi = std::max(r.lo[0] * c, r.hi[0] * c) + std::max(r.lo[1] * s, r.hi[1] * s);
    return Interval{lo, hi};
  }

 private:
  Box domain_;
};

class RadialFamily final : public ProjectionFamily {
 public:
  RadialFamily(const Vantage& v, const Box& box) : vantage_(v), box_(box) {
    if (v.ambient_dim() != box.dim) throw InvalidInput("vantage and visible box dimensions differ");
    if (!(v.distance_to(box) > 0.0)) throw InvalidInput("vantage set meets the visible box");
  }
  std::string name() const override { return "radial"; }
  int domain_dim() const override { return box_.dim; }
  int param_dim() const override { return vantage_.param_dim(); }
  Codomain codomain() const override { return box_.dim == 3 ? Codomain::Sphere : Codomain::Circle; }
  Box domain() const override { return box_; }
  Param param_at(std::span<const double> u) const override {
    if (param_dim() == 2) return {clamp01(u[0]), clamp01(u[1])};
    return {clamp01(u[0]), 0.0};
  }
  double param_measure() const override { return vantage_.measure(); }
  bool param_admissible(const Param& a) const override {
    return a[0] >= 0.0 && a[0] <= 1.0 && (param_dim() == 1 || (a[1] >= 0.0 && a[1] <= 1.0));
  }
  std::optional<Image> try_map(const Param& alpha, const Point& x) const override {
    const Point a = vantage_.at(std::span<const double>(alpha.data(), 2));
    const double dx = x[0] - a[0], dy = x[1] - a[1], dz = x[2] - a[2];
    const double n = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (!(n > 0.0)) return std::nullopt;
    if (codomain() == Codomain::Circle) return Image{{wrap_angle(std::atan2(dy, dx)), 0.0, 0.0}};
    return Image{{dx / n, dy / n, dz / n}};
  }
  std::array<double, 3> axis_lipschitz(const Param& alpha, const Box& region) const override {
    const Point a = vantage_.at(std::span<const double>(alpha.data(), 2));
    const double d = region.distance_to(a);
    const double L = d > 0.0 ? 1.0 / d : INFINITY;
    return {L, L, box_.dim == 3 ? L : 0.0};
  }
  // The angular range of a box seen from outside is spanned by its corners.
  std::optional<Interval> exact_image(const Param& alpha, const Box& r) const override {
    if (codomain() != Codomain::Circle) return std::nullopt;
    const Point a = vantage_.at(std::span<const double>(alpha.data(), 2));
    if (!(r.distance_to(a) > 0.0)) return std::nullopt;
    const Point c = r.center();
    const double base = std::atan2(c[1] - a[1], c[0] - a[0]);
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double x = (k & 1) ? r.hi[0] : r.lo[0], y = (k & 2) ? r.hi[1] : r.lo[1];
      const double rel = std::remainder(std::atan2(y - a[1], x - a[0]) - base, kTwoPi);
      lo = std::min(lo, rel);
      hi = std::max(hi, rel);
    }
    const double start = wrap_angle(base + lo);
    return Interval{start, start + (hi - lo)};
  }
  const Vantage& vantage() const { return vantage_; }

 private:
  Vantage vantage_;
  Box box_;
};

class CurveFamily final : public ProjectionFamily {
 public:
  CurveFamily(CurveSpec spec, std::string name) : spec_(std::move(spec)), name_(std::move(name)) {
    h_ = spec_.half_width();
  }
  std::string name() const override { return name_; }
  int domain_dim() const override { return 2; }
  int param_dim() const override { return 1; }
  Codomain codomain() const override { return Codomain::Line; }
  Box domain() const override { return Box::square(0.0, 0.0, h_, h_); }
  Param param_at(std::span<const double> u) const override { return {spec_.lo + h_ + clamp01(u[0]) * h_, 0.0}; }
  double param_measure() const override { return h_; }
  bool param_admissible(const Param& a) const override {
    return a[0] >= spec_.lo + h_ - 1e-12 && a[0] <= spec_.hi + 1e-12;
  }
  Param extended_param_at(std::span<const double> u) const override {
    return {spec_.lo + clamp01(u[0]) * (spec_.hi + h_ - spec_.lo), 0.0};
  }
  double extended_param_measure() const override { return spec_.hi + h_ - spec_.lo; }
  std::optional<Image> try_map(const Param& a, const Point& x) const override {
    double t = a[0] - x[0];
    if (t < spec_.lo - 1e-12 || t > spec_.hi + 1e-12) return std::nullopt;
    t = std::clamp(t, spec_.lo, spec_.hi);
    return Image{{x[1] + spec_.gamma(t), 0.0, 0.0}};
  }
  std::optional<Box> clip(const Param& a, const Box& region) const override {
    Box b = region;
    b.lo[0] = std::max(b.lo[0], a[0] - spec_.hi);
    b.hi[0] = std::min(b.hi[0], a[0] - spec_.lo);
    if (b.lo[0] > b.hi[0]) return std::nullopt;
    return b;
  }
  std::array<double, 3> axis_lipschitz(const Param& a, const Box& region) const override {
    const double t0 = std::clamp(a[0] - region.hi[0], spec_.lo, spec_.hi);
    const double t1 = std::clamp(a[0] - region.lo[0], spec_.lo, spec_.hi);
    return {std::max(std::abs(spec_.dgamma(t0)), std::abs(spec_.dgamma(t1))), 1.0, 0.0};
  }
  std::optional<Interval> exact_image(const Param& a, const Box& r) const override {
    const auto range = spec_.range_on(a[0] - r.hi[0], a[0] - r.lo[0]);
    if (!range) return std::nullopt;
    return Interval{r.lo[1] + range->first, r.hi[1] + range->second};
  }

 private:
  CurveSpec spec_;
  std::string name_;
  double h_ = 0.0;
};

class SurfaceFamily final : public ProjectionFamily {
 public:
  explicit SurfaceFamily(SurfaceSpec spec) : spec_(std::move(spec)) {
    validate_surface(spec_);
    zscale_ = surface_zscale(spec_);
    rho_ = spec_.radius / 3.0;
    double mx = 0.0;
    for (int k = 0; k <= 1000; ++k) mx = std::max(mx, std::abs(spec_.df(spec_.radius * k / 1000.0)));
    slope_ = mx / zscale_;
  }
  std::string name() const override { return "surface:" + spec_.label; }
  int domain_dim() const override { return 3; }
  int param_dim() const override { return 2; }
  Codomain codomain() const override { return Codomain::Line; }
  Box domain() const override { return Box::cube(-rho_, -rho_, -rho_, rho_, rho_, rho_); }
  bool in_domain(const Point& x) const override {
    return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) <= rho_ * (1.0 + 1e-12);
  }
  Param param_at(std::span<const double> u) const override {
    const double r = rho_ * std::sqrt(clamp01(u[0])), phi = kTwoPi * clamp01(u[1]);
    return {r * std::cos(phi), r * std::sin(phi)};
  }
  double param_measure() const override { return kPi * rho_ * rho_; }
  bool param_admissible(const Param& a) const override { return std::hypot(a[0], a[1]) <= rho_ * (1.0 + 1e-12); }
  std::optional<Image> try_map(const Param& a, const Point& x) const override {
    const double r = std::hypot(a[0] - x[0], a[1] - x[1]);
    if (r > spec_.radius * (1.0 + 1e-12)) return std::nullopt;
    return Image{{x[2] + spec_.f(std::min(r, spec_.radius)) / zscale_, 0.0, 0.0}};
  }
  std::array<double, 3> axis_lipschitz(const Param&, const Box&) const override { return {slope_, slope_, 1.0}; }

 private:
  SurfaceSpec spec_;
  double zscale_ = 1.0;
  double rho_ = 1.0;
  double slope_ = 1.0;
};

}  // namespace

FamilyPtr orthogonal_family(const Box& domain) { return std::make_shared<OrthogonalFamily>(domain); }

FamilyPtr radial_family(const Vantage& vantage, const Box& visible_box) {
  return std::make_shared<RadialFamily>(vantage, visible_box);
}

FamilyPtr curve_family(const CurveSpec& spec) {
  validate_curve(spec);
  return std::make_shared<CurveFamily>(spec, "curve:" + spec.label);
}

FamilyPtr straight_line_family(double slope, double lo, double hi) {
  if (!std::isfinite(slope) || std::abs(slope) > 1.0) throw InvalidInput("line slope must lie in [-1, 1]");
  if (!(lo < hi)) throw InvalidInput("line interval must be non-empty");
  CurveSpec c;
  c.gamma = [slope](double t) { return slope * t; };
  c.dgamma = [slope](double) { return slope; };
  c.lo = lo;
  c.hi = hi;
  c.lambda = INFINITY;
  c.sign = 1;
  c.label = "line";
  return std::make_shared<CurveFamily>(c, "straight-line");
}

FamilyPtr surface_family(const SurfaceSpec& spec) { return std::make_shared<SurfaceFamily>(spec); }

std::optional<Point> curve_intersection(const CurveSpec& spec, const Point& a, const Point& b) {
  const double d = b[0] - a[0];
  if (d == 0.0) return std::nullopt;
  // a + (t, gamma(t)) = b + (t - d, gamma(t - d)).
  const double t0 = std::max(spec.lo, spec.lo + d), t1 = std::min(spec.hi, spec.hi + d);
  if (t0 > t1) return std::nullopt;
  auto g = [&](double t) { return spec.gamma(t) - spec.gamma(t - d) - (b[1] - a[1]); };
  const double g0 = g(t0), g1 = g(t1);
  if ((g0 > 0) == (g1 > 0) && g0 != 0.0 && g1 != 0.0) return std::nullopt;
  const double t = bisect(g, t0, t1);
  return Point::xy(a[0] + t, a[1] + spec.gamma(t));
}

// ---------------------------------------------------------- decomposition

namespace {

Point rotate_quarter(const Point& p, int k) {
  double x = p[0], y = p[1];
  for (int i = 0; i < ((k % 4) + 4) % 4; ++i) {
    const double nx = -y, ny = x;
    x = nx;
    y = ny;
  }
  return Point::xy(x, y);
}

}  // namespace

std::vector<DecomposedPiece> decompose_curve(const std::vector<CurvePiece>& pieces, int samples) {
  if (samples < 16) throw InvalidInput("decomposition needs at least 16 samples");
  std::vector<DecomposedPiece> out;
  for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
    const auto& piece = pieces[pi];
    if (!piece.position || !piece.velocity || !(piece.t0 < piece.t1))
      throw InvalidInput("curve piece " + std::to_string(pi) + " is malformed");

    auto raw_angle = [&](double t) {
      const Point v = piece.velocity(t);
      if (!(std::hypot(v[0], v[1]) > 0.0)) throw InvalidInput("curve piece has a vanishing tangent at t = " + fmt(t));
      return std::atan2(v[1], v[0]);
    };
    std::vector<double> ts(samples + 1), th(samples + 1);
    for (int k = 0; k <= samples; ++k) {
      ts[k] = piece.t0 + (piece.t1 - piece.t0) * k / samples;
      const double a = raw_angle(ts[k]);
      th[k] = k == 0 ? a : th[k - 1] + std::remainder(a - th[k - 1], kTwoPi);
    }
    const double dir = th[samples] > th[0] ? 1.0 : -1.0;
    for (int k = 0; k < samples; ++k)
      if (dir * (th[k + 1] - th[k]) <= 1e-9 * (piece.t1 - piece.t0))
        throw InvalidInput("curve piece " + std::to_string(pi) + " has vanishing curvature near t = " + fmt(ts[k]));

    auto angle_at = [&](double t) {
      const auto k = static_cast<std::size_t>(std::clamp<double>(
          std::floor((t - piece.t0) / (piece.t1 - piece.t0) * samples), 0.0, samples - 1.0));
      return th[k] + std::remainder(raw_angle(t) - th[k], kTwoPi);
    };

    // Split where the tangent angle crosses pi/4 + m pi/2.
    std::vector<double> cuts{piece.t0};
    const double amin = std::min(th.front(), th.back()), amax = std::max(th.front(), th.back());
    for (double m = std::ceil((amin - kPi / 4) / (kPi / 2)); kPi / 4 + m * kPi / 2 < amax; m += 1.0) {
      const double target = kPi / 4 + m * kPi / 2;
      if (target - amin < 1e-9 || amax - target < 1e-9) continue;
      cuts.push_back(bisect([&](double t) { return dir * (angle_at(t) - target); }, piece.t0, piece.t1));
    }
    cuts.push_back(piece.t1);

    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double ta = cuts[c], tb = cuts[c + 1];
      if (tb - ta < 1e-9) continue;
      const double mid_angle = angle_at(0.5 * (ta + tb));
      const auto m = static_cast<long>(std::llround(mid_angle / (kPi / 2)));
      const int k = static_cast<int>(((m % 2) + 2) % 2);
      // Rotate clockwise by k quarter turns: the tangent angle lands in [-pi/4, pi/4] mod pi.
      const int turns = (4 - k) % 4;
      auto pos = [&piece, turns](double t) { return rotate_quarter(piece.position(t), turns); };
      auto vel = [&piece, turns](double t) { return rotate_quarter(piece.velocity(t), turns); };
      const double xa = pos(ta)[0], xb = pos(tb)[0];
      const bool increasing = xb > xa;
      auto t_of_x = [=](double x) {
        double lo = ta, hi = tb;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
          const double mt = 0.5 * (lo + hi);
          if ((pos(mt)[0] < x) == increasing)
            lo = mt;
          else
            hi = mt;
        }
        return 0.5 * (lo + hi);
      };
      CurveSpec spec;
      spec.lo = std::min(xa, xb);
      spec.hi = std::max(xa, xb);
      spec.gamma = [=](double x) { return pos(t_of_x(x))[1]; };
      spec.dgamma = [=](double x) {
        const Point v = vel(t_of_x(x));
        return std::clamp(v[1] / v[0], -1.0, 1.0);
      };
      spec.label = "piece" + std::to_string(out.size());

      const int grid = 2001;
      double rmin = INFINITY, rmax = 0.0, prev = spec.dgamma(spec.lo);
      for (int g = 1; g < grid; ++g) {
        const double x0 = spec.lo + (spec.hi - spec.lo) * (g - 1) / (grid - 1);
        const double x1 = g == grid - 1 ? spec.hi : spec.lo + (spec.hi - spec.lo) * g / (grid - 1);
        const double d = spec.dgamma(x1);
        const double ratio = (d - prev) / (x1 - x0);
        if (g == 1) spec.sign = ratio > 0 ? 1 : -1;
        rmin = std::min(rmin, std::abs(ratio));
        rmax = std::max(rmax, std::abs(ratio));
        prev = d;
      }
      if (!(rmin > 1e-9)) throw InvalidInput("curve piece " + std::to_string(pi) + " has vanishing curvature");
      spec.lambda = std::max({1.0, rmax, 1.0 / rmin}) * 1.01;
      validate_curve(spec, grid);
      out.push_back({std::move(spec), k == 0 ? 0 : turns});
    }
  }
  return out;
}

}  // namespace favard
