#include "favard/measures.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "favard/errors.hpp"
#include "favard/parallel.hpp"
#include "favard/rng.hpp"

namespace favard {

namespace {

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

// Area of the disk of radius r about the origin intersected with [0, x] x [0, y],
// extended as an odd function in each argument.
double quadrant_area(double x, double y, double r) {
  const double sx = x < 0 ? -1.0 : 1.0, sy = y < 0 ? -1.0 : 1.0;
  x = std::abs(x);
  y = std::abs(y);
  auto G = [r](double u) { return 0.5 * (u * std::sqrt(std::max(0.0, r * r - u * u)) + r * r * std::asin(std::min(1.0, u / r))); };
  const double u_star = y < r ? std::sqrt(r * r - y * y) : 0.0;
  const double a = std::min(x, u_star), b = std::min(x, r);
  return sx * sy * (y * a + G(b) - G(a));
}

double disk_rect_area(const Point& c, double r, const Box& box) {
  const double x0 = box.lo[0] - c.x[0], x1 = box.hi[0] - c.x[0];
  const double y0 = box.lo[1] - c.x[1], y1 = box.hi[1] - c.x[1];
  return quadrant_area(x1, y1, r) - quadrant_area(x0, y1, r) - quadrant_area(x1, y0, r) + quadrant_area(x0, y0, r);
}

std::string describe(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << p.x[0] << ", " << p.x[1];
  if (p.dim == 3) os << ", " << p.x[2];
  os << ")";
  return os.str();
}

}  // namespace

CellMeasure::CellMeasure(CellSet support, std::vector<double> weights, int quadrature_order)
    : support_(std::move(support)), weights_(std::move(weights)), order_(quadrature_order) {
  if (support_.empty()) throw InvalidInput("measure support must be non-empty");
  if (weights_.size() != support_.size()) throw InvalidInput("one weight per cell is required");
  if (order_ < 1 || order_ > 64) throw InvalidInput("quadrature order must be in [1, 64]");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("weights must be finite and non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("weights must sum to 1");
}

CellMeasure CellMeasure::with_quadrature_order(int order) const { return CellMeasure(support_, weights_, order); }

std::size_t CellMeasure::points_per_cell() const { return ipow(static_cast<std::size_t>(order_), support_.dim()); }

void CellMeasure::quadrature(std::vector<Point>& points, std::vector<double>& masses) const {
  const int dim = support_.dim();
  const std::size_t per = points_per_cell();
  const double h = support_.side() / order_;
  points.clear();
  masses.clear();
  points.reserve(point_count());
  masses.reserve(point_count());
  for (std::size_t k = 0; k < support_.size(); ++k) {
    const Point a = support_.anchor(k);
    const double m = weights_[k] / static_cast<double>(per);
    for (std::size_t q = 0; q < per; ++q) {
      Point p;
      p.dim = dim;
      std::size_t rest = q;
      for (int ax = 0; ax < dim; ++ax) {
        p.x[ax] = a.x[ax] + (static_cast<double>(rest % order_) + 0.5) * h;
        rest /= order_;
      }
      points.push_back(p);
      masses.push_back(m);
    }
  }
}

double CellMeasure::mass_in_ball(const Point& center, double radius) const {
  if (!(radius >= 0.0)) throw InvalidInput("radius must be non-negative");
  double mass = 0.0;
  const double cell_volume = std::pow(support_.side(), support_.dim());
  if (support_.dim() == 2) {
    for (std::size_t k = 0; k < support_.size(); ++k) {
      if (weights_[k] == 0.0) continue;
      const Box b = support_.cell_box(k);
      if (b.distance_to(center) > radius) continue;
      mass += weights_[k] * disk_rect_area(center, radius, b) / cell_volume;
    }
    return mass;
  }
  std::vector<Point> pts;
  std::vector<double> ms;
  quadrature(pts, ms);
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (distance(pts[i], center) <= radius) mass += ms[i];
  return mass;
}

CellMeasure equidistributed_measure(const CellSet& cells, int quadrature_order) {
  if (cells.empty()) throw InvalidInput("equidistributed measure needs a non-empty support");
  return CellMeasure(cells, std::vector<double>(cells.size(), 1.0 / static_cast<double>(cells.size())),
                     quadrature_order);
}

namespace {

using boost::math::quadrature::gauss;

// Integral over [0,1]^dim of P(v) |v|^-s, with P(v) = sum_mask c[mask] prod_{k in mask} v_k.
// The singular corner at the origin is removed by splitting into the sectors
// where one coordinate dominates and substituting v = t w, w_axis = 1.
double corner_integral(const std::array<double, 8>& c, double s, int dim) {
  auto sector = [&](const std::array<double, 3>& w) {
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) r2 += w[k] * w[k];
    double acc = 0.0;
    for (int mask = 0; mask < (1 << dim); ++mask) {
      double mono = c[mask];
      for (int k = 0; k < dim; ++k)
        if (mask & (1 << k)) mono *= w[k];
      acc += mono / (dim - s + std::popcount(static_cast<unsigned>(mask)));
    }
    return std::pow(r2, -0.5 * s) * acc;
  };
  double total = 0.0;
  for (int axis = 0; axis < dim; ++axis) {
    if (dim == 2) {
      total += gauss<double, 30>::integrate(
          [&](double p) {
            std::array<double, 3> w{p, p, 0.0};
            w[axis] = 1.0;
            return sector(w);
          },
          0.0, 1.0);
    } else {
      total += gauss<double, 30>::integrate(
          [&](double p) {
            return gauss<double, 30>::integrate(
                [&](double q) {
                  std::array<double, 3> w{};
                  int slot = 0;
                  for (int k = 0; k < 3; ++k) w[k] = k == axis ? 1.0 : (slot++ == 0 ? p : q);
                  return sector(w);
                },
                0.0, 1.0);
          },
          0.0, 1.0);
    }
  }
  return total;
}

// Integral over the box prod [lo_k, lo_k + 1] of prod (a_k + b_k v_k) |v|^-s,
// for boxes away from the origin.
double smooth_box_integral(const std::array<double, 3>& lo, const std::array<double, 3>& a,
                           const std::array<double, 3>& b, double s, int dim) {
  auto f = [&](double x, double y, double z) {
    double r2 = x * x + y * y + z * z;
    double poly = (a[0] + b[0] * x) * (a[1] + b[1] * y);
    if (dim == 3) poly *= a[2] + b[2] * z;
    return poly * std::pow(r2, -0.5 * s);
  };
  if (dim == 2)
    return gauss<double, 20>::integrate(
        [&](double x) { return gauss<double, 20>::integrate([&](double y) { return f(x, y, 0.0); }, lo[1], lo[1] + 1); },
        lo[0], lo[0] + 1);
  return gauss<double, 20>::integrate(
      [&](double x) {
        return gauss<double, 20>::integrate(
            [&](double y) { return gauss<double, 20>::integrate([&](double z) { return f(x, y, z); }, lo[2], lo[2] + 1); },
            lo[1], lo[1] + 1);
      },
      lo[0], lo[0] + 1);
}

double compute_interaction(const CellIndex& d, double s, int dim) {
  // The difference of the two uniform points has density prod (1 - |v_k - d_k|)
  // on the box of side 2 about d; split it into unit boxes on the integer grid.
  double total = 0.0;
  for (int choice = 0; choice < (1 << dim); ++choice) {
    std::array<double, 3> lo{0, 0, 0}, a{1, 1, 1}, b{0, 0, 0};
    bool corner = true;
    for (int k = 0; k < dim; ++k) {
      const auto dk = static_cast<double>(d[k]);
      if (choice & (1 << k)) {
        lo[k] = dk;
        a[k] = 1.0 + dk;
        b[k] = -1.0;
      } else {
        lo[k] = dk - 1.0;
        a[k] = 1.0 - dk;
        b[k] = 1.0;
      }
      corner = corner && (lo[k] == 0.0 || lo[k] == -1.0);
    }
    if (!corner) {
      total += smooth_box_integral(lo, a, b, s, dim);
      continue;
    }
    // Reflect onto [0,1]^dim and expand the product into monomials.
    for (int k = 0; k < dim; ++k)
      if (lo[k] == -1.0) b[k] = -b[k];
    std::array<double, 8> c{};
    for (int mask = 0; mask < (1 << dim); ++mask) {
      double coef = 1.0;
      for (int k = 0; k < dim; ++k) coef *= (mask & (1 << k)) ? b[k] : a[k];
      c[mask] = coef;
    }
    total += corner_integral(c, s, dim);
  }
  return total;
}

}  // namespace

double unit_cell_interaction(const CellIndex& offset, double s, int dim) {
  if (dim != 2 && dim != 3) throw InvalidInput("cell interaction is defined for dim 2 or 3");
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidInput("interaction exponent must be non-negative");
  std::array<std::int64_t, 3> d{0, 0, 0};
  std::int64_t reach = 0;
  for (int k = 0; k < dim; ++k) {
    d[k] = offset[k] < 0 ? -offset[k] : offset[k];
    reach = std::max(reach, d[k]);
  }
  if (reach <= 1 && s >= dim) throw InvalidInput("interaction of touching cells diverges for s >= dim");
  std::sort(d.begin(), d.begin() + dim);

  static std::mutex lock;
  static std::map<std::tuple<double, int, std::array<std::int64_t, 3>>, double> cache;
  const auto key = std::make_tuple(s, dim, d);
  {
    std::lock_guard<std::mutex> guard(lock);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double value = compute_interaction(d, s, dim);
  std::lock_guard<std::mutex> guard(lock);
  cache.emplace(key, value);
  return value;
}

double self_energy_constant(double s, int dim) {
  if (dim != 2 && dim != 3) throw InvalidInput("self energy is defined for dim 2 or 3");
  if (!(s >= 0.0) || s >= dim) throw InvalidInput("self energy requires 0 <= s < dim");
  return unit_cell_interaction({0, 0, 0}, s, dim);
}

namespace {

template <class Kernel>
double pair_sum(const std::vector<Point>& pts, const std::vector<double>& ms, Kernel kernel) {
  const std::size_t n = pts.size();
  std::vector<double> xs(n), ys(n), zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = pts[i].x[0];
    ys[i] = pts[i].x[1];
    zs[i] = pts[i].x[2];
  }
  return parallel::sum(n, 32, [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      const double xi = xs[i], yi = ys[i], zi = zs[i];
      double row = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = xs[j] - xi, dy = ys[j] - yi, dz = zs[j] - zi;
        row += ms[j] * kernel(dx * dx + dy * dy + dz * dz);
      }
      acc += ms[i] * row;
    }
    return acc;
  });
}

// Sum over ordered pairs of sub-cells within `radius` grid steps of
// m_i m_j h^-s (K(d) - |d|^-s), plus m_i^2 h^-s K(0) when include_self.
double near_field_sum(const CellMeasure& mu, double s, const EnergyOptions& opt) {
  const int dim = mu.support().dim();
  const int q = mu.quadrature_order();
  const int R = opt.near_field ? opt.near_radius : 0;
  const double h = mu.support().side() / q;
  const double scale = std::pow(h, -s);

  // Offsets with their kernel correction.
  std::vector<std::pair<CellIndex, double>> offsets;
  const int zr = dim == 3 ? R : 0;
  for (int k = -zr; k <= zr; ++k)
    for (int j = -R; j <= R; ++j)
      for (int i = -R; i <= R; ++i) {
        const CellIndex d{i, j, k};
        const bool self = i == 0 && j == 0 && k == 0;
        if (self && !opt.include_self) continue;
        const double exact = unit_cell_interaction(d, s, dim);
        const double midpoint = self ? 0.0 : std::pow(static_cast<double>(i * i + j * j + k * k), -0.5 * s);
        offsets.emplace_back(d, exact - midpoint);
      }
  if (offsets.empty()) return 0.0;

  // Sub-cell grid indices (cell index * q + sub index) with masses.
  std::vector<std::pair<CellIndex, double>> grid;
  grid.reserve(mu.point_count());
  const std::size_t per = mu.points_per_cell();
  for (std::size_t c = 0; c < mu.support().size(); ++c) {
    const auto& idx = mu.support().indices()[c];
    const double m = mu.weights()[c] / static_cast<double>(per);
    for (std::size_t sub = 0; sub < per; ++sub) {
      CellIndex g{0, 0, 0};
      std::size_t rest = sub;
      for (int a = 0; a < dim; ++a) {
        g[a] = idx[a] * q + static_cast<std::int64_t>(rest % q);
        rest /= q;
      }
      grid.emplace_back(g, m);
    }
  }
  std::sort(grid.begin(), grid.end());

  return scale * parallel::sum(grid.size(), 256, [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      const auto& [g, m] = grid[i];
      double row = 0.0;
      for (const auto& [d, corr] : offsets) {
        const CellIndex target{g[0] + d[0], g[1] + d[1], g[2] + d[2]};
        auto it = std::lower_bound(grid.begin(), grid.end(), target,
                                   [](const auto& entry, const CellIndex& key) { return entry.first < key; });
        if (it != grid.end() && it->first == target) row += it->second * corr;
      }
      acc += m * row;
    }
    return acc;
  });
}

}  // namespace

double riesz_energy(const CellMeasure& mu, double s, const EnergyOptions& options) {
  const int dim = mu.support().dim();
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("energy exponent must be positive");
  if (s > dim) throw InvalidInput("energy exponent must not exceed the dimension");
  if ((options.include_self || options.near_field) && s >= dim)
    throw InvalidInput("cell self and near-field energies diverge for s >= dim; disable both to get the point-pair sum");
  if (options.near_radius < 1) throw InvalidInput("near-field radius must be at least 1");

  std::vector<Point> pts;
  std::vector<double> ms;
  mu.quadrature(pts, ms);

  double off = 0.0;
  if (s == 1.0)
    off = pair_sum(pts, ms, [](double d2) { return 1.0 / std::sqrt(d2); });
  else if (s == 2.0)
    off = pair_sum(pts, ms, [](double d2) { return 1.0 / d2; });
  else if (s == 0.5)
    off = pair_sum(pts, ms, [](double d2) { return 1.0 / std::sqrt(std::sqrt(d2)); });
  else
    off = pair_sum(pts, ms, [s](double d2) { return std::pow(d2, -0.5 * s); });
  const double energy = 2.0 * off + near_field_sum(mu, s, options);
  if (!std::isfinite(energy))
    throw NumericalError("energy is not finite: distinct quadrature points coincide or the kernel overflowed");
  return energy;
}

double PushforwardMeasure1D::total_mass() const { return parallel::tree_sum(weights); }

double PushforwardMeasure1D::mass_in(double lo, double hi) const {
  std::vector<double> hits;
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (positions[i] >= lo && positions[i] < hi) hits.push_back(weights[i]);
  return parallel::tree_sum(std::move(hits));
}

std::vector<double> PushforwardMeasure1D::density(double lo, double hi) const {
  if (!(bin_width > 0.0) || !(hi > lo)) throw InvalidInput("density needs a positive bin width and range");
  const auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width));
  std::vector<double> out(bins, 0.0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] < lo || positions[i] >= hi) continue;
    const auto b = std::min(bins - 1, static_cast<std::size_t>((positions[i] - lo) / bin_width));
    out[b] += weights[i] / bin_width;
  }
  return out;
}

PushforwardMeasure1D pushforward(const ScalarMap& map, const CellMeasure& mu, double bin_width, bool circular) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw InvalidInput("bin width must be positive");
  std::vector<Point> pts;
  PushforwardMeasure1D out;
  mu.quadrature(pts, out.weights);
  out.bin_width = bin_width;
  out.circular = circular;
  out.positions.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto v = map(pts[i]);
    if (!v || !std::isfinite(*v)) throw DomainError("projection map undefined at " + describe(pts[i]));
    double y = *v;
    if (circular) {
      y = std::fmod(y, 2.0 * std::numbers::pi);
      if (y < 0) y += 2.0 * std::numbers::pi;
    }
    out.positions[i] = y;
  }
  return out;
}

FrostmanReport frostman_check(const CellMeasure& mu, double t, int samples, std::uint64_t seed) {
  const int dim = mu.support().dim();
  if (!(t > 0.0) || t > dim) throw InvalidInput("growth exponent must lie in (0, dim]");
  if (samples < 1) throw InvalidInput("at least one sample is required");
  const Box box = mu.support().bounds();
  double diam = 0.0;
  for (int a = 0; a < dim; ++a) diam += box.extent(a) * box.extent(a);
  diam = std::sqrt(diam);
  const double r_lo = mu.support().side();

  std::vector<double> ratio(static_cast<std::size_t>(samples));
  std::vector<Point> centers(ratio.size());
  std::vector<double> radii(ratio.size());
  parallel::for_chunks(ratio.size(), 16, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng(seed, i);
      Point x;
      x.dim = dim;
      for (int a = 0; a < dim; ++a) x.x[a] = rng.uniform(box.lo[a], box.hi[a]);
      const double r = r_lo < diam ? rng.log_uniform(r_lo, diam) : diam;
      centers[i] = x;
      radii[i] = r;
      ratio[i] = mu.mass_in_ball(x, r) / std::pow(r, t);
    }
  });
  const auto worst = static_cast<std::size_t>(std::max_element(ratio.begin(), ratio.end()) - ratio.begin());
  FrostmanReport rep;
  rep.exponent = t;
  rep.constant = ratio[worst];
  rep.max_violation_ratio = ratio[worst] * std::pow(diam, t);
  rep.worst_center = centers[worst];
  rep.worst_radius = radii[worst];
  rep.samples = samples;
  rep.seed = seed;
  return rep;
}

CellMeasure auxiliary_measure(const CellMeasure& mu, double r, double s) {
  if (!(r > 0.0) || !(r < 1.0)) throw InvalidInput("auxiliary radius must lie in (0, 1)");
  if (!(s > 0.0) || s > mu.support().dim()) throw InvalidInput("auxiliary exponent must lie in (0, dim]");
  const int dim = mu.support().dim();
  std::vector<Point> pts;
  std::vector<double> ms;
  mu.quadrature(pts, ms);

  std::vector<Point> centers;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (ms[i] <= 0.0) continue;
    bool free = true;
    for (const auto& c : centers)
      if (distance(c, pts[i]) <= 2.0 * r) {
        free = false;
        break;
      }
    if (free) centers.push_back(pts[i]);
  }
  if (centers.empty()) throw InvalidInput("auxiliary measure: no ball carries positive mass");

  double side = mu.support().side();
  while (side > r / 4.0) side *= 0.5;

  std::vector<double> ball_mass(centers.size());
  std::vector<CellSet> balls;
  balls.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    ball_mass[i] = mu.mass_in_ball(centers[i], r);
    balls.push_back(disk_cells(centers[i], r, side));
    if (balls.back().empty()) throw NumericalError("auxiliary ball has no cells");
  }
  const double tau = parallel::tree_sum(ball_mass);
  if (!(tau > 0.0)) throw InvalidInput("auxiliary measure: balls carry no mass");

  std::vector<std::pair<CellIndex, double>> entries;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double w = ball_mass[i] / (tau * static_cast<double>(balls[i].size()));
    for (const auto& idx : balls[i].indices()) entries.emplace_back(idx, w);
  }
  std::sort(entries.begin(), entries.end());
  std::vector<CellIndex> idx;
  std::vector<double> weights;
  for (const auto& [c, w] : entries) {
    idx.push_back(c);
    weights.push_back(w);
  }
  CellSet support(dim, side, idx);
  if (support.size() != weights.size()) throw NumericalError("auxiliary balls overlap");
  // Renormalize against rounding so the weights sum to one within 1e-12.
  const double total = parallel::tree_sum(weights);
  for (auto& w : weights) w /= total;
  return CellMeasure(std::move(support), std::move(weights), mu.quadrature_order());
}

}  // namespace favard
