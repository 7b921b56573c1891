#include "favard/favard.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "favard/errors.hpp"
#include "favard/parallel.hpp"
#include "favard/rng.hpp"

namespace favard {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

// Boundary sampling of one box. Values on the circle are taken relative to
// the image of the box center, which is continuous because the vantage point
// lies outside the box.
Interval sampled_image(const ProjectionFamily& fam, const Param& alpha, const Box& box, double resolution) {
  const bool circle = fam.codomain() == Codomain::Circle;
  const double base = circle ? fam.map_scalar(alpha, box.center()) : 0.0;
  auto value = [&](const Point& p) {
    const double v = fam.map_scalar(alpha, p);
    return circle ? std::remainder(v - base, kTwoPi) : v;
  };
  const auto lip = fam.axis_lipschitz(alpha, box);
  double lo = INFINITY, hi = -INFINITY;
  auto widen = [&](double a, double b, double slack) {
    lo = std::min(lo, std::min(a, b) - slack);
    hi = std::max(hi, std::max(a, b) + slack);
  };

  if (box.dim == 2) {
    for (int axis = 0; axis < 2; ++axis)
      for (int side = 0; side < 2; ++side) {
        // Edge along `axis` at the other coordinate's lo/hi.
        const int other = 1 - axis;
        const double fixed = side ? box.hi[other] : box.lo[other];
        const double len = box.extent(axis);
        const int n = std::max(1, static_cast<int>(std::ceil(len / resolution)));
        const double step = len / n;
        auto at = [&](int i) {
          Point p;
          p.dim = 2;
          p.x[axis] = i == n ? box.hi[axis] : box.lo[axis] + i * step;
          p.x[other] = fixed;
          return p;
        };
        double prev = value(at(0));
        widen(prev, prev, 0.0);
        for (int i = 1; i <= n; ++i) {
          const double cur = value(at(i));
          // Between two samples a Lipschitz function stays within (v0 + v1 +- L step) / 2.
          lo = std::min(lo, 0.5 * (prev + cur - lip[axis] * step));
          hi = std::max(hi, 0.5 * (prev + cur + lip[axis] * step));
          prev = cur;
        }
      }
  } else {
    for (int normal = 0; normal < 3; ++normal)
      for (int side = 0; side < 2; ++side) {
        const int a = (normal + 1) % 3, b = (normal + 2) % 3;
        const int na = std::max(1, static_cast<int>(std::ceil(box.extent(a) / resolution)));
        const int nb = std::max(1, static_cast<int>(std::ceil(box.extent(b) / resolution)));
        const double sa = box.extent(a) / na, sb = box.extent(b) / nb;
        const double slack = 0.5 * (lip[a] * sa + lip[b] * sb);
        std::vector<double> row(na + 1), prev_row(na + 1);
        for (int j = 0; j <= nb; ++j) {
          for (int i = 0; i <= na; ++i) {
            Point p;
            p.dim = 3;
            p.x[normal] = side ? box.hi[normal] : box.lo[normal];
            p.x[a] = i == na ? box.hi[a] : box.lo[a] + i * sa;
            p.x[b] = j == nb ? box.hi[b] : box.lo[b] + j * sb;
            row[i] = value(p);
          }
          if (j > 0)
            for (int i = 0; i < na; ++i) {
              const double mn = std::min({row[i], row[i + 1], prev_row[i], prev_row[i + 1]});
              const double mx = std::max({row[i], row[i + 1], prev_row[i], prev_row[i + 1]});
              widen(mn, mx, slack);
            }
          std::swap(row, prev_row);
        }
      }
  }
  if (circle) {
    const double start = wrap_angle(base + lo);
    return {start, start + (hi - lo)};
  }
  return {lo, hi};
}

double trapezoid_weight(int k, int n) { return (k == 0 || k == n - 1 ? 0.5 : 1.0) / (n - 1); }

void check_planar(const CellSet& cells, const char* what) {
  if (cells.dim() != 2) throw InvalidInput(std::string(what) + " needs a planar cell set");
}

}  // namespace

double image_measure(const ProjectionFamily& fam, const Param& alpha, const CellSet& cells, double resolution,
                     ImageMode mode, bool extended) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw InvalidInput("resolution must be positive");
  if (fam.codomain() == Codomain::Sphere) throw InvalidInput("image measure needs a one-dimensional codomain");
  if (!extended && !fam.param_admissible(alpha)) throw InvalidInput("parameter lies outside A for " + fam.name());
  if (cells.empty()) return 0.0;
  if (cells.dim() != fam.domain_dim()) throw InvalidInput("cell set and family dimensions differ");
  if (resolution > cells.side() * (1.0 + 1e-12)) throw InvalidInput("resolution must not exceed the cell side");

  std::vector<Interval> images;
  images.reserve(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto region = fam.clip(alpha, cells.cell_box(k));
    if (!region) continue;
    std::optional<Interval> iv;
    if (mode == ImageMode::Auto) iv = fam.exact_image(alpha, *region);
    if (!iv) iv = sampled_image(fam, alpha, *region, resolution);
    images.push_back(*iv);
  }
  if (fam.codomain() == Codomain::Circle) return ArcUnion::from_arcs(images).measure();
  return IntervalUnion::from_intervals(std::move(images)).measure();
}

ParameterIntegral favard_parameter_integral(const ProjectionFamily& fam, const CellSet& cells, int quad_points,
                                            double resolution, ImageMode mode) {
  if (quad_points < 2) throw InvalidInput("quad_points must be >= 2");
  const int pd = fam.param_dim();
  const std::size_t nodes = pd == 1 ? quad_points : static_cast<std::size_t>(quad_points) * quad_points;

  auto integrate = [&](bool extended) {
    return parallel::sum(nodes, 8, [&](std::size_t b, std::size_t e) {
      double acc = 0.0;
      for (std::size_t idx = b; idx < e; ++idx) {
        const int i = static_cast<int>(idx % quad_points), j = static_cast<int>(idx / quad_points);
        const double u[2] = {static_cast<double>(i) / (quad_points - 1),
                             pd == 2 ? static_cast<double>(j) / (quad_points - 1) : 0.0};
        const Param alpha = extended ? fam.extended_param_at(u) : fam.param_at(u);
        double w = trapezoid_weight(i, quad_points);
        if (pd == 2) w *= trapezoid_weight(j, quad_points);
        acc += w * image_measure(fam, alpha, cells, resolution, mode, extended);
      }
      return acc;
    });
  };

  LengthEstimate base;
  base.method = "parameter-integral";
  base.resolution = resolution;
  base.samples = static_cast<long long>(nodes);

  ParameterIntegral out;
  const double avg = integrate(false);
  out.psi_average = base;
  out.psi_average.value = avg;
  out.psi_average.normalization = "psi-average";
  out.lebesgue = base;
  out.lebesgue.value = avg * fam.param_measure();
  out.lebesgue.normalization = "lebesgue";
  if (fam.extended_param_measure() != fam.param_measure()) {
    LengthEstimate ext = base;
    ext.value = integrate(true) * fam.extended_param_measure();
    ext.normalization = "lebesgue-extended";
    out.lebesgue_extended = ext;
  }
  return out;
}

LengthEstimate favard_minkowski(const CurveSpec& curve, const CellSet& cells, double pitch) {
  if (!curve.gamma || !(curve.lo <= curve.hi) || !std::isfinite(curve.lo) || !std::isfinite(curve.hi))
    throw InvalidInput("curve needs gamma on a finite interval");
  if (!(pitch > 0.0)) throw InvalidInput("pitch must be positive");
  LengthEstimate est;
  est.method = "minkowski";
  est.normalization = "area";
  est.resolution = pitch;
  if (cells.empty()) return est;
  check_planar(cells, "curve Minkowski sum");
  if (pitch > 0.5 * cells.side() * (1.0 + 1e-12)) throw InvalidInput("pitch must not exceed half the cell side");

  std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((curve.hi - curve.lo) / pitch)));
  std::vector<Point> samples;
  for (;;) {
    samples.clear();
    bool dense = true;
    for (std::size_t k = 0; k <= n; ++k) {
      const double t = k == n ? curve.hi : curve.lo + (curve.hi - curve.lo) * static_cast<double>(k) / n;
      samples.push_back(Point::xy(t, curve.gamma(t)));
      if (k > 0 && distance(samples[k - 1], samples[k]) > pitch) dense = false;
    }
    if (dense) break;
    if (n > (std::size_t{1} << 26)) throw ResourceError("curve needs too many samples at this pitch");
    n *= 2;
  }
  est.samples = static_cast<long long>(samples.size());
  est.value = minkowski_sum_raster(cells, samples, pitch);
  return est;
}

LengthEstimate favard_minkowski(const SurfaceSpec& surface, const CellSet& cells, double pitch) {
  if (!(pitch >= 1.0 / 128.0)) throw InvalidInput("surface Minkowski pitch must be at least 2^-7");
  LengthEstimate est;
  est.method = "minkowski";
  est.normalization = "volume";
  est.resolution = pitch;
  if (cells.empty()) return est;
  if (cells.dim() != 3) throw InvalidInput("surface Minkowski sum needs a cell set in space");
  if (pitch > 0.5 * cells.side() * (1.0 + 1e-12)) throw InvalidInput("pitch must not exceed half the cell side");
  const auto height = surface_height(surface);
  const double L = surface.radius;
  HeightGrid grid;
  grid.spacing = pitch;
  grid.x0 = grid.y0 = -L;
  grid.nx = grid.ny = static_cast<int>(std::ceil(2.0 * L / pitch)) + 1;
  grid.z.resize(static_cast<std::size_t>(grid.nx) * grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x0 + i * pitch, y = grid.y0 + j * pitch;
      grid.z[static_cast<std::size_t>(j) * grid.nx + i] = std::hypot(x, y) <= L ? height(x, y) : NAN;
    }
  est.samples = static_cast<long long>(grid.z.size());
  est.value = minkowski_sum_raster_3d(cells, grid, pitch);
  return est;
}

Box buffon_default_box(const CurveSpec& curve, const CellSet& cells) {
  check_planar(cells, "Buffon sampling");
  const Box e = cells.bounds();
  const auto g = curve.range_on(curve.lo, curve.hi);
  if (!g) throw InvalidInput("curve interval is empty");
  return Box::square(e.lo[0] + curve.lo, e.lo[1] + g->first, e.hi[0] + curve.hi, e.hi[1] + g->second)
      .expanded(cells.side());
}

LengthEstimate buffon_mc(const CurveSpec& curve, const CellSet& cells, long long drops,
                         const std::optional<Box>& sample_box, std::uint64_t seed) {
  if (drops < 1) throw InvalidInput("drops must be >= 1");
  if (!curve.gamma || !curve.dgamma || !(curve.lo <= curve.hi)) throw InvalidInput("curve needs gamma and gamma'");
  LengthEstimate est;
  est.method = "buffon";
  est.normalization = "area";
  est.samples = drops;
  est.seed = seed;
  if (cells.empty()) return est;
  check_planar(cells, "Buffon sampling");
  const Box box = sample_box ? *sample_box : buffon_default_box(curve, cells);
  if (box.dim != 2 || !(box.volume() > 0.0)) throw InvalidInput("Buffon box must have positive area");
  est.resolution = cells.side();

  // Columns of cells with merged runs of y indices.
  struct Run {
    std::int64_t lo, hi;
  };
  std::map<std::int64_t, std::vector<Run>> column_map;
  for (const auto& idx : cells.indices()) {
    auto& runs = column_map[idx[0]];
    if (!runs.empty() && runs.back().hi + 1 == idx[1])
      runs.back().hi = idx[1];
    else
      runs.push_back({idx[1], idx[1]});
  }
  std::vector<std::int64_t> xs;
  std::vector<std::vector<Run>> cols;
  for (auto& [x, runs] : column_map) {
    xs.push_back(x);
    cols.push_back(std::move(runs));
  }
  const double w = cells.side();

  // (alpha, beta) lies in E + Gamma iff some column cell [x0, x1] x [y0, y1]
  // and t in [alpha - x1, alpha - x0] give beta - gamma(t) in [y0, y1].
  auto hit = [&](double alpha, double beta) {
    const auto first = std::lower_bound(xs.begin(), xs.end(), static_cast<std::int64_t>(std::floor((alpha - curve.hi) / w)) - 1);
    for (auto it = first; it != xs.end(); ++it) {
      const double x0 = static_cast<double>(*it) * w;
      if (x0 > alpha - curve.lo) break;
      const auto range = curve.range_on(alpha - (x0 + w), alpha - x0);
      if (!range) continue;
      const double need_lo = beta - range->second, need_hi = beta - range->first;
      const auto& runs = cols[static_cast<std::size_t>(it - xs.begin())];
      auto r = std::lower_bound(runs.begin(), runs.end(), need_lo,
                                [w](const Run& run, double v) { return static_cast<double>(run.hi + 1) * w < v; });
      if (r != runs.end() && static_cast<double>(r->lo) * w <= need_hi) return true;
    }
    return false;
  };

  const double hits = parallel::sum(static_cast<std::size_t>(drops), 1 << 14, [&](std::size_t b, std::size_t e) {
    double count = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng(seed, i);
      const double alpha = rng.uniform(box.lo[0], box.hi[0]);
      const double beta = rng.uniform(box.lo[1], box.hi[1]);
      if (hit(alpha, beta)) count += 1.0;
    }
    return count;
  });
  const double p = hits / static_cast<double>(drops);
  est.value = p * box.volume();
  est.error_bar = box.volume() * std::sqrt(p * (1.0 - p) / static_cast<double>(drops));
  return est;
}

double visibility(const Point& a, const CellSet& cells, double resolution) {
  if (!(resolution > 0.0)) throw InvalidInput("resolution must be positive");
  if (cells.empty()) return 0.0;
  check_planar(cells, "visibility");
  if (a.dim != 2) throw InvalidInput("visibility needs a planar viewpoint");
  std::vector<Interval> arcs;
  arcs.reserve(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Box r = cells.cell_box(k);
    if (!(r.distance_to(a) > 0.0))
      throw DomainError("viewpoint (" + std::to_string(a[0]) + ", " + std::to_string(a[1]) + ") touches the set");
    const Point c = r.center();
    const double base = std::atan2(c[1] - a[1], c[0] - a[0]);
    double lo = 0.0, hi = 0.0;
    for (int corner = 0; corner < 4; ++corner) {
      const double x = (corner & 1) ? r.hi[0] : r.lo[0], y = (corner & 2) ? r.hi[1] : r.lo[1];
      const double rel = std::remainder(std::atan2(y - a[1], x - a[0]) - base, kTwoPi);
      lo = std::min(lo, rel);
      hi = std::max(hi, rel);
    }
    const double start = wrap_angle(base + lo);
    arcs.push_back({start, start + (hi - lo)});
  }
  return ArcUnion::from_arcs(arcs).measure();
}

LengthEstimate visibility_integral(const Vantage& vantage, const CellSet& cells, int quad_points, double resolution) {
  if (vantage.ambient_dim() != 2) throw InvalidInput("visibility integral needs a planar vantage set");
  if (quad_points < 2) throw InvalidInput("quad_points must be >= 2");
  LengthEstimate est;
  est.method = "visibility-integral";
  est.normalization = "arc-length";
  est.resolution = resolution;
  est.samples = quad_points;
  if (cells.empty()) return est;
  const bool periodic = vantage.kind == Vantage::Kind::Circle;
  const double avg = parallel::sum(quad_points, 8, [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      const int i = static_cast<int>(k);
      const double u = periodic ? static_cast<double>(i) / quad_points : static_cast<double>(i) / (quad_points - 1);
      const double w = periodic ? 1.0 / quad_points : trapezoid_weight(i, quad_points);
      acc += w * visibility(vantage.at(std::span<const double>(&u, 1)), cells, resolution);
    }
    return acc;
  });
  est.value = avg * vantage.measure();
  return est;
}

EnergyBoundReport energy_lower_bound_check(const ProjectionFamily& fam, const CellMeasure& nu, double s,
                                           const LengthEstimate& fav, const EnergyOptions& options) {
  if (fav.normalization != "psi-average")
    throw InvalidInput("energy bound needs a psi-averaged parameter integral");
  const CellSet& support = nu.support();
  if (support.dim() != fam.domain_dim()) throw InvalidInput("measure and family dimensions differ");
  for (std::size_t k = 0; k < support.size(); ++k) {
    const Box b = support.cell_box(k);
    for (int c = 0; c < (1 << b.dim); ++c) {
      Point p;
      p.dim = b.dim;
      for (int ax = 0; ax < b.dim; ++ax) p.x[ax] = (c & (1 << ax)) ? b.hi[ax] : b.lo[ax];
      if (!fam.in_domain(p)) throw InvalidInput("measure support leaves the domain of " + fam.name());
    }
  }
  EnergyBoundReport rep;
  rep.energy = riesz_energy(nu, s, options);
  rep.favard = fav.value;
  rep.product = rep.energy * rep.favard;
  rep.inconsistent = !(fav.value > 0.0);
  return rep;
}

MarstrandReport marstrand_dimension_experiment(const ProjectionFamily& fam, const CellSet& cells, int alphas,
                                               std::uint64_t seed, int scales) {
  if (scales < 4) throw InvalidInput("box counting needs at least 4 scales");
  if (alphas < 1) throw InvalidInput("alphas must be >= 1");
  if (cells.empty()) throw InvalidInput("box counting needs a non-empty set");
  if (fam.codomain() == Codomain::Sphere) throw InvalidInput("box counting needs a one-dimensional codomain");
  if (cells.dim() != fam.domain_dim()) throw InvalidInput("cell set and family dimensions differ");

  const CellMeasure mu = equidistributed_measure(cells, 8);
  std::vector<Point> points;
  std::vector<double> masses;
  mu.quadrature(points, masses);

  MarstrandReport rep;
  rep.seed = seed;
  rep.per_alpha.resize(alphas);
  parallel::for_chunks(alphas, 1, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng(seed, i);
      const double u[2] = {rng.uniform(), rng.uniform()};
      DimensionEstimate est;
      est.alpha = fam.param_at(u);
      std::vector<double> v(points.size());
      for (std::size_t k = 0; k < points.size(); ++k) v[k] = fam.map_scalar(est.alpha, points[k]);
      std::sort(v.begin(), v.end());
      std::vector<double> xs, ys;
      for (int k = 0; k < scales; ++k) {
        const double scale = std::ldexp(cells.side(), k);
        double count = 0.0, last = NAN;
        for (double val : v) {
          const double bin = std::floor(val / scale);
          if (!(bin == last)) {
            count += 1.0;
            last = bin;
          }
        }
        est.scales.push_back(scale);
        est.counts.push_back(count);
        xs.push_back(-std::log(scale));
        ys.push_back(std::log(count));
      }
      const double n = static_cast<double>(xs.size());
      double mx = 0, my = 0;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k] / n;
        my += ys[k] / n;
      }
      double sxx = 0, sxy = 0, syy = 0;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
      }
      est.slope = sxy / sxx;
      est.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
      rep.per_alpha[i] = std::move(est);
    }
  });
  std::vector<double> slopes;
  for (const auto& est : rep.per_alpha) slopes.push_back(est.slope);
  std::sort(slopes.begin(), slopes.end());
  const std::size_t m = slopes.size();
  rep.median = m % 2 ? slopes[m / 2] : 0.5 * (slopes[m / 2 - 1] + slopes[m / 2]);
  return rep;
}

IntervalUnion line_projection_image(const CellSet& cells, double slope) {
  if (!std::isfinite(slope)) throw InvalidInput("slope must be finite");
  std::vector<Interval> ivs;
  if (cells.empty()) return {};
  check_planar(cells, "line projection");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Box b = cells.cell_box(k);
    const double s0 = slope * b.lo[0], s1 = slope * b.hi[0];
    ivs.push_back({b.lo[1] - std::max(s0, s1), b.hi[1] - std::min(s0, s1)});
  }
  return IntervalUnion::from_intervals(std::move(ivs));
}

}  // namespace favard
