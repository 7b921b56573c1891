#include "favard/transversality.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "favard/errors.hpp"
#include "favard/parallel.hpp"
#include "favard/rng.hpp"

namespace favard {

namespace {

constexpr double kPi = std::numbers::pi;

Point sample_in(const ProjectionFamily& fam, CounterRng& rng) {
  const Box dom = fam.domain();
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Point p;
    p.dim = dom.dim;
    for (int k = 0; k < dom.dim; ++k) p.x[k] = rng.uniform(dom.lo[k], dom.hi[k]);
    if (fam.in_domain(p)) return p;
  }
  throw NumericalError("could not sample a point of the domain of " + fam.name());
}

// |map(alpha, x) - map(alpha, y)| / |x - y| at stratified parameters.
std::vector<double> pair_ratios(const ProjectionFamily& fam, const Point& x, const Point& y, int psi_samples,
                                CounterRng& rng) {
  const double dist = distance(x, y);
  std::vector<double> out;
  auto eval = [&](const double* u) {
    const Param alpha = fam.param_at(std::span<const double>(u, 2));
    out.push_back(fam.image_distance(fam.map(alpha, x), fam.map(alpha, y)) / dist);
  };
  if (fam.param_dim() == 1) {
    out.reserve(psi_samples);
    for (int k = 0; k < psi_samples; ++k) {
      const double u[2] = {(k + rng.uniform()) / psi_samples, 0.0};
      eval(u);
    }
  } else {
    const int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(psi_samples))));
    out.reserve(static_cast<std::size_t>(g) * g);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        const double u[2] = {(i + rng.uniform()) / g, (j + rng.uniform()) / g};
        eval(u);
      }
  }
  return out;
}

BadSetEstimate summarize(std::size_t count, std::size_t total) {
  const double n = static_cast<double>(total);
  const double shifted = (static_cast<double>(count) + 1.0) / (n + 2.0);
  return {static_cast<double>(count) / n, std::sqrt(shifted * (1.0 - shifted) / n), static_cast<int>(total)};
}

void check_inputs(double s, const std::vector<double>& deltas, int psi_samples) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("transversality exponent must be positive");
  if (deltas.empty()) throw InvalidInput("delta grid must be non-empty");
  for (double d : deltas)
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidInput("deltas must be positive and finite");
  if (psi_samples < 1) throw InvalidInput("psi_samples must be >= 1");
}

}  // namespace

BadSetEstimate bad_set_measure(const ProjectionFamily& fam, const Point& x, const Point& y, double delta,
                               int psi_samples, std::uint64_t seed, std::uint64_t stream) {
  check_inputs(1.0, {delta}, psi_samples);
  if (!(distance(x, y) > 0.0)) throw InvalidInput("bad-set measure needs distinct points");
  CounterRng rng(seed, stream);
  const auto r = pair_ratios(fam, x, y, psi_samples, rng);
  const auto count = static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [&](double v) { return v <= delta; }));
  return summarize(count, r.size());
}

TransversalityReport transversality_estimate(const ProjectionFamily& fam, double s, const std::vector<double>& deltas,
                                             int pairs, int psi_samples, std::uint64_t seed) {
  check_inputs(s, deltas, psi_samples);
  if (pairs < 1) throw InvalidInput("pairs must be >= 1");
  const std::size_t nd = deltas.size();
  struct PairResult {
    Point x, y;
    std::vector<std::size_t> counts;
    std::size_t total = 0;
  };
  std::vector<PairResult> results(pairs);
  parallel::for_chunks(pairs, 16, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng(seed, i);
      auto& res = results[i];
      res.x = sample_in(fam, rng);
      do res.y = sample_in(fam, rng);
      while (!(distance(res.x, res.y) > 1e-12));
      std::vector<double> r;
      try {
        r = pair_ratios(fam, res.x, res.y, psi_samples, rng);
      } catch (const DomainError& err) {
        throw DomainError("transversality pair " + std::to_string(i) + ": " + err.what());
      }
      res.total = r.size();
      res.counts.assign(nd, 0);
      for (double v : r)
        for (std::size_t d = 0; d < nd; ++d)
          if (v <= deltas[d]) ++res.counts[d];
    }
  });

  TransversalityReport rep;
  rep.s = s;
  rep.m = fam.codomain_dim();
  rep.deltas = deltas;
  rep.pair_count = pairs;
  rep.psi_samples = static_cast<int>(results.front().total);
  rep.seed = seed;
  rep.per_delta.resize(nd);
  for (std::size_t d = 0; d < nd; ++d) rep.per_delta[d].delta = deltas[d];
  for (const auto& res : results) {
    const double dist = distance(res.x, res.y);
    for (std::size_t d = 0; d < nd; ++d) {
      const BadSetEstimate est = summarize(res.counts[d], res.total);
      const double ratio = est.estimate / (std::pow(deltas[d], rep.m) * std::pow(dist, rep.m - s));
      auto& sum = rep.per_delta[d];
      sum.mean_ratio += ratio / pairs;
      sum.mean_estimate += est.estimate / pairs;
      sum.mean_std_error += est.std_error / pairs;
      sum.worst_ratio = std::max(sum.worst_ratio, ratio);
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_pair = {res.x, res.y, deltas[d], est.estimate, est.std_error, ratio};
      }
    }
  }
  if (!std::isfinite(rep.worst_ratio)) throw NumericalError("transversality ratio is not finite");
  return rep;
}

double tube_measure(const Vantage& vantage, const Point& p, const Point& q, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("tube width must be positive");
  const int n = vantage.ambient_dim();
  double dir[3] = {q[0] - p[0], q[1] - p[1], n == 3 ? q[2] - p[2] : 0.0};
  const double len = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
  if (!(len > 0.0)) throw InvalidInput("tube needs two distinct points");
  for (double& c : dir) c /= len;

  if (vantage.kind == Vantage::Kind::Segment) {
    const double nx = -dir[1], ny = dir[0];
    const double g0 = (vantage.a[0] - p[0]) * nx + (vantage.a[1] - p[1]) * ny;
    const double g1 = (vantage.b[0] - p[0]) * nx + (vantage.b[1] - p[1]) * ny;
    double t0 = 0.0, t1 = 1.0;
    if (g0 == g1) {
      if (std::abs(g0) > delta) return 0.0;
    } else {
      double e0 = (-delta - g0) / (g1 - g0), e1 = (delta - g0) / (g1 - g0);
      if (e0 > e1) std::swap(e0, e1);
      t0 = std::max(t0, e0);
      t1 = std::min(t1, e1);
    }
    return t1 > t0 ? (t1 - t0) * vantage.measure() : 0.0;
  }

  const double R = vantage.radius;
  if (vantage.kind == Vantage::Kind::Circle) {
    const double nx = -dir[1], ny = dir[0];
    const double dc = (vantage.center[0] - p[0]) * nx + (vantage.center[1] - p[1]) * ny;
    const double lo = std::clamp((-delta - dc) / R, -1.0, 1.0), hi = std::clamp((delta - dc) / R, -1.0, 1.0);
    return 2.0 * R * (std::acos(lo) - std::acos(hi));
  }

  // Sphere: with z the coordinate along the line through the center, the
  // slice at z is a circle of radius sqrt(R^2 - z^2) whose center sits at
  // distance e from the line, and dA = R dz dtheta.
  double w[3];
  for (int k = 0; k < 3; ++k) w[k] = vantage.center[k] - p[k];
  const double along = w[0] * dir[0] + w[1] * dir[1] + w[2] * dir[2];
  double e2 = 0.0;
  for (int k = 0; k < 3; ++k) e2 += (w[k] - along * dir[k]) * (w[k] - along * dir[k]);
  const double e = std::sqrt(e2);
  auto theta = [&](double z) {
    const double rho2 = std::max(0.0, R * R - z * z);
    const double rho = std::sqrt(rho2);
    if (e == 0.0 || rho == 0.0) return std::sqrt(e2 + rho2) <= delta ? 2.0 * kPi : 0.0;
    const double c = (delta * delta - e2 - rho2) / (2.0 * e * rho);
    if (c >= 1.0) return 2.0 * kPi;
    if (c <= -1.0) return 0.0;
    return 2.0 * kPi - 2.0 * std::acos(c);
  };
  const double rho_max = e + delta, rho_min = std::max(0.0, e - delta);
  const double z_lo = std::sqrt(std::max(0.0, R * R - rho_max * rho_max));
  const double z_hi = std::sqrt(std::max(0.0, R * R - rho_min * rho_min));
  if (!(z_hi > z_lo)) return 0.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double integral = integrator.integrate(theta, z_lo, z_hi);
  return 2.0 * R * integral;
}

TubeReport tube_condition_check(const Vantage& vantage, const Box& visible_box, const std::vector<double>& deltas,
                                int lines, std::uint64_t seed) {
  if (lines < 1) throw InvalidInput("lines must be >= 1");
  if (deltas.empty()) throw InvalidInput("delta grid must be non-empty");
  for (double d : deltas)
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidInput("deltas must be positive and finite");
  if (vantage.ambient_dim() != visible_box.dim) throw InvalidInput("vantage and visible box dimensions differ");
  if (!(vantage.distance_to(visible_box) > 0.0)) throw InvalidInput("vantage set meets the visible box");
  const int n = vantage.ambient_dim();
  bool all_flat = true;
  for (int k = 0; k < n; ++k) all_flat = all_flat && visible_box.extent(k) == 0.0;
  if (all_flat) throw InvalidInput("visible box is a single point");

  const std::size_t nd = deltas.size();
  std::vector<std::vector<double>> ratios(lines, std::vector<double>(nd));
  std::vector<std::pair<Point, Point>> ends(lines);
  parallel::for_chunks(lines, 16, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng(seed, i);
      auto draw = [&] {
        Point p;
        p.dim = n;
        for (int k = 0; k < n; ++k) p.x[k] = rng.uniform(visible_box.lo[k], visible_box.hi[k]);
        return p;
      };
      Point p = draw(), q = draw();
      while (!(distance(p, q) > 1e-12)) q = draw();
      ends[i] = {p, q};
      for (std::size_t d = 0; d < nd; ++d)
        ratios[i][d] = tube_measure(vantage, p, q, deltas[d]) / std::pow(deltas[d], n - 1);
    }
  });

  TubeReport rep;
  rep.deltas = deltas;
  rep.lines = lines;
  rep.seed = seed;
  rep.max_ratio.assign(nd, 0.0);
  for (int i = 0; i < lines; ++i)
    for (std::size_t d = 0; d < nd; ++d) {
      rep.max_ratio[d] = std::max(rep.max_ratio[d], ratios[i][d]);
      if (ratios[i][d] > rep.worst_ratio) {
        rep.worst_ratio = ratios[i][d];
        rep.worst_delta = deltas[d];
        rep.worst_p = ends[i].first;
        rep.worst_q = ends[i].second;
      }
    }
  const auto [imin, imax] = std::minmax_element(deltas.begin(), deltas.end());
  const double decades = std::log10(*imax / *imin);
  if (decades > 0.0) {
    const double small = rep.max_ratio[imin - deltas.begin()], large = rep.max_ratio[imax - deltas.begin()];
    rep.growth_per_decade = large > 0.0 ? std::pow(small / large, 1.0 / decades) : (small > 0.0 ? INFINITY : 1.0);
  }
  rep.holds = rep.growth_per_decade < 3.0;
  return rep;
}

}  // namespace favard
