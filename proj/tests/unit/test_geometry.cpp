#include <doctest.h>

#include <cmath>
#include <numbers>
#include <queue>
#include <set>

#include "favard/errors.hpp"
#include "favard/geometry.hpp"
#include "favard/rng.hpp"

using namespace favard;

namespace {

CellSet unit_square() { return CellSet(2, 1.0, {{0, 0, 0}}); }

CellSet k1_cells() { return CellSet(2, 0.25, {{0, 0, 0}, {3, 0, 0}, {0, 3, 0}, {3, 3, 0}}); }

bool covers_point(const CellSet& cells, double x, double y) {
  const auto i = static_cast<std::int64_t>(std::floor(x / cells.side()));
  const auto j = static_cast<std::int64_t>(std::floor(y / cells.side()));
  return cells.contains({i, j, 0});
}

double distance_to_cells(const CellSet& cells, const Point& p) {
  double best = INFINITY;
  for (std::size_t k = 0; k < cells.size(); ++k) best = std::min(best, cells.cell_box(k).distance_to(p));
  return best;
}

bool is_connected(const CellSet& cells) {
  if (cells.empty()) return true;
  std::set<CellIndex> seen{cells.indices().front()};
  std::queue<CellIndex> todo;
  todo.push(cells.indices().front());
  while (!todo.empty()) {
    auto c = todo.front();
    todo.pop();
    for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      CellIndex n{c[0] + dx, c[1] + dy, 0};
      if (cells.contains(n) && seen.insert(n).second) todo.push(n);
    }
  }
  return seen.size() == cells.size();
}

CellSet random_cells(CounterRng& rng, int count, int span) {
  std::vector<CellIndex> idx;
  for (int k = 0; k < count; ++k)
    idx.push_back({static_cast<std::int64_t>(rng.next() % span), static_cast<std::int64_t>(rng.next() % span), 0});
  return CellSet(2, 1.0 / span, idx);
}

std::vector<Point> segment_samples(Point a, Point b, double spacing) {
  const double len = distance(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
  std::vector<Point> out;
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    out.push_back(Point::xy(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])));
  }
  return out;
}

}  // namespace

TEST_CASE("points and boxes validate input") {
  CHECK_THROWS_AS(Point::xy(NAN, 0.0), InvalidInput);
  CHECK_THROWS_AS(Point::xyz(0.0, INFINITY, 0.0), InvalidInput);
  CHECK(distance(Point::xy(0, 0), Point::xy(3, 4)) == doctest::Approx(5.0));
  CHECK_THROWS_AS(Box::square(1, 0, 0, 1), InvalidInput);
  const Box b = Box::square(0, 0, 1, 2);
  CHECK(b.volume() == doctest::Approx(2.0));
  CHECK(b.distance_to(Point::xy(4, 6)) == doctest::Approx(5.0));
  CHECK(distance(Box::square(0, 0, 1, 1), Box::square(4, 5, 6, 6)) == doctest::Approx(5.0));
}

TEST_CASE("cell sets are canonical") {
  CellSet c(2, 0.5, {{1, 0, 7}, {0, 0, 0}, {1, 0, 0}});
  CHECK(c.size() == 2);
  CHECK(c.measure() == doctest::Approx(0.5));
  CHECK(c.anchor(1) == Point::xy(0.5, 0.0));
  CHECK_THROWS_AS(CellSet(4, 1.0), InvalidInput);
  CHECK_THROWS_AS(CellSet(2, 0.0), InvalidInput);
  CHECK_THROWS_AS(CellSet(2, 1.0).bounds(), InvalidInput);
  const Box b = k1_cells().bounds();
  CHECK(b.lo[0] == 0.0);
  CHECK(b.hi[1] == 1.0);
}

TEST_CASE("refine, subset and rotation") {
  const CellSet k1 = k1_cells();
  const CellSet fine = refine(k1, 4);
  CHECK(fine.size() == 64);
  CHECK(fine.measure() == doctest::Approx(k1.measure()));
  CHECK(is_subset(fine, k1));
  CHECK_FALSE(is_subset(unit_square(), k1));
  CHECK_THROWS_AS(is_subset(CellSet(2, 0.3, {{0, 0, 0}}), k1), InvalidInput);
  const CellSet rot = rotate_quarter_turns(k1, 1);
  CHECK(rot.measure() == doctest::Approx(k1.measure()));
  CHECK(rot.bounds().lo[0] == -1.0);
  CHECK(rotate_quarter_turns(k1, 4).indices() == k1.indices());
}

TEST_CASE("box and disk cell constructors") {
  CHECK(box_cells(Box::square(0, 0, 1, 1), 0.25).size() == 16);
  const CellSet disk = disk_cells(Point::xy(0, 0), 1.0, 1.0 / 64);
  CHECK(disk.measure() == doctest::Approx(std::numbers::pi).epsilon(0.01));
  const CellSet ball = disk_cells(Point::xyz(0, 0, 0), 1.0, 1.0 / 32);
  CHECK(ball.measure() == doctest::Approx(4.0 / 3.0 * std::numbers::pi).epsilon(0.01));
}

TEST_CASE("union_insert examples") {
  IntervalUnion u;
  u = union_insert(u, {0, 1});
  CHECK(u.intervals() == std::vector<Interval>{{0, 1}});
  CHECK(u.measure() == 1.0);
  u = union_insert(u, {0.5, 2});
  CHECK(u.intervals() == std::vector<Interval>{{0, 2}});
  CHECK(u.measure() == 2.0);

  IntervalUnion v = IntervalUnion::from_intervals({{0, 1}, {2, 3}});
  v = union_insert(v, {0.9, 2.1});
  CHECK(v.intervals() == std::vector<Interval>{{0, 3}});
  CHECK(v.measure() == 3.0);

  CHECK_THROWS_AS(union_insert(v, {NAN, 1}), InvalidInput);
  CHECK_THROWS_AS(union_insert(v, {0, INFINITY}), InvalidInput);
  CHECK_THROWS_AS(union_insert(v, {2, 1}), InvalidInput);
}

TEST_CASE("touching intervals merge") {
  auto u = IntervalUnion::from_intervals({{0, 1}, {1, 2}, {5, 6}});
  CHECK(u.size() == 2);
  u.insert({6, 7});
  CHECK(u.intervals().back() == Interval{5, 7});
}

TEST_CASE("interval union measure matches a brute-force indicator") {
  CounterRng rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    IntervalUnion u;
    std::vector<Interval> raw;
    double prev = 0.0;
    for (int k = 0; k < 30; ++k) {
      const double a = rng.uniform(0.0, 10.0);
      const Interval iv{a, a + rng.uniform(0.0, 0.8)};
      raw.push_back(iv);
      u.insert(iv);
      CHECK(u.measure() >= prev - 1e-12);
      prev = u.measure();
      for (std::size_t i = 1; i < u.size(); ++i) CHECK(u.intervals()[i - 1].hi < u.intervals()[i].lo);
    }
    const double pitch = 1e-4;
    double brute = 0.0;
    for (double x = 0.5 * pitch; x < 11.0; x += pitch) {
      bool hit = false;
      for (const auto& iv : raw) hit = hit || (x >= iv.lo && x <= iv.hi);
      brute += hit ? pitch : 0.0;
    }
    CHECK(std::abs(brute - u.measure()) <= pitch * 2 * static_cast<double>(raw.size()));
    CHECK(u.intervals() == IntervalUnion::from_intervals(raw).intervals());
  }
}

TEST_CASE("arc unions split at the seam") {
  const double pi = std::numbers::pi;
  std::vector<Interval> arcs{{-0.5, 0.5}, {pi, pi + 0.25}};
  const ArcUnion u = ArcUnion::from_arcs(arcs);
  CHECK(u.arcs().size() == 3);
  CHECK(u.measure() == doctest::Approx(1.25));
  std::vector<Interval> full{{1.0, 1.0 + 7.0}};
  CHECK(ArcUnion::from_arcs(full).measure() == doctest::Approx(2 * pi));
  std::vector<Interval> wrap{{6.0, 7.0}, {0.0, 0.3}};
  CHECK(ArcUnion::from_arcs(wrap).measure() == doctest::Approx(1.0));
}

TEST_CASE("raster_area examples") {
  CHECK(raster_area(unit_square(), 1.0 / 64) == 1.0);
  CHECK(raster_area(k1_cells(), 1.0 / 64) == 0.25);
  CHECK(raster_area(CellSet(2, 1.0), 1.0 / 64) == 0.0);
  CHECK_THROWS_AS(raster_area(unit_square(), 0.0), InvalidInput);
  CHECK_THROWS_AS(raster_area(unit_square(), -1.0), InvalidInput);
  CHECK_THROWS_AS(raster_area(k1_cells(), 0.5), InvalidInput);
  CHECK(raster_area(CellSet(3, 0.5, {{0, 0, 0}, {1, 1, 1}}), 1.0 / 8) == 0.25);
}

TEST_CASE("raster_area is stable under pitch halving on dyadic input") {
  const CellSet fine = refine(k1_cells(), 2);
  for (int k = 0; k < 4; ++k) CHECK(raster_area(fine, fine.side() / (1 << k)) == fine.measure());
  const Raster r = rasterize(fine, fine.side() / 4);
  CHECK(r.area() == fine.measure());
}

TEST_CASE("dilate of a unit square matches the tube formula bracket") {
  const double r = 0.25;
  const CellSet d = dilate(unit_square(), r);
  CHECK(d.side() <= r / 4);
  CHECK(d.side() <= 1.0);
  const double area = d.measure();
  CHECK(area >= 1 + 4 * r + std::numbers::pi * r * r);
  CHECK(area <= std::pow(1 + 2 * 0.3 * std::sqrt(2.0), 2));
  CHECK(dilate(CellSet(2, 1.0), 0.3).empty());
  CHECK_THROWS_AS(dilate(unit_square(), 0.0), InvalidInput);
  CHECK_THROWS_AS(dilate(unit_square(), -1.0), InvalidInput);
}

TEST_CASE("dilate of two touching squares") {
  const double r = 0.1;
  const CellSet d = dilate(CellSet(2, 1.0, {{0, 0, 0}, {1, 0, 0}}), r);
  CHECK(is_connected(d));
  const double exact = 2 + 6 * r + std::numbers::pi * r * r;
  CHECK(d.measure() == doctest::Approx(exact).epsilon(0.05));
}

TEST_CASE("dilate covers the neighborhood and stays within the containment radius") {
  CounterRng rng(5, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const CellSet e = random_cells(rng, 6, 16);
    const double r = rng.uniform(0.02, 0.2);
    const CellSet d = dilate(e, r);
    for (std::size_t k = 0; k < d.size(); ++k)
      CHECK(distance_to_cells(e, d.center(k)) <= r * std::sqrt(2.0) + 2 * e.side());
    const Box b = e.bounds().expanded(r);
    for (int s = 0; s < 2000; ++s) {
      const Point p = Point::xy(rng.uniform(b.lo[0], b.hi[0]), rng.uniform(b.lo[1], b.hi[1]));
      if (distance_to_cells(e, p) <= r) CHECK(covers_point(d, p[0], p[1]));
    }
  }
}

TEST_CASE("dilate is monotone and composes") {
  CounterRng rng(9, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const CellSet small = random_cells(rng, 5, 8);
    std::vector<CellIndex> more = small.indices();
    for (const auto& c : random_cells(rng, 5, 8).indices()) more.push_back(c);
    const CellSet big(2, small.side(), more);
    const double r = 0.1, r2 = 0.07;
    CHECK(is_subset(dilate(small, r), dilate(big, r)));

    const CellSet twice = dilate(dilate(small, r), r2);
    const Box b = small.bounds().expanded(r + r2);
    for (int s = 0; s < 2000; ++s) {
      const Point p = Point::xy(rng.uniform(b.lo[0], b.hi[0]), rng.uniform(b.lo[1], b.hi[1]));
      if (distance_to_cells(small, p) <= r + r2) CHECK(covers_point(twice, p[0], p[1]));
    }
  }
}

TEST_CASE("minkowski_sum_raster examples") {
  const double pitch = 1.0 / 256;
  const std::vector<Point> origin{Point::xy(0, 0)};
  CHECK(minkowski_sum_raster(unit_square(), origin, pitch) == doctest::Approx(1.0).epsilon(2 * pitch));

  const auto seg = segment_samples(Point::xy(0, 0), Point::xy(1, 0), pitch);
  CHECK(minkowski_sum_raster(unit_square(), seg, pitch) == doctest::Approx(2.0).epsilon(2 * pitch));

  const CellSet speck(2, 1e-9, {{0, 0, 0}});
  double prev = INFINITY;
  for (double p : {1.0 / 64, 1.0 / 256, 1.0 / 1024}) {
    const double a = minkowski_sum_raster(speck, segment_samples(Point::xy(0, 0), Point::xy(1, 0), p), p);
    CHECK(a <= 2 * p);
    CHECK(a <= prev);
    prev = a;
  }
  CHECK_THROWS_AS(minkowski_sum_raster(unit_square(), std::vector<Point>{}, pitch), InvalidInput);
  CHECK(minkowski_sum_raster(CellSet(2, 1.0), origin, pitch) == 0.0);
}

TEST_CASE("minkowski sum of a square and a diagonal segment") {
  // Unit square + segment to (1, 1): hexagon of area 1 + 2 * (1/2 + 1/2) = 3.
  const double pitch = 1.0 / 512;
  const auto seg = segment_samples(Point::xy(0, 0), Point::xy(1, 1), pitch);
  CHECK(minkowski_sum_raster(unit_square(), seg, pitch) == doctest::Approx(3.0).epsilon(0.01));
  // A curve steeper than the cell side forces the per-sample path.
  const CellSet thin(2, 1.0 / 64, {{0, 0, 0}});
  const auto steep = segment_samples(Point::xy(0, 0), Point::xy(0.01, 1), pitch / 8);
  const double area = minkowski_sum_raster(thin, steep, pitch / 8);
  CHECK(area == doctest::Approx((1.0 / 64) * (1 + 1.0 / 64)).epsilon(0.05));
}

TEST_CASE("minkowski_sum_raster_3d examples") {
  const CellSet cube(3, 1.0, {{0, 0, 0}});
  HeightGrid point{0.0, 0.0, 1.0 / 16, 1, 1, {0.0}};
  CHECK(minkowski_sum_raster_3d(cube, point, 1.0 / 16) == doctest::Approx(1.0));
  HeightGrid plane{0.0, 0.0, 1.0 / 16, 17, 17, std::vector<double>(17 * 17, 0.0)};
  CHECK(minkowski_sum_raster_3d(cube, plane, 1.0 / 16) == doctest::Approx(4.0).epsilon(0.07));
  plane.z[0] = NAN;
  CHECK(minkowski_sum_raster_3d(cube, plane, 1.0 / 16) == doctest::Approx(4.0).epsilon(0.07));
  CHECK_THROWS_AS(minkowski_sum_raster_3d(cube, plane, 1.0 / 32), InvalidInput);
  CHECK_THROWS_AS(minkowski_sum_raster_3d(unit_square(), point, 1.0 / 16), InvalidInput);
}
