#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace favard {

// A point in the plane or in space. Unused trailing coordinates are zero.
struct Point {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  int dim = 2;

  static Point xy(double a, double b);
  static Point xyz(double a, double b, double c);

  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  bool operator==(const Point&) const = default;
};

double distance(const Point& a, const Point& b);

// Axis-aligned box [lo, hi] (closed). Degenerate extents are allowed.
struct Box {
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{0.0, 0.0, 0.0};
  int dim = 2;

  static Box square(double x0, double y0, double x1, double y1);
  static Box cube(double x0, double y0, double z0, double x1, double y1, double z1);

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;
  Point center() const;
  bool contains(const Point& p, double tol = 0.0) const;
  double distance_to(const Point& p) const;
  Box expanded(double r) const;
};

double distance(const Box& a, const Box& b);
Box bounding_union(const Box& a, const Box& b);

using CellIndex = std::array<std::int64_t, 3>;

// Finite union of congruent axis-aligned squares (dim 2) or cubes (dim 3).
// Cell k occupies [index_k * side, (index_k + 1) * side] on every axis, so
// anchors are exact integer multiples of the side. Indices are kept sorted
// and distinct.
class CellSet {
 public:
  CellSet() = default;
  CellSet(int dim, double side, std::vector<CellIndex> indices = {});

  int dim() const { return dim_; }
  double side() const { return side_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const std::vector<CellIndex>& indices() const { return indices_; }

  Point anchor(std::size_t k) const;
  Point center(std::size_t k) const;
  Box cell_box(std::size_t k) const;
  // Bounding box of all cells. Throws on an empty set.
  Box bounds() const;
  double measure() const;
  bool contains(const CellIndex& idx) const;

 private:
  int dim_ = 2;
  double side_ = 1.0;
  std::vector<CellIndex> indices_;
};

// True when every cell of `inner` lies inside a cell of `outer`.
// The two sides must differ by an integer factor (either way round).
bool is_subset(const CellSet& inner, const CellSet& outer);

// Splits every cell into factor^dim congruent cells.
CellSet refine(const CellSet& cells, int factor);

// Rotates a planar cell set by quarter_turns * 90 degrees about the origin.
CellSet rotate_quarter_turns(const CellSet& cells, int quarter_turns);

// Cells of the given side whose centers lie in the closed box / disk.
CellSet box_cells(const Box& box, double side);
CellSet disk_cells(const Point& center, double radius, double side);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Canonical union of closed intervals: sorted, disjoint, and with
// overlapping or touching intervals merged.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  static IntervalUnion from_intervals(std::vector<Interval> intervals);

  // Inserts one interval in place. Rejects non-finite or reversed input.
  void insert(Interval iv);

  const std::vector<Interval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }
  double measure() const;

 private:
  std::vector<Interval> intervals_;
};

IntervalUnion union_insert(IntervalUnion u, Interval iv);

// Union of arcs on the circle, stored as disjoint sorted intervals of [0, 2pi].
// Arcs crossing the 0/2pi seam are split into two pieces.
class ArcUnion {
 public:
  ArcUnion() = default;
  // Each arc is [start, end] in radians with end >= start; arcs of length
  // >= 2pi cover the full circle.
  static ArcUnion from_arcs(std::span<const Interval> arcs);

  const std::vector<Interval>& arcs() const { return arcs_.intervals(); }
  double measure() const;

 private:
  IntervalUnion arcs_;
};

// Planar occupancy grid; pixel (i, j) covers
// [origin.x + i*pitch, origin.x + (i+1)*pitch) x [origin.y + j*pitch, ...).
struct Raster {
  Point origin;
  double pitch = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> bitmap;

  bool at(int i, int j) const { return bitmap[static_cast<std::size_t>(j) * nx + i] != 0; }
  std::size_t occupied() const;
  double area() const { return static_cast<double>(occupied()) * pitch * pitch; }
};

// Pixel-center rasterization of a planar cell set on the global grid of the
// given pitch (pixel centers at (k + 1/2) * pitch).
Raster rasterize(const CellSet& cells, double pitch);

// Occupied-pixel (voxel) count times pitch^dim, using cell-center sampling on
// the global grid. Exact for cells aligned with the grid.
double raster_area(const CellSet& cells, double pitch);

// Cell overapproximation of the closed Euclidean r-neighborhood. The output
// side is side / 2^k for the smallest k >= 0 with side / 2^k <= r / refine;
// a cell is kept when its distance to some input cell is at most r.
CellSet dilate(const CellSet& cells, double r, int refine = 4);

// Rasterized area of E + Gamma, where Gamma is given by sample points spaced
// at most `pitch` apart and E is a planar cell set.
double minkowski_sum_raster(const CellSet& cells, std::span<const Point> curve_samples, double pitch);

// Heights of a graph surface z = g(x, y) sampled on a regular grid;
// NaN marks grid nodes outside the surface's domain.
struct HeightGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double spacing = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> z;

  double at(int i, int j) const { return z[static_cast<std::size_t>(j) * nx + i]; }
};

// Voxelized volume of E + Gamma for a cell set in space and a sampled graph
// surface. Grid spacing must not exceed the pitch.
double minkowski_sum_raster_3d(const CellSet& cells, const HeightGrid& surface, double pitch);

}  // namespace favard
