#include "favard/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "favard/errors.hpp"
#include "favard/parallel.hpp"

namespace favard {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " must be finite");
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Half-open pixel range [first, last) whose centers (k + 1/2) * pitch lie in [lo, hi).
std::pair<std::int64_t, std::int64_t> centers_in(double lo, double hi, double pitch) {
  auto first = static_cast<std::int64_t>(std::ceil(lo / pitch - 0.5));
  auto last = static_cast<std::int64_t>(std::ceil(hi / pitch - 0.5));
  return {first, std::max(first, last)};
}

// Closed version: centers lying in [lo, hi].
std::pair<std::int64_t, std::int64_t> centers_in_closed(double lo, double hi, double pitch) {
  auto first = static_cast<std::int64_t>(std::ceil(lo / pitch - 0.5));
  auto last = static_cast<std::int64_t>(std::floor(hi / pitch - 0.5)) + 1;
  return {first, std::max(first, last)};
}

}  // namespace

Point Point::xy(double a, double b) {
  require_finite(a, "point coordinate");
  require_finite(b, "point coordinate");
  return Point{{a, b, 0.0}, 2};
}

Point Point::xyz(double a, double b, double c) {
  require_finite(a, "point coordinate");
  require_finite(b, "point coordinate");
  require_finite(c, "point coordinate");
  return Point{{a, b, c}, 3};
}

double distance(const Point& a, const Point& b) {
  const double dx = a.x[0] - b.x[0], dy = a.x[1] - b.x[1], dz = a.x[2] - b.x[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Box Box::square(double x0, double y0, double x1, double y1) {
  for (double v : {x0, y0, x1, y1}) require_finite(v, "box corner");
  if (x1 < x0 || y1 < y0) throw InvalidInput("box corners out of order");
  return Box{{x0, y0, 0.0}, {x1, y1, 0.0}, 2};
}

Box Box::cube(double x0, double y0, double z0, double x1, double y1, double z1) {
  for (double v : {x0, y0, z0, x1, y1, z1}) require_finite(v, "box corner");
  if (x1 < x0 || y1 < y0 || z1 < z0) throw InvalidInput("box corners out of order");
  return Box{{x0, y0, z0}, {x1, y1, z1}, 3};
}

double Box::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= extent(a);
  return v;
}

Point Box::center() const {
  Point p;
  p.dim = dim;
  for (int a = 0; a < dim; ++a) p.x[a] = 0.5 * (lo[a] + hi[a]);
  return p;
}

bool Box::contains(const Point& p, double tol) const {
  for (int a = 0; a < dim; ++a)
    if (p.x[a] < lo[a] - tol || p.x[a] > hi[a] + tol) return false;
  return true;
}

double Box::distance_to(const Point& p) const {
  double acc = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double g = std::max({0.0, lo[a] - p.x[a], p.x[a] - hi[a]});
    acc += g * g;
  }
  return std::sqrt(acc);
}

Box Box::expanded(double r) const {
  Box b = *this;
  for (int a = 0; a < dim; ++a) {
    b.lo[a] -= r;
    b.hi[a] += r;
  }
  return b;
}

double distance(const Box& a, const Box& b) {
  double acc = 0.0;
  const int dim = std::max(a.dim, b.dim);
  for (int k = 0; k < dim; ++k) {
    const double g = std::max({0.0, a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]});
    acc += g * g;
  }
  return std::sqrt(acc);
}

Box bounding_union(const Box& a, const Box& b) {
  Box u = a;
  u.dim = std::max(a.dim, b.dim);
  for (int k = 0; k < 3; ++k) {
    u.lo[k] = std::min(a.lo[k], b.lo[k]);
    u.hi[k] = std::max(a.hi[k], b.hi[k]);
  }
  return u;
}

CellSet::CellSet(int dim, double side, std::vector<CellIndex> indices)
    : dim_(dim), side_(side), indices_(std::move(indices)) {
  if (dim != 2 && dim != 3) throw InvalidInput("cell set dimension must be 2 or 3");
  if (!(side > 0.0) || !std::isfinite(side)) throw InvalidInput("cell side must be positive and finite");
  if (dim == 2)
    for (auto& idx : indices_) idx[2] = 0;
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

Point CellSet::anchor(std::size_t k) const {
  Point p;
  p.dim = dim_;
  for (int a = 0; a < dim_; ++a) p.x[a] = static_cast<double>(indices_[k][a]) * side_;
  return p;
}

Point CellSet::center(std::size_t k) const {
  Point p;
  p.dim = dim_;
  for (int a = 0; a < dim_; ++a) p.x[a] = (static_cast<double>(indices_[k][a]) + 0.5) * side_;
  return p;
}

Box CellSet::cell_box(std::size_t k) const {
  Box b;
  b.dim = dim_;
  for (int a = 0; a < dim_; ++a) {
    b.lo[a] = static_cast<double>(indices_[k][a]) * side_;
    b.hi[a] = static_cast<double>(indices_[k][a] + 1) * side_;
  }
  return b;
}

Box CellSet::bounds() const {
  if (indices_.empty()) throw InvalidInput("bounds of an empty cell set");
  CellIndex lo = indices_.front(), hi = indices_.front();
  for (const auto& idx : indices_)
    for (int a = 0; a < dim_; ++a) {
      lo[a] = std::min(lo[a], idx[a]);
      hi[a] = std::max(hi[a], idx[a]);
    }
  Box b;
  b.dim = dim_;
  for (int a = 0; a < dim_; ++a) {
    b.lo[a] = static_cast<double>(lo[a]) * side_;
    b.hi[a] = static_cast<double>(hi[a] + 1) * side_;
  }
  return b;
}

double CellSet::measure() const {
  return static_cast<double>(indices_.size()) * std::pow(side_, dim_);
}

bool CellSet::contains(const CellIndex& idx) const {
  CellIndex key = idx;
  if (dim_ == 2) key[2] = 0;
  return std::binary_search(indices_.begin(), indices_.end(), key);
}

bool is_subset(const CellSet& inner, const CellSet& outer) {
  if (inner.empty()) return true;
  if (inner.dim() != outer.dim()) throw InvalidInput("is_subset: dimension mismatch");
  const double ratio = outer.side() / inner.side();
  const double rounded = std::round(ratio);
  if (rounded < 1.0) {
    const double up = inner.side() / outer.side();
    const double up_rounded = std::round(up);
    if (std::abs(up - up_rounded) > 1e-9 * up || up_rounded > 1024.0)
      throw InvalidInput("is_subset: cell sides must be commensurate by an integer factor");
    return is_subset(refine(inner, static_cast<int>(up_rounded)), outer);
  }
  if (std::abs(ratio - rounded) > 1e-9 * ratio)
    throw InvalidInput("is_subset: cell sides must be commensurate by an integer factor");
  const auto q = static_cast<std::int64_t>(rounded);
  for (const auto& idx : inner.indices()) {
    CellIndex parent{0, 0, 0};
    for (int a = 0; a < inner.dim(); ++a) parent[a] = floor_div(idx[a], q);
    if (!outer.contains(parent)) return false;
  }
  return true;
}

CellSet refine(const CellSet& cells, int factor) {
  if (factor < 1) throw InvalidInput("refine factor must be >= 1");
  std::vector<CellIndex> out;
  const int dim = cells.dim();
  const std::int64_t f = factor;
  const std::int64_t fz = dim == 3 ? f : 1;
  out.reserve(cells.size() * static_cast<std::size_t>(f * f * fz));
  for (const auto& idx : cells.indices())
    for (std::int64_t k = 0; k < fz; ++k)
      for (std::int64_t j = 0; j < f; ++j)
        for (std::int64_t i = 0; i < f; ++i)
          out.push_back({idx[0] * f + i, idx[1] * f + j, dim == 3 ? idx[2] * f + k : 0});
  return CellSet(dim, cells.side() / factor, std::move(out));
}

CellSet rotate_quarter_turns(const CellSet& cells, int quarter_turns) {
  if (cells.dim() != 2) throw InvalidInput("rotation is defined for planar cell sets");
  const int q = ((quarter_turns % 4) + 4) % 4;
  std::vector<CellIndex> out;
  out.reserve(cells.size());
  for (auto idx : cells.indices()) {
    for (int t = 0; t < q; ++t) idx = {-idx[1] - 1, idx[0], 0};
    out.push_back(idx);
  }
  return CellSet(2, cells.side(), std::move(out));
}

CellSet box_cells(const Box& box, double side) {
  if (!(side > 0.0)) throw InvalidInput("cell side must be positive");
  std::array<std::pair<std::int64_t, std::int64_t>, 3> range{};
  for (int a = 0; a < 3; ++a) range[a] = {0, 1};
  for (int a = 0; a < box.dim; ++a) range[a] = centers_in_closed(box.lo[a], box.hi[a], side);
  std::vector<CellIndex> out;
  for (auto k = range[2].first; k < range[2].second; ++k)
    for (auto j = range[1].first; j < range[1].second; ++j)
      for (auto i = range[0].first; i < range[0].second; ++i) out.push_back({i, j, k});
  return CellSet(box.dim, side, std::move(out));
}

CellSet disk_cells(const Point& center, double radius, double side) {
  if (!(radius >= 0.0)) throw InvalidInput("radius must be non-negative");
  Box b;
  b.dim = center.dim;
  for (int a = 0; a < center.dim; ++a) {
    b.lo[a] = center.x[a] - radius;
    b.hi[a] = center.x[a] + radius;
  }
  const CellSet candidates = box_cells(b, side);
  std::vector<CellIndex> out;
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (distance(candidates.center(k), center) <= radius) out.push_back(candidates.indices()[k]);
  return CellSet(center.dim, side, std::move(out));
}

IntervalUnion IntervalUnion::from_intervals(std::vector<Interval> intervals) {
  for (const auto& iv : intervals) {
    require_finite(iv.lo, "interval endpoint");
    require_finite(iv.hi, "interval endpoint");
    if (iv.hi < iv.lo) throw InvalidInput("interval endpoints out of order");
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
  IntervalUnion u;
  for (const auto& iv : intervals) {
    if (!u.intervals_.empty() && iv.lo <= u.intervals_.back().hi)
      u.intervals_.back().hi = std::max(u.intervals_.back().hi, iv.hi);
    else
      u.intervals_.push_back(iv);
  }
  return u;
}

void IntervalUnion::insert(Interval iv) {
  require_finite(iv.lo, "interval endpoint");
  require_finite(iv.hi, "interval endpoint");
  if (iv.hi < iv.lo) throw InvalidInput("interval endpoints out of order");
  // First interval that could touch iv: hi >= iv.lo.
  auto first = std::lower_bound(intervals_.begin(), intervals_.end(), iv.lo,
                                [](const Interval& a, double v) { return a.hi < v; });
  auto last = first;
  while (last != intervals_.end() && last->lo <= iv.hi) {
    iv.lo = std::min(iv.lo, last->lo);
    iv.hi = std::max(iv.hi, last->hi);
    ++last;
  }
  first = intervals_.erase(first, last);
  intervals_.insert(first, iv);
}

double IntervalUnion::measure() const {
  double m = 0.0;
  for (const auto& iv : intervals_) m += iv.length();
  return m;
}

IntervalUnion union_insert(IntervalUnion u, Interval iv) {
  u.insert(iv);
  return u;
}

ArcUnion ArcUnion::from_arcs(std::span<const Interval> arcs) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<Interval> pieces;
  pieces.reserve(arcs.size() + 1);
  for (const auto& a : arcs) {
    require_finite(a.lo, "arc endpoint");
    require_finite(a.hi, "arc endpoint");
    if (a.hi < a.lo) throw InvalidInput("arc endpoints out of order");
    const double len = a.hi - a.lo;
    if (len >= two_pi) {
      pieces.push_back({0.0, two_pi});
      continue;
    }
    double start = std::fmod(a.lo, two_pi);
    if (start < 0.0) start += two_pi;
    if (start >= two_pi) start = 0.0;
    const double end = start + len;
    if (end <= two_pi) {
      pieces.push_back({start, end});
    } else {
      pieces.push_back({start, two_pi});
      pieces.push_back({0.0, end - two_pi});
    }
  }
  ArcUnion u;
  u.arcs_ = IntervalUnion::from_intervals(std::move(pieces));
  return u;
}

double ArcUnion::measure() const { return std::min(arcs_.measure(), 2.0 * std::numbers::pi); }

std::size_t Raster::occupied() const {
  return static_cast<std::size_t>(std::count(bitmap.begin(), bitmap.end(), std::uint8_t{1}));
}

Raster rasterize(const CellSet& cells, double pitch) {
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw InvalidInput("pitch must be positive");
  if (cells.dim() != 2) throw InvalidInput("rasterize expects a planar cell set");
  Raster r;
  r.pitch = pitch;
  if (cells.empty()) {
    r.origin = Point::xy(0.0, 0.0);
    return r;
  }
  const Box b = cells.bounds();
  const auto [i0, i1] = centers_in(b.lo[0], b.hi[0], pitch);
  const auto [j0, j1] = centers_in(b.lo[1], b.hi[1], pitch);
  r.origin = Point::xy(static_cast<double>(i0) * pitch, static_cast<double>(j0) * pitch);
  r.nx = static_cast<int>(i1 - i0);
  r.ny = static_cast<int>(j1 - j0);
  r.bitmap.assign(static_cast<std::size_t>(r.nx) * r.ny, 0);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Box c = cells.cell_box(k);
    const auto [a0, a1] = centers_in(c.lo[0], c.hi[0], pitch);
    const auto [c0, c1] = centers_in(c.lo[1], c.hi[1], pitch);
    for (auto j = c0; j < c1; ++j)
      for (auto i = a0; i < a1; ++i) r.bitmap[static_cast<std::size_t>(j - j0) * r.nx + (i - i0)] = 1;
  }
  return r;
}

double raster_area(const CellSet& cells, double pitch) {
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw InvalidInput("pitch must be positive");
  if (cells.empty()) return 0.0;
  if (pitch > cells.side()) throw InvalidInput("pitch must not exceed the cell side");
  // Half-open center ranges partition the axis, so disjoint cells never share a pixel.
  double count = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Box c = cells.cell_box(k);
    double per_cell = 1.0;
    for (int a = 0; a < cells.dim(); ++a) {
      const auto [p0, p1] = centers_in(c.lo[a], c.hi[a], pitch);
      per_cell *= static_cast<double>(p1 - p0);
    }
    count += per_cell;
  }
  return count * std::pow(pitch, cells.dim());
}

CellSet dilate(const CellSet& cells, double r, int refine_factor) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("dilation radius must be positive");
  if (refine_factor < 1) throw InvalidInput("refine factor must be >= 1");
  if (cells.empty()) return cells;
  const int dim = cells.dim();
  std::int64_t ratio = 1;
  double side = cells.side();
  while (side > r / refine_factor) {
    side *= 0.5;
    ratio *= 2;
    if (ratio > (std::int64_t{1} << 30)) throw ResourceError("dilation refinement too deep");
  }
  const auto reach = static_cast<std::int64_t>(std::ceil(r / side));
  const double r_cells2 = (r / side) * (r / side);

  std::vector<CellIndex> out;
  for (const auto& idx : cells.indices()) {
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      lo[a] = idx[a] * ratio;
      hi[a] = (idx[a] + 1) * ratio;  // exclusive
    }
    const std::int64_t k0 = dim == 3 ? lo[2] - reach : 0;
    const std::int64_t k1 = dim == 3 ? hi[2] + reach : 1;
    for (std::int64_t k = k0; k < k1; ++k) {
      const double gz = dim == 3 ? static_cast<double>(std::max<std::int64_t>({0, lo[2] - (k + 1), k - hi[2]})) : 0.0;
      for (std::int64_t j = lo[1] - reach; j < hi[1] + reach; ++j) {
        const double gy = static_cast<double>(std::max<std::int64_t>({0, lo[1] - (j + 1), j - hi[1]}));
        for (std::int64_t i = lo[0] - reach; i < hi[0] + reach; ++i) {
          const double gx = static_cast<double>(std::max<std::int64_t>({0, lo[0] - (i + 1), i - hi[0]}));
          if (gx * gx + gy * gy + gz * gz <= r_cells2) out.push_back({i, j, k});
        }
      }
    }
    if (out.size() > (std::size_t{1} << 26)) {
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      if (out.size() > (std::size_t{1} << 26)) throw ResourceError("dilation produces too many cells");
    }
  }
  return CellSet(dim, side, std::move(out));
}

namespace {

// Sparse table answering range-min / range-max queries in O(1).
class SparseTable {
 public:
  SparseTable(const std::vector<double>& v, bool take_max) : take_max_(take_max) {
    const std::size_t n = v.size();
    levels_.push_back(v);
    for (std::size_t w = 1; 2 * w <= n; w *= 2) {
      const auto& prev = levels_.back();
      std::vector<double> next(n - 2 * w + 1);
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = pick(prev[i], prev[i + w]);
      levels_.push_back(std::move(next));
    }
  }

  // Query over [b, e), e > b.
  double query(std::size_t b, std::size_t e) const {
    const std::size_t len = e - b;
    std::size_t lvl = 0;
    while ((std::size_t{2} << lvl) <= len) ++lvl;
    return pick(levels_[lvl][b], levels_[lvl][e - (std::size_t{1} << lvl)]);
  }

 private:
  double pick(double a, double b) const { return take_max_ ? std::max(a, b) : std::min(a, b); }
  bool take_max_;
  std::vector<std::vector<double>> levels_;
};

struct Run {
  double y0;
  double y1;
};

void mark_rows(std::vector<std::uint64_t>& bits, std::int64_t row0, double lo, double hi, double pitch) {
  auto [a, b] = centers_in_closed(lo, hi, pitch);
  a = std::max<std::int64_t>(a - row0, 0);
  b = std::min<std::int64_t>(b - row0, static_cast<std::int64_t>(bits.size() * 64));
  if (a >= b) return;
  auto wa = static_cast<std::size_t>(a / 64), wb = static_cast<std::size_t>((b - 1) / 64);
  const int ba = static_cast<int>(a % 64), bb = static_cast<int>((b - 1) % 64);
  const std::uint64_t head = ~std::uint64_t{0} << ba;
  const std::uint64_t tail = bb == 63 ? ~std::uint64_t{0} : ((std::uint64_t{1} << (bb + 1)) - 1);
  if (wa == wb) {
    bits[wa] |= head & tail;
    return;
  }
  bits[wa] |= head;
  for (std::size_t w = wa + 1; w < wb; ++w) bits[w] = ~std::uint64_t{0};
  bits[wb] |= tail;
}

}  // namespace

double minkowski_sum_raster(const CellSet& cells, std::span<const Point> curve_samples, double pitch) {
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw InvalidInput("pitch must be positive");
  if (curve_samples.empty()) throw InvalidInput("curve samples must be non-empty");
  if (cells.dim() != 2) throw InvalidInput("minkowski_sum_raster expects a planar cell set");
  if (cells.empty()) return 0.0;

  std::vector<std::pair<double, double>> pts;
  pts.reserve(curve_samples.size());
  for (const auto& p : curve_samples) {
    require_finite(p.x[0], "curve sample");
    require_finite(p.x[1], "curve sample");
    pts.emplace_back(p.x[0], p.x[1]);
  }
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t m = pts.size();
  std::vector<double> gx(m), gy(m), step(m > 1 ? m - 1 : 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    gx[k] = pts[k].first;
    gy[k] = pts[k].second;
    if (k + 1 < m) step[k] = std::abs(pts[k + 1].second - pts[k].second);
  }
  const SparseTable ymin(gy, false), ymax(gy, true), smax(step, true);

  // Column groups: cell x-index -> merged vertical runs.
  const double side = cells.side();
  std::map<std::int64_t, std::vector<Run>> groups;
  for (const auto& idx : cells.indices()) {
    auto& runs = groups[idx[0]];
    const double y0 = static_cast<double>(idx[1]) * side, y1 = static_cast<double>(idx[1] + 1) * side;
    if (!runs.empty() && runs.back().y1 >= y0)
      runs.back().y1 = y1;
    else
      runs.push_back({y0, y1});
  }

  const Box b = cells.bounds();
  const double gx_lo = gx.front(), gx_hi = gx.back();
  const double gy_lo = ymin.query(0, m), gy_hi = ymax.query(0, m);
  const auto [c0, c1] = centers_in_closed(b.lo[0] + gx_lo, b.hi[0] + gx_hi, pitch);
  const auto [row0, row1] = centers_in_closed(b.lo[1] + gy_lo, b.hi[1] + gy_hi, pitch);
  const auto words = static_cast<std::size_t>((row1 - row0 + 63) / 64);
  const auto columns = static_cast<std::size_t>(c1 - c0);

  const double count = parallel::sum(columns, 64, [&](std::size_t cb, std::size_t ce) {
    std::vector<std::uint64_t> bits(words);
    double local = 0.0;
    for (std::size_t c = cb; c < ce; ++c) {
      std::fill(bits.begin(), bits.end(), 0);
      const double px = (static_cast<double>(c0 + static_cast<std::int64_t>(c)) + 0.5) * pitch;
      // Cell x-indices i with [px - (i+1) side, px - i side] meeting [gx_lo, gx_hi].
      const auto i_lo = static_cast<std::int64_t>(std::ceil((px - gx_hi) / side)) - 1;
      const auto i_hi = static_cast<std::int64_t>(std::floor((px - gx_lo) / side));
      for (auto it = groups.lower_bound(i_lo); it != groups.end() && it->first <= i_hi; ++it) {
        const double x0 = static_cast<double>(it->first) * side;
        const double wlo = px - (x0 + side), whi = px - x0;
        const auto s0 = static_cast<std::size_t>(std::lower_bound(gx.begin(), gx.end(), wlo) - gx.begin());
        const auto s1 = static_cast<std::size_t>(std::upper_bound(gx.begin(), gx.end(), whi) - gx.begin());
        if (s0 >= s1) continue;
        const double lo = ymin.query(s0, s1), hi = ymax.query(s0, s1);
        const double jump = s1 - s0 > 1 ? smax.query(s0, s1 - 1) : 0.0;
        for (const auto& run : it->second) {
          if (jump <= run.y1 - run.y0) {
            mark_rows(bits, row0, run.y0 + lo, run.y1 + hi, pitch);
          } else {
            for (std::size_t s = s0; s < s1; ++s) mark_rows(bits, row0, run.y0 + gy[s], run.y1 + gy[s], pitch);
          }
        }
      }
      for (auto w : bits) local += static_cast<double>(std::popcount(w));
    }
    return local;
  });
  return count * pitch * pitch;
}

double minkowski_sum_raster_3d(const CellSet& cells, const HeightGrid& surface, double pitch) {
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw InvalidInput("pitch must be positive");
  if (cells.dim() != 3) throw InvalidInput("minkowski_sum_raster_3d expects a cell set in space");
  if (surface.nx < 1 || surface.ny < 1 ||
      surface.z.size() != static_cast<std::size_t>(surface.nx) * static_cast<std::size_t>(surface.ny))
    throw InvalidInput("height grid is malformed");
  if (!(surface.spacing > 0.0) || surface.spacing > pitch)
    throw InvalidInput("height grid spacing must be positive and not exceed the pitch");
  if (cells.empty()) return 0.0;

  double zlo = std::numeric_limits<double>::infinity(), zhi = -zlo;
  for (double z : surface.z)
    if (std::isfinite(z)) {
      zlo = std::min(zlo, z);
      zhi = std::max(zhi, z);
    }
  if (!std::isfinite(zlo)) throw InvalidInput("height grid has no defined nodes");

  const double side = cells.side();
  // Footprint (i, j) -> merged vertical runs.
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Run>> columns_of;
  for (const auto& idx : cells.indices()) {
    auto& runs = columns_of[{idx[0], idx[1]}];
    const double z0 = static_cast<double>(idx[2]) * side, z1 = static_cast<double>(idx[2] + 1) * side;
    if (!runs.empty() && runs.back().y1 >= z0)
      runs.back().y1 = z1;
    else
      runs.push_back({z0, z1});
  }
  std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, std::vector<Run>>> footprints(columns_of.begin(),
                                                                                            columns_of.end());

  const Box b = cells.bounds();
  const double sx1 = surface.x0 + (surface.nx - 1) * surface.spacing;
  const double sy1 = surface.y0 + (surface.ny - 1) * surface.spacing;
  const auto [ci0, ci1] = centers_in_closed(b.lo[0] + surface.x0, b.hi[0] + sx1, pitch);
  const auto [cj0, cj1] = centers_in_closed(b.lo[1] + surface.y0, b.hi[1] + sy1, pitch);
  const auto [row0, row1] = centers_in_closed(b.lo[2] + zlo, b.hi[2] + zhi, pitch);
  const auto words = static_cast<std::size_t>((row1 - row0 + 63) / 64);
  const auto nci = static_cast<std::size_t>(ci1 - ci0), ncj = static_cast<std::size_t>(cj1 - cj0);

  auto node_range = [&](double wlo, double whi, double origin, int count) {
    auto a = static_cast<std::int64_t>(std::ceil((wlo - origin) / surface.spacing));
    auto e = static_cast<std::int64_t>(std::floor((whi - origin) / surface.spacing)) + 1;
    a = std::max<std::int64_t>(a, 0);
    e = std::min<std::int64_t>(e, count);
    return std::pair<std::int64_t, std::int64_t>{a, e};
  };

  const double count = parallel::sum(nci * ncj, 16, [&](std::size_t cb, std::size_t ce) {
    std::vector<std::uint64_t> bits(words);
    double local = 0.0;
    for (std::size_t c = cb; c < ce; ++c) {
      std::fill(bits.begin(), bits.end(), 0);
      const double px = (static_cast<double>(ci0 + static_cast<std::int64_t>(c % nci)) + 0.5) * pitch;
      const double py = (static_cast<double>(cj0 + static_cast<std::int64_t>(c / nci)) + 0.5) * pitch;
      for (const auto& [key, runs] : footprints) {
        const double x0 = static_cast<double>(key.first) * side, y0 = static_cast<double>(key.second) * side;
        const auto [a0, a1] = node_range(px - x0 - side, px - x0, surface.x0, surface.nx);
        if (a0 >= a1) continue;
        const auto [b0, b1] = node_range(py - y0 - side, py - y0, surface.y0, surface.ny);
        if (b0 >= b1) continue;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, jump = 0.0;
        bool any = false;
        for (auto j = b0; j < b1; ++j)
          for (auto i = a0; i < a1; ++i) {
            const double z = surface.at(static_cast<int>(i), static_cast<int>(j));
            if (!std::isfinite(z)) continue;
            any = true;
            lo = std::min(lo, z);
            hi = std::max(hi, z);
            if (i + 1 < a1) {
              const double zr = surface.at(static_cast<int>(i + 1), static_cast<int>(j));
              jump = std::isfinite(zr) ? std::max(jump, std::abs(zr - z)) : std::numeric_limits<double>::infinity();
            }
            if (j + 1 < b1) {
              const double zu = surface.at(static_cast<int>(i), static_cast<int>(j + 1));
              jump = std::isfinite(zu) ? std::max(jump, std::abs(zu - z)) : std::numeric_limits<double>::infinity();
            }
          }
        if (!any) continue;
        for (const auto& run : runs) {
          if (jump <= run.y1 - run.y0) {
            mark_rows(bits, row0, run.y0 + lo, run.y1 + hi, pitch);
          } else {
            for (auto j = b0; j < b1; ++j)
              for (auto i = a0; i < a1; ++i) {
                const double z = surface.at(static_cast<int>(i), static_cast<int>(j));
                if (std::isfinite(z)) mark_rows(bits, row0, run.y0 + z, run.y1 + z, pitch);
              }
          }
        }
      }
      for (auto w : bits) local += static_cast<double>(std::popcount(w));
    }
    return local;
  });
  return count * pitch * pitch * pitch;
}

}  // namespace favard
