#include "favard/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "favard/errors.hpp"

namespace favard {

namespace {

int unit_fraction_denominator(double ratio, int min_q) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw InvalidInput("contraction ratio must be positive");
  const double inv = 1.0 / ratio;
  const double q = std::round(inv);
  if (std::abs(inv - q) > 1e-9 * inv || q < min_q || q > 1 << 20)
    throw InvalidInput("contraction ratio " + std::to_string(ratio) + " must be 1/q for an integer q >= " +
                       std::to_string(min_q));
  return static_cast<int>(q);
}

}  // namespace

SimilarityIFS::SimilarityIFS(int dim, double ratio, const std::vector<std::array<double, 3>>& offsets)
    : dim_(dim), q_(unit_fraction_denominator(ratio, 2)) {
  for (const auto& o : offsets) {
    CellIndex idx{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      const double scaled = o[a] * q_;
      const double k = std::round(scaled);
      if (!std::isfinite(scaled) || std::abs(scaled - k) > 1e-9)
        throw InvalidInput("IFS offsets must be integer multiples of the ratio");
      idx[a] = static_cast<std::int64_t>(k);
    }
    offsets_.push_back(idx);
  }
  validate();
}

SimilarityIFS SimilarityIFS::from_grid(int dim, int inverse_ratio, std::vector<CellIndex> offset_indices) {
  SimilarityIFS ifs;
  ifs.dim_ = dim;
  ifs.q_ = inverse_ratio;
  ifs.offsets_ = std::move(offset_indices);
  if (dim == 2)
    for (auto& o : ifs.offsets_) o[2] = 0;
  ifs.validate();
  return ifs;
}

void SimilarityIFS::validate() const {
  if (dim_ != 2 && dim_ != 3) throw InvalidInput("IFS dimension must be 2 or 3");
  if (q_ < 2) throw InvalidInput("IFS ratio must be at most 1/2");
  if (offsets_.empty()) throw InvalidInput("IFS needs at least one map");
  for (const auto& o : offsets_)
    for (int a = 0; a < dim_; ++a)
      if (o[a] < 0 || o[a] >= q_) throw InvalidInput("IFS offsets must lie in [0, 1 - ratio]");
  auto sorted = offsets_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInput("IFS images must not overlap");
}

double SimilarityIFS::similarity_dimension() const {
  return std::log(static_cast<double>(offsets_.size())) / std::log(static_cast<double>(q_));
}

CellSet generate(const GenerationSpec& spec, std::size_t cap) {
  if (spec.n < 0) throw InvalidInput("generation index must be non-negative");
  const auto& ifs = spec.ifs;
  double count = 1.0;
  for (int k = 0; k < spec.n; ++k) {
    count *= static_cast<double>(ifs.map_count());
    if (count > static_cast<double>(cap))
      throw ResourceError("generation " + std::to_string(spec.n) + " exceeds the cell cap of " + std::to_string(cap));
  }
  std::vector<CellIndex> cells{{0, 0, 0}};
  for (int k = 0; k < spec.n; ++k) {
    std::vector<CellIndex> next;
    next.reserve(cells.size() * ifs.map_count());
    for (const auto& c : cells)
      for (const auto& o : ifs.offset_indices()) {
        CellIndex child{0, 0, 0};
        for (int a = 0; a < ifs.dim(); ++a) child[a] = c[a] * ifs.inverse_ratio() + o[a];
        next.push_back(child);
      }
    cells = std::move(next);
  }
  return CellSet(ifs.dim(), std::pow(static_cast<double>(ifs.inverse_ratio()), -spec.n), std::move(cells));
}

SimilarityIFS four_corner_ifs(int inverse_ratio, int dim) {
  if (inverse_ratio < 2) throw InvalidInput("four-corner ratio must be at most 1/2");
  const std::int64_t far = inverse_ratio - 1;
  std::vector<CellIndex> offsets;
  const int corners = dim == 3 ? 8 : 4;
  for (int c = 0; c < corners; ++c)
    offsets.push_back({(c & 1) ? far : 0, (c & 2) ? far : 0, (c & 4) ? far : 0});
  return SimilarityIFS::from_grid(dim, inverse_ratio, std::move(offsets));
}

CellSet four_corner(int n, std::size_t cap) { return generate({four_corner_ifs(4, 2), n}, cap); }

CellSet linear_cantor(double ratio, int n, std::size_t cap) {
  const int q = unit_fraction_denominator(ratio, 3);
  const SimilarityIFS ifs = SimilarityIFS::from_grid(2, q, {{0, 0, 0}, {q - 1, 0, 0}});
  return generate({ifs, n}, cap);
}

}  // namespace favard
