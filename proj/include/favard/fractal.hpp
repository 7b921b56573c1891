#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "favard/geometry.hpp"

namespace favard {

// Similarity IFS with maps x -> x / q + offset, where q >= 2 is an integer and
// every offset is an integer multiple of 1/q. Offsets are stored as those
// integers, so generated cells have exact integer indices at scale q^-n.
class SimilarityIFS {
 public:
  // ratio must equal 1/q for an integer q >= 2; offsets must be multiples of
  // the ratio inside [0, 1 - ratio]^dim and pairwise distinct.
  SimilarityIFS(int dim, double ratio, const std::vector<std::array<double, 3>>& offsets);

  static SimilarityIFS from_grid(int dim, int inverse_ratio, std::vector<CellIndex> offset_indices);

  int dim() const { return dim_; }
  int inverse_ratio() const { return q_; }
  double ratio() const { return 1.0 / q_; }
  const std::vector<CellIndex>& offset_indices() const { return offsets_; }
  std::size_t map_count() const { return offsets_.size(); }
  // log(#maps) / log(1/ratio).
  double similarity_dimension() const;

 private:
  SimilarityIFS() = default;
  void validate() const;

  int dim_ = 2;
  int q_ = 2;
  std::vector<CellIndex> offsets_;
};

struct GenerationSpec {
  SimilarityIFS ifs;
  int n = 0;
};

inline constexpr std::size_t kDefaultCellCap = std::size_t{1} << 16;  // 4^8

// n-th generation: (#maps)^n cells of side ratio^n. Throws ResourceError when
// the cell count would exceed `cap`.
CellSet generate(const GenerationSpec& spec, std::size_t cap = kDefaultCellCap);

// Keeps the 2^dim corner cells of the q x q (x q) grid.
SimilarityIFS four_corner_ifs(int inverse_ratio = 4, int dim = 2);

// Generation n of the planar four-corner set with ratio 1/4.
CellSet four_corner(int n, std::size_t cap = kDefaultCellCap);

// Cantor set in [0, 1] keeping the two end intervals of length `ratio`,
// drawn as a row of squares of side ratio^n resting on the x-axis.
// ratio must be 1/q with q >= 3.
CellSet linear_cantor(double ratio, int n, std::size_t cap = kDefaultCellCap);

}  // namespace favard
