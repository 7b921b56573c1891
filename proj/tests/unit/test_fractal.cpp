#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "favard/errors.hpp"
#include "favard/fractal.hpp"

using namespace favard;

TEST_CASE("four-corner generations") {
  const CellSet k0 = four_corner(0);
  CHECK(k0.size() == 1);
  CHECK(k0.side() == 1.0);
  CHECK(k0.anchor(0) == Point::xy(0, 0));

  const CellSet k1 = four_corner(1);
  CHECK(k1.size() == 4);
  CHECK(k1.side() == 0.25);
  std::vector<Point> anchors;
  for (std::size_t k = 0; k < k1.size(); ++k) anchors.push_back(k1.anchor(k));
  for (const auto& p : {Point::xy(0, 0), Point::xy(0.75, 0), Point::xy(0, 0.75), Point::xy(0.75, 0.75)})
    CHECK(std::find(anchors.begin(), anchors.end(), p) != anchors.end());

  const CellSet k2 = four_corner(2);
  CHECK(k2.size() == 16);
  CHECK(k2.side() == 1.0 / 16);
  CHECK(k2.measure() == 1.0 / 16);
}

TEST_CASE("four-corner area, count and nesting") {
  for (int n = 0; n <= 7; ++n) {
    const CellSet k = four_corner(n);
    CHECK(k.size() == static_cast<std::size_t>(1) << (2 * n));
    CHECK(k.measure() == std::ldexp(1.0, -2 * n));
    if (n > 0) CHECK(is_subset(k, four_corner(n - 1)));
  }
}

TEST_CASE("generic IFS generation") {
  const SimilarityIFS ifs(2, 1.0 / 3, {{0, 0, 0}, {2.0 / 3, 0, 0}, {1.0 / 3, 1.0 / 3, 0}});
  CHECK(ifs.inverse_ratio() == 3);
  CHECK(ifs.similarity_dimension() == doctest::Approx(1.0));
  const CellSet g = generate({ifs, 3});
  CHECK(g.size() == 27);
  CHECK(g.measure() == doctest::Approx(27.0 / 729));

  const SimilarityIFS cube = four_corner_ifs(4, 3);
  CHECK(cube.map_count() == 8);
  const CellSet c2 = generate({cube, 2});
  CHECK(c2.dim() == 3);
  CHECK(c2.measure() == doctest::Approx(std::pow(8.0 / 64.0, 2)));
}

TEST_CASE("ratio 1/5 variant has the expected similarity dimension") {
  const SimilarityIFS ifs = four_corner_ifs(5);
  CHECK(ifs.similarity_dimension() == doctest::Approx(std::log(4.0) / std::log(5.0)));
  const CellSet g = generate({ifs, 2});
  CHECK(g.size() == 16);
  CHECK(g.indices().back() == CellIndex{24, 24, 0});
}

TEST_CASE("linear Cantor sets") {
  const CellSet c1 = linear_cantor(0.25, 1);
  CHECK(c1.size() == 2);
  CHECK(c1.anchor(0) == Point::xy(0, 0));
  CHECK(c1.anchor(1) == Point::xy(0.75, 0));
  CHECK(c1.side() == 0.25);

  const CellSet c0 = linear_cantor(0.25, 0);
  CHECK(c0.size() == 1);
  CHECK(c0.side() == 1.0);

  const CellSet c = linear_cantor(1.0 / 3, 2);
  CHECK(c.size() == 4);
  CHECK(c.side() == doctest::Approx(1.0 / 9));
  std::vector<std::int64_t> xs;
  for (const auto& idx : c.indices()) {
    xs.push_back(idx[0]);
    CHECK(idx[1] == 0);
  }
  CHECK(xs == std::vector<std::int64_t>{0, 2, 6, 8});

  const SimilarityIFS quarter = SimilarityIFS::from_grid(2, 4, {{0, 0, 0}, {3, 0, 0}});
  CHECK(quarter.similarity_dimension() == doctest::Approx(0.5));
}

TEST_CASE("fractal input validation") {
  CHECK_THROWS_AS(linear_cantor(0.3, 2), InvalidInput);
  CHECK_THROWS_AS(linear_cantor(0.5, 2), InvalidInput);
  CHECK_THROWS_AS(linear_cantor(0.25, -1), InvalidInput);
  CHECK_THROWS_AS(SimilarityIFS(2, 0.6, {{0, 0, 0}}), InvalidInput);
  CHECK_THROWS_AS(SimilarityIFS(2, 0.25, {}), InvalidInput);
  CHECK_THROWS_AS(SimilarityIFS(2, 0.25, {{0.8, 0, 0}}), InvalidInput);
  CHECK_THROWS_AS(SimilarityIFS(2, 0.25, {{0.1, 0, 0}}), InvalidInput);
  CHECK_THROWS_AS(SimilarityIFS(2, 0.25, {{0, 0, 0}, {0, 0, 0}}), InvalidInput);
}

TEST_CASE("cell cap is enforced") {
  CHECK_NOTHROW(four_corner(8));
  CHECK_THROWS_AS(four_corner(9), ResourceError);
  CHECK_THROWS_AS(four_corner(3, 63), ResourceError);
  CHECK_NOTHROW(four_corner(3, 64));
}
