#include <doctest.h>

#include <cmath>

#include "favard/errors.hpp"
#include "favard/experiments.hpp"
#include "favard/parallel.hpp"

using namespace favard;
using nlohmann::json;

TEST_CASE("power law fit recovers exponent") {
  std::vector<double> xs, ys;
  for (double x : {0.01, 0.1, 1.0, 10.0}) {
    xs.push_back(x);
    ys.push_back(3.0 * std::sqrt(x));
  }
  const auto fit = fit_decay(xs, ys, FitModel::LogLog);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inverse n fit has slope minus one") {
  std::vector<double> xs, ys;
  for (int n = 1; n <= 8; ++n) {
    xs.push_back(n);
    ys.push_back(2.5 / n);
  }
  CHECK(std::abs(fit_decay(xs, ys, FitModel::LogLog).slope + 1.0) < 1e-9);
}

TEST_CASE("inverse log fit is exact in log-linear coordinates") {
  std::vector<double> xs, ys;
  for (int k = 1; k <= 6; ++k) {
    const double r = std::pow(2.0, -k);
    xs.push_back(r);
    ys.push_back(0.7 / std::log(1.0 / r));
  }
  const auto fit = fit_decay(xs, ys, FitModel::LogLinear);
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.slope == doctest::Approx(1.0 / 0.7).epsilon(1e-12));
  CHECK(std::abs(fit.intercept) < 1e-9);
}

TEST_CASE("linear fit and model names") {
  const auto fit = fit_decay({1, 2, 3, 4}, {1.5, 3.5, 5.5, 7.5}, FitModel::Linear);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(-0.5));
  for (auto m : {FitModel::Linear, FitModel::LogLog, FitModel::LogLinear}) CHECK(parse_fit_model(fit_model_name(m)) == m);
  CHECK_THROWS_AS(parse_fit_model("cubic"), InvalidInput);
}

TEST_CASE("degenerate fits are rejected") {
  CHECK_THROWS_AS(fit_decay({1, 2}, {1, 2}, FitModel::Linear), InvalidInput);
  CHECK_THROWS_AS(fit_decay({1, 1, 1}, {1, 2, 3}, FitModel::Linear), InvalidInput);
  CHECK_THROWS_AS(fit_decay({1, 2, 3}, {1, 0, 3}, FitModel::LogLog), InvalidInput);
  CHECK_THROWS_AS(fit_decay({0.5, 2, 0.1}, {1, 1, 3}, FitModel::LogLinear), InvalidInput);
  CHECK_THROWS_AS(fit_decay({1, 2, 3}, {1, 2}, FitModel::Linear), InvalidInput);
}

TEST_CASE("CSV round trip is exact") {
  DecayTable t;
  LengthEstimate e;
  e.value = 1.0 / 3.0;
  e.method = "minkowski";
  e.resolution = std::pow(2.0, -10);
  e.error_bar = 1e-17;
  e.seed = 18446744073709551615ull;
  t.rows.push_back({0.1, e});
  e.value = std::nextafter(2.0, 3.0);
  t.rows.push_back({7, e});
  const std::string text = to_csv(t);
  CHECK(text.rfind("n_or_r,value,method,resolution,error_bar,seed\n", 0) == 0);
  const DecayTable back = parse_csv(text);
  REQUIRE(back.rows.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back.rows[k].x == t.rows[k].x);
    CHECK(back.rows[k].estimate.value == t.rows[k].estimate.value);
    CHECK(back.rows[k].estimate.resolution == t.rows[k].estimate.resolution);
    CHECK(back.rows[k].estimate.seed == t.rows[k].estimate.seed);
  }
  CHECK(to_csv(back) == text);
  CHECK_THROWS_AS(parse_csv("bad header\n"), InvalidInput);
  CHECK_THROWS_AS(parse_csv("n_or_r,value,method,resolution,error_bar,seed\n1,2,x\n"), InvalidInput);
}

TEST_CASE("cell sets serialize and restore") {
  const CellSet k = four_corner(2);
  const CellSet back = cells_from_json(to_json(k));
  CHECK(back.side() == k.side());
  CHECK(back.indices() == k.indices());
  CHECK_THROWS_AS(cells_from_json(json{{"dim", 2}, {"side", 0.5}, {"anchors", {{1, 2, 3}}}}), InvalidInput);
}

TEST_CASE("builders validate their input") {
  CHECK(family_from_json({{"type", "orthogonal"}})->param_dim() == 1);
  CHECK(family_from_json({{"type", "surface"}})->param_dim() == 2);
  CHECK(family_from_json({{"type", "radial"},
                          {"vantage", {{"kind", "circle"}, {"center", {0.5, 0.5}}, {"radius", 3}}},
                          {"box", {0, 0, 1, 1}}})
            ->codomain() == Codomain::Circle);
  CHECK_THROWS_AS(family_from_json({{"type", "orthogonal"}, {"extra", 1}}), InvalidInput);
  CHECK_THROWS_AS(family_from_json({{"type", "helix"}}), InvalidInput);
  CHECK_THROWS_AS(family_from_json(json::array()), InvalidInput);
  CHECK_THROWS(family_from_json({{"type", "curve"}, {"curve", "parabola"}, {"curvature", 5.0}}));
  CHECK(set_from_json({{"kind", "four-corner"}}, 2).size() == 16);
  CHECK(set_from_json({{"kind", "linear-cantor"}, {"ratio", 0.25}}, 3).size() == 8);
  CHECK(set_from_json({{"kind", "ifs"}, {"q", 3}, {"offsets", {{0, 0}, {1, 1}, {2, 2}}}}, 2).size() == 9);
  CHECK_THROWS_AS(set_from_json({{"kind", "sierpinski"}}, 1), InvalidInput);
  CHECK_THROWS_AS(set_from_json({{"kind", "four-corner"}, {"colour", 1}}, 1), InvalidInput);
  CHECK_THROWS_AS(box_from_json({0, 0, 1}), InvalidInput);
}

TEST_CASE("experiment registry") {
  CHECK(experiment_ids().size() == 13);
  for (const auto& id : experiment_ids()) {
    const std::string t = experiment_target(id);
    CHECK(!t.empty());
  }
  CHECK_THROWS_AS(experiment_target("nope"), InvalidInput);
}

TEST_CASE("configuration errors are reported") {
  CHECK_THROWS_AS(run_experiment(json::array()), InvalidInput);
  CHECK_THROWS_AS(run_experiment({{"seed", 1}}), InvalidInput);
  CHECK_THROWS_AS(run_experiment({{"experiment", "nope"}, {"seed", 1}}), InvalidInput);
  CHECK_THROWS_AS(run_experiment({{"experiment", "generate"}}), InvalidInput);
  CHECK_THROWS_AS(run_experiment({{"experiment", "generate"}, {"seed", -1}}), InvalidInput);
  CHECK_THROWS_AS(run_experiment({{"experiment", "generate"}, {"seed", 1}, {"pairs", 3}}), InvalidInput);
  CHECK_THROWS_AS(run_experiment({{"experiment", "generate"}, {"seed", 1}, {"n", {3, 1}}}), InvalidInput);
  CHECK_THROWS_AS(run_experiment({{"experiment", "generate"}, {"seed", 1}, {"n", "3"}}), InvalidInput);
  CHECK_THROWS_AS(run_experiment({{"experiment", "energy-law"}, {"seed", 1}, {"s", "one"}}), InvalidInput);
}

TEST_CASE("generate experiment") {
  const auto res = run_experiment({{"experiment", "generate"}, {"seed", 5}, {"n", {0, 2}}});
  REQUIRE(res.table.rows.size() == 3);
  CHECK(res.table.rows[2].estimate.value == doctest::Approx(1.0 / 16));
  CHECK(res.table.rows[0].estimate.seed == 5);
  CHECK(res.metadata["sets"][1]["anchors"].size() == 4);
  CHECK(res.metadata["experiment"] == "generate");
  CHECK(res.metadata["target"].is_string());
}

TEST_CASE("energy law experiment has constant increments") {
  const auto res = run_experiment({{"experiment", "energy-law"}, {"seed", 1}, {"n", {2, 5}}});
  REQUIRE(res.table.fit);
  CHECK(res.table.fit->r2 > 0.999);
  const auto& d = res.metadata["consecutive_differences"];
  REQUIRE(d.size() == 3);
  for (const auto& v : d) CHECK(v.get<double>() == doctest::Approx(d[0].get<double>()).epsilon(0.02));
}

TEST_CASE("slope half shadow experiment") {
  const auto res = run_experiment({{"experiment", "slope-half-shadow"}, {"seed", 1}, {"n", {0, 4}}});
  for (const auto& r : res.table.rows) CHECK(r.estimate.value >= 1.0 - 1e-12);
  for (const auto& c : res.metadata["interval_count"]) CHECK(c == 1);
}

TEST_CASE("orthogonal arcsin experiment") {
  const auto res =
      run_experiment({{"experiment", "orthogonal-arcsin"}, {"seed", 3}, {"psi_samples", 20000}, {"deltas", {0.3}}});
  CHECK(std::abs(res.metadata["z_scores"][0].get<double>()) < 4.0);
}

TEST_CASE("curve decay experiment is deterministic across thread counts") {
  const json cfg = {{"experiment", "favard-curve-decay"}, {"seed", 9}, {"n", {1, 3}}};
  parallel::set_thread_count(1);
  const std::string one = to_csv(run_experiment(cfg).table);
  parallel::set_thread_count(4);
  const auto res = run_experiment(cfg);
  parallel::set_thread_count(0);
  CHECK(to_csv(res.table) == one);
  REQUIRE(res.table.fit);
  CHECK(res.table.fit->slope < 0.0);
  CHECK(res.table.rows[0].estimate.method == "minkowski");
}

TEST_CASE("non transversal line experiment scales like r") {
  const auto res = run_experiment({{"experiment", "non-transversal-line"}, {"seed", 1}, {"r", {0.0625, 0.03125, 0.015625}}});
  for (const auto& v : res.metadata["value_over_r"]) CHECK(v.get<double>() == doctest::Approx(2.0).epsilon(0.1));
  CHECK(res.table.fit->slope == doctest::Approx(1.0).epsilon(0.05));
}
