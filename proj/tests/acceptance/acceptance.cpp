#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "favard/errors.hpp"
#include "favard/experiments.hpp"
#include "favard/parallel.hpp"

using namespace favard;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 20240607;

// C1
constexpr double kDecayFloor = 0.5;
constexpr double kDecaySpread = 4.0;
constexpr double kDecaySeconds = 120.0;
// C2
constexpr double kEnergyR2 = 0.99;
constexpr double kEnergyStepTolerance = 0.20;
constexpr double kEnergySeconds = 180.0;
// C3
constexpr double kProductFloor = 0.8;
// C4
constexpr double kArcsinSigmas = 3.0;
constexpr int kArcsinSamples = 100000;
// C5
constexpr double kTransversalBound = 10.0;
constexpr double kTransversalSpread = 2.0;
constexpr double kNonTransversalGrowth = 3.0;
// C6
constexpr double kMattilaSlopeLo = 0.35;
constexpr double kMattilaSlopeHi = 0.65;
constexpr double kMattilaFloor = 0.5;
// C7
constexpr double kVisibilityFloor = 0.5;
// C8
constexpr double kLineRatioLo = 1.5;
constexpr double kLineRatioHi = 2.5;
constexpr double kTubeGrowth = 3.0;
// C9
constexpr double kCrossRelative = 0.05;
constexpr double kCrossSigmas = 3.0;
// C10
constexpr double kMarstrandTolerance = 0.1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<double> column(const DecayTable& t) {
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(r.estimate.value);
  return v;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome four_corner_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_experiment({{"experiment", "favard-curve-decay"}, {"seed", kSeed}, {"n", {1, 6}}});
  const double secs = seconds_since(t0);
  std::vector<double> scaled;
  for (const auto& r : res.table.rows) scaled.push_back(r.x * r.estimate.value);
  const double lo = *std::min_element(scaled.begin(), scaled.end());
  const double hi = *std::max_element(scaled.begin(), scaled.end());
  const bool ok = lo >= kDecayFloor * scaled.front() && hi / lo <= kDecaySpread && secs <= kDecaySeconds;
  return {ok, "min n*Fav / first = " + fmt("%.3f", lo / scaled.front()) + ", max/min = " + fmt("%.3f", hi / lo) +
                  ", " + fmt("%.1f", secs) + " s"};
}

Outcome energy_law() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_experiment(
      {{"experiment", "energy-law"}, {"seed", kSeed}, {"n", {2, 7}}, {"s", 1.0}, {"quadrature_order", 2}});
  const double secs = seconds_since(t0);
  std::vector<double> diffs;
  for (const auto& d : res.metadata["consecutive_differences"]) diffs.push_back(d.get<double>());
  const double med = median(diffs);
  double worst = 0.0;
  for (double d : diffs) worst = std::max(worst, std::abs(d - med) / std::abs(med));
  const bool ok = res.table.fit->r2 >= kEnergyR2 && worst <= kEnergyStepTolerance && secs <= kEnergySeconds;
  return {ok, "r2 = " + fmt("%.6f", res.table.fit->r2) + ", max step deviation = " + fmt("%.4f", worst) + ", " +
                  fmt("%.1f", secs) + " s"};
}

Outcome product_floor() {
  const auto res = run_experiment({{"experiment", "product-floor"}, {"seed", kSeed}, {"n", {1, 6}}});
  const auto v = column(res.table);
  const double ref = v[1];
  const double lo = *std::min_element(v.begin(), v.end());
  return {lo >= kProductFloor * ref, "min product / value at n=2 = " + fmt("%.3f", lo / ref)};
}

Outcome orthogonal_arcsin() {
  const std::vector<double> deltas = {0.5, 0.1, 0.02};
  const auto single = run_experiment({{"experiment", "orthogonal-arcsin"},
                                      {"seed", kSeed},
                                      {"deltas", deltas},
                                      {"psi_samples", kArcsinSamples}});
  double worst_z = 0.0;
  for (const auto& z : single.metadata["z_scores"]) worst_z = std::max(worst_z, std::abs(z.get<double>()));
  auto fam = orthogonal_family();
  const auto rep = transversality_estimate(*fam, 1.0, deltas, 50, kArcsinSamples, kSeed);
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    const double law = 2.0 / std::numbers::pi * std::asin(deltas[d]);
    const double se = std::sqrt(law * (1.0 - law) / kArcsinSamples);
    const double largest = rep.per_delta[d].worst_ratio * deltas[d];
    worst_z = std::max({worst_z, std::abs(rep.per_delta[d].mean_estimate - law) / se, std::abs(largest - law) / se});
  }
  return {worst_z <= kArcsinSigmas, "max |estimate - (2/pi) asin(delta)| / SE = " + fmt("%.3f", worst_z)};
}

Outcome transversality_bounds() {
  const std::vector<double> deltas = {0.1, 0.03, 0.01};
  std::string detail;
  bool ok = true;
  for (const json& family : {json{{"type", "curve"}, {"curve", "parabola"}}, json{{"type", "surface"}}}) {
    const auto res = run_experiment({{"experiment", "transversality"},
                                     {"seed", kSeed},
                                     {"family", family},
                                     {"s", 1.0},
                                     {"deltas", deltas},
                                     {"pairs", 10000},
                                     {"psi_samples", 10000}});
    const auto v = column(res.table);
    const double hi = *std::max_element(v.begin(), v.end());
    const double lo = *std::min_element(v.begin(), v.end());
    ok = ok && hi <= kTransversalBound && hi / lo <= kTransversalSpread;
    detail += family["type"].get<std::string>() + " worst " + fmt("%.3f", hi) + " spread " + fmt("%.3f", hi / lo) + "; ";
  }
  auto line = straight_line_family(0.0, -1.0, 1.0);
  const auto bad = transversality_estimate(*line, 1.0, deltas, 10000, 10000, kSeed);
  const double decades = std::log10(deltas.front() / deltas.back());
  const double growth = std::pow(bad.per_delta.back().worst_ratio / bad.per_delta.front().worst_ratio, 1.0 / decades);
  ok = ok && growth >= kNonTransversalGrowth;
  detail += "line growth per decade " + fmt("%.3f", growth);
  return {ok, detail};
}

Outcome mattila_exponent() {
  const auto res = run_experiment({{"experiment", "mattila-neighborhood"},
                                   {"seed", kSeed},
                                   {"ratio", 0.25},
                                   {"r", {std::pow(4.0, -2), std::pow(4.0, -3), std::pow(4.0, -4), std::pow(4.0, -5),
                                          std::pow(4.0, -6)}}});
  const double slope = res.table.fit->slope;
  std::vector<double> scaled;
  for (const auto& v : res.metadata["rescaled_value"]) scaled.push_back(v.get<double>());
  const double floor = *std::min_element(scaled.begin(), scaled.end()) / scaled.front();
  const bool ok = slope >= kMattilaSlopeLo && slope <= kMattilaSlopeHi && floor >= kMattilaFloor;
  return {ok, "slope = " + fmt("%.4f", slope) + ", min r^(s-1) Fav / first = " + fmt("%.3f", floor)};
}

Outcome visibility_decay() {
  const auto res = run_experiment({{"experiment", "visibility-decay"},
                                   {"seed", kSeed},
                                   {"n", {1, 5}},
                                   {"vantage", {{"kind", "circle"}, {"center", {0.5, 0.5}}, {"radius", 3.0}}}});
  std::vector<double> scaled;
  for (const auto& v : res.metadata["n_times_value"]) scaled.push_back(v.get<double>());
  const double floor = *std::min_element(scaled.begin(), scaled.end()) / scaled.front();
  return {floor >= kVisibilityFloor, "min n*vis / first = " + fmt("%.3f", floor)};
}

Outcome counterexamples() {
  bool ok = true;
  std::string detail;
  const auto line = run_experiment({{"experiment", "non-transversal-line"},
                                    {"seed", kSeed},
                                    {"r", {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}}});
  double lo = 1e300, hi = 0.0;
  for (const auto& v : line.metadata["value_over_r"]) {
    lo = std::min(lo, v.get<double>());
    hi = std::max(hi, v.get<double>());
  }
  ok = ok && lo >= kLineRatioLo && hi <= kLineRatioHi;
  detail += "(a) Fav/r in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "]; ";

  const auto shadow = run_experiment({{"experiment", "slope-half-shadow"}, {"seed", kSeed}, {"n", {0, 6}}});
  bool single = true;
  for (const auto& c : shadow.metadata["interval_count"]) single = single && c == 1;
  const auto v = column(shadow.table);
  const double shortest = *std::min_element(v.begin(), v.end());
  ok = ok && single && shortest >= 1.0;
  detail += std::string("(b) single interval ") + (single ? "yes" : "no") + ", shortest " + fmt("%.3f", shortest) + "; ";

  const auto flat = tube_condition_check(Vantage::segment(Point::xy(-2, 0), Point::xy(-1, 0)),
                                         Box::square(0, 0, 1, 0), {0.1, 0.01, 0.001}, 200, kSeed);
  ok = ok && !flat.holds && flat.growth_per_decade >= kTubeGrowth;
  detail += "(c) growth per decade " + fmt("%.3f", flat.growth_per_decade);
  return {ok, detail};
}

Outcome cross_estimators() {
  const auto res = run_experiment({{"experiment", "cross-estimator"},
                                   {"seed", kSeed},
                                   {"n", 2},
                                   {"quad_points", 4097},
                                   {"pitch", 1.0 / 1024},
                                   {"drops", 1000000}});
  const auto& rows = res.table.rows;
  bool ok = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const auto& a = rows[i].estimate;
      const auto& b = rows[j].estimate;
      const double allowed = std::max(kCrossRelative * std::max(a.value, b.value),
                                      kCrossSigmas * std::hypot(a.error_bar, b.error_bar));
      const double gap = std::abs(a.value - b.value);
      ok = ok && gap <= allowed;
      worst = std::max(worst, gap / allowed);
    }
  return {ok, "values " + fmt("%.5f", rows[0].estimate.value) + " / " + fmt("%.5f", rows[1].estimate.value) + " / " +
                  fmt("%.5f", rows[2].estimate.value) + ", worst gap / allowed = " + fmt("%.3f", worst)};
}

Outcome marstrand() {
  const double target = std::log(4.0) / std::log(5.0);
  bool ok = true;
  std::string detail;
  for (const json& family : {json{{"type", "orthogonal"}}, json{{"type", "curve"}, {"curve", "parabola"}}}) {
    const auto res = run_experiment({{"experiment", "marstrand"},
                                     {"seed", kSeed},
                                     {"family", family},
                                     {"set", {{"kind", "four-corner"}, {"q", 5}}},
                                     {"n", 6},
                                     {"alphas", 20}});
    const double med = res.metadata["median"];
    ok = ok && std::abs(med - target) <= kMarstrandTolerance;
    detail += family["type"].get<std::string>() + " median " + fmt("%.4f", med) + "; ";
  }
  return {ok, detail + "target " + fmt("%.4f", target)};
}

Outcome determinism() {
  const std::vector<json> configs = {
      {{"experiment", "favard-curve-decay"}, {"seed", kSeed}, {"n", {1, 4}}},
      {{"experiment", "transversality"}, {"seed", kSeed}, {"pairs", 300}, {"psi_samples", 2000}},
      {{"experiment", "transversality"}, {"seed", kSeed}, {"family", {{"type", "surface"}}}, {"pairs", 100},
       {"psi_samples", 400}},
      {{"experiment", "cross-estimator"}, {"seed", kSeed}, {"quad_points", 513}, {"pitch", 1.0 / 256},
       {"drops", 200000}},
      {{"experiment", "energy-law"}, {"seed", kSeed}, {"n", {2, 5}}},
      {{"experiment", "tube-condition"}, {"seed", kSeed}, {"lines", 200}},
      {{"experiment", "marstrand"}, {"seed", kSeed}, {"n", 4}, {"alphas", 6}},
      {{"experiment", "visibility-decay"}, {"seed", kSeed}, {"n", {1, 3}}},
  };
  int same = 0;
  for (const auto& cfg : configs) {
    std::vector<std::string> outputs;
    for (unsigned threads : {1u, 2u, 4u}) {
      parallel::set_thread_count(threads);
      outputs.push_back(to_csv(run_experiment(cfg).table));
    }
    parallel::set_thread_count(0);
    if (outputs[0] == outputs[1] && outputs[0] == outputs[2]) ++same;
  }
  return {same == static_cast<int>(configs.size()),
          std::to_string(same) + "/" + std::to_string(configs.size()) + " experiments byte-identical at 1, 2, 4 threads"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"C1 four-corner Favard curve decay", four_corner_decay},
      {"C2 energy law", energy_law},
      {"C3 energy-Favard product floor", product_floor},
      {"C4 orthogonal arcsin law", orthogonal_arcsin},
      {"C5 curve/surface transversality", transversality_bounds},
      {"C6 neighborhood exponent", mattila_exponent},
      {"C7 visibility decay", visibility_decay},
      {"C8 counterexamples", counterexamples},
      {"C9 cross-estimator consistency", cross_estimators},
      {"C10 nonlinear projection dimension", marstrand},
      {"C11 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("%s %s: %s\n", out.pass ? "PASS" : "FAIL", name, out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
