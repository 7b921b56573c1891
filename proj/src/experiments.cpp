#include "favard/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "favard/errors.hpp"

namespace favard {

using nlohmann::json;

// ------------------------------------------------------------------ fitting

FitResult fit_decay(const std::vector<double>& xs, const std::vector<double>& ys, FitModel model) {
  if (xs.size() != ys.size()) throw InvalidInput("fit needs as many x values as y values");
  if (xs.size() < 3) throw InvalidInput("fit needs at least 3 rows");
  std::vector<double> X, Y;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k], y = ys[k];
    if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidInput("fit rows must be finite");
    switch (model) {
      case FitModel::Linear:
        X.push_back(x);
        Y.push_back(y);
        break;
      case FitModel::LogLog:
        if (!(x > 0.0) || !(y > 0.0)) throw InvalidInput("log-log fit needs positive rows");
        X.push_back(std::log(x));
        Y.push_back(std::log(y));
        break;
      case FitModel::LogLinear:
        if (!(x > 0.0) || !(x < 1.0) || y == 0.0) throw InvalidInput("log-linear fit needs 0 < x < 1 and y != 0");
        X.push_back(std::log(1.0 / x));
        Y.push_back(1.0 / y);
        break;
    }
  }
  const double n = static_cast<double>(X.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    mx += X[k];
    my += Y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    sxx += (X[k] - mx) * (X[k] - mx);
    sxy += (X[k] - mx) * (Y[k] - my);
    syy += (Y[k] - my) * (Y[k] - my);
  }
  if (!(sxx > 1e-300 * (1.0 + mx * mx))) throw InvalidInput("fit design matrix is degenerate");
  FitResult fit;
  fit.model = model;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

FitModel parse_fit_model(const std::string& name) {
  if (name == "linear") return FitModel::Linear;
  if (name == "log-log") return FitModel::LogLog;
  if (name == "log-linear") return FitModel::LogLinear;
  throw InvalidInput("unknown fit model '" + name + "' (expected linear, log-log or log-linear)");
}

std::string fit_model_name(FitModel model) {
  switch (model) {
    case FitModel::Linear:
      return "linear";
    case FitModel::LogLog:
      return "log-log";
    case FitModel::LogLinear:
      return "log-linear";
  }
  return "";
}

// ---------------------------------------------------------------------- CSV

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_csv(const DecayTable& table) {
  std::string out = "n_or_r,value,method,resolution,error_bar,seed\n";
  for (const auto& row : table.rows) {
    out += num(row.x) + "," + num(row.estimate.value) + "," + row.estimate.method + "," +
           num(row.estimate.resolution) + "," + num(row.estimate.error_bar) + "," + std::to_string(row.estimate.seed) +
           "\n";
  }
  return out;
}

DecayTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("n_or_r,value", 0) != 0) throw InvalidInput("CSV header is missing");
  DecayTable table;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 6) throw InvalidInput("CSV line " + std::to_string(lineno) + " needs 6 fields");
    try {
      DecayRow row;
      row.x = std::stod(f[0]);
      row.estimate.value = std::stod(f[1]);
      row.estimate.method = f[2];
      row.estimate.resolution = std::stod(f[3]);
      row.estimate.error_bar = std::stod(f[4]);
      row.estimate.seed = std::stoull(f[5]);
      table.rows.push_back(row);
    } catch (const std::logic_error&) {
      throw InvalidInput("CSV line " + std::to_string(lineno) + " has a malformed number");
    }
  }
  return table;
}

// --------------------------------------------------------------------- JSON

json to_json(const Point& p) {
  json j = json::array({p[0], p[1]});
  if (p.dim == 3) j.push_back(p[2]);
  return j;
}

json to_json(const CellSet& cells) {
  json anchors = json::array();
  for (const auto& idx : cells.indices()) {
    json a = json::array({idx[0], idx[1]});
    if (cells.dim() == 3) a.push_back(idx[2]);
    anchors.push_back(a);
  }
  return {{"dim", cells.dim()}, {"side", cells.side()}, {"anchors", anchors}};
}

CellSet cells_from_json(const json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    const double side = j.at("side").get<double>();
    std::vector<CellIndex> idx;
    for (const auto& a : j.at("anchors")) {
      if (!a.is_array() || static_cast<int>(a.size()) != dim) throw InvalidInput("anchor arity must equal dim");
      CellIndex c{0, 0, 0};
      for (int k = 0; k < dim; ++k) c[k] = a[k].get<std::int64_t>();
      idx.push_back(c);
    }
    return CellSet(dim, side, std::move(idx));
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed cell set: ") + e.what());
  }
}

json to_json(const LengthEstimate& est) {
  return {{"value", est.value},           {"method", est.method},   {"normalization", est.normalization},
          {"resolution", est.resolution}, {"samples", est.samples}, {"error_bar", est.error_bar},
          {"seed", est.seed}};
}

json to_json(const FitResult& fit) {
  return {{"model", fit_model_name(fit.model)}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
}

json to_json(const TransversalityReport& rep) {
  json per = json::array();
  for (const auto& d : rep.per_delta)
    per.push_back({{"delta", d.delta},
                   {"worst_ratio", d.worst_ratio},
                   {"mean_ratio", d.mean_ratio},
                   {"mean_estimate", d.mean_estimate},
                   {"mean_std_error", d.mean_std_error}});
  return {{"s", rep.s},
          {"m", rep.m},
          {"deltas", rep.deltas},
          {"worst_ratio", rep.worst_ratio},
          {"worst_pair",
           {{"x", to_json(rep.worst_pair.x)},
            {"y", to_json(rep.worst_pair.y)},
            {"delta", rep.worst_pair.delta},
            {"estimate", rep.worst_pair.estimate},
            {"std_error", rep.worst_pair.std_error}}},
          {"per_delta", per},
          {"pair_count", rep.pair_count},
          {"psi_samples", rep.psi_samples},
          {"seed", rep.seed}};
}

json to_json(const TubeReport& rep) {
  return {{"deltas", rep.deltas},
          {"max_ratio", rep.max_ratio},
          {"worst_ratio", rep.worst_ratio},
          {"worst_delta", rep.worst_delta},
          {"worst_line", {to_json(rep.worst_p), to_json(rep.worst_q)}},
          {"growth_per_decade", rep.growth_per_decade},
          {"holds", rep.holds},
          {"lines", rep.lines},
          {"seed", rep.seed}};
}

// ----------------------------------------------------------------- builders

namespace {

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw InvalidInput(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

Point point_from_json(const json& j) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) throw InvalidInput("points are arrays of 2 or 3 numbers");
  for (const auto& v : j)
    if (!v.is_number()) throw InvalidInput("point coordinates must be numbers");
  return j.size() == 2 ? Point::xy(j[0], j[1]) : Point::xyz(j[0], j[1], j[2]);
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& what) {
  if (!j.is_object()) throw InvalidInput(what + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || item.key() == k;
    if (!ok) throw InvalidInput("unknown key '" + item.key() + "' in " + what);
  }
}

}  // namespace

Box box_from_json(const json& j) {
  if (!j.is_array() || (j.size() != 4 && j.size() != 6)) throw InvalidInput("boxes are [x0,y0,x1,y1] or 6 numbers");
  for (const auto& v : j)
    if (!v.is_number()) throw InvalidInput("box bounds must be numbers");
  if (j.size() == 4) return Box::square(j[0], j[1], j[2], j[3]);
  return Box::cube(j[0], j[1], j[2], j[3], j[4], j[5]);
}

Vantage vantage_from_json(const json& j) {
  only_keys(j, {"kind", "center", "radius", "a", "b"}, "vantage");
  const std::string kind = j.value("kind", "circle");
  if (kind == "circle") return Vantage::circle(point_from_json(j.at("center")), number(j, "radius", 3.0));
  if (kind == "sphere") return Vantage::sphere(point_from_json(j.at("center")), number(j, "radius", 3.0));
  if (kind == "segment") return Vantage::segment(point_from_json(j.at("a")), point_from_json(j.at("b")));
  throw InvalidInput("unknown vantage kind '" + kind + "'");
}

CurveSpec curve_from_json(const json& j) {
  only_keys(j, {"type", "curve", "curvature", "radius", "slope", "lo", "hi"}, "curve");
  const std::string curve = j.value("curve", "parabola");
  if (curve == "parabola") return parabola_curve(number(j, "curvature", 1.0));
  if (curve == "arc") return circular_arc_curve(number(j, "radius", 1.0));
  if (curve == "segment") {
    CurveSpec c;
    const double slope = number(j, "slope", 0.0);
    c.gamma = [slope](double t) { return slope * t; };
    c.dgamma = [slope](double) { return slope; };
    c.lo = number(j, "lo", -0.25);
    c.hi = number(j, "hi", 0.25);
    c.label = "segment";
    return c;
  }
  throw InvalidInput("unknown curve '" + curve + "'");
}

FamilyPtr family_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    throw InvalidInput("family needs a string 'type'");
  const std::string type = j["type"];
  if (type == "orthogonal") {
    only_keys(j, {"type"}, "orthogonal family");
    return orthogonal_family();
  }
  if (type == "radial") {
    only_keys(j, {"type", "vantage", "box"}, "radial family");
    return radial_family(vantage_from_json(j.at("vantage")), box_from_json(j.at("box")));
  }
  if (type == "curve") return curve_family(curve_from_json(j));
  if (type == "line") {
    only_keys(j, {"type", "slope", "lo", "hi"}, "line family");
    return straight_line_family(number(j, "slope", 0.0), number(j, "lo", -1.0), number(j, "hi", 1.0));
  }
  if (type == "surface") {
    only_keys(j, {"type", "curvature", "radius"}, "surface family");
    return surface_family(paraboloid_surface(number(j, "curvature", 1.0), number(j, "radius", 1.0)));
  }
  throw InvalidInput("unknown family type '" + type + "'");
}

CellSet set_from_json(const json& j, int n) {
  only_keys(j, {"kind", "q", "dim", "ratio", "offsets"}, "set");
  if (n < 0) throw InvalidInput("generation must be >= 0");
  const std::string kind = j.value("kind", "four-corner");
  if (kind == "four-corner") {
    const int q = static_cast<int>(number(j, "q", 4.0));
    const int dim = static_cast<int>(number(j, "dim", 2.0));
    return generate({four_corner_ifs(q, dim), n});
  }
  if (kind == "linear-cantor") return linear_cantor(number(j, "ratio", 0.25), n);
  if (kind == "ifs") {
    const int dim = static_cast<int>(number(j, "dim", 2.0));
    const int q = static_cast<int>(number(j, "q", 4.0));
    std::vector<CellIndex> offsets;
    for (const auto& o : j.at("offsets")) {
      if (!o.is_array() || static_cast<int>(o.size()) != dim) throw InvalidInput("IFS offsets need dim integers");
      CellIndex c{0, 0, 0};
      for (int k = 0; k < dim; ++k) c[k] = o[k].get<std::int64_t>();
      offsets.push_back(c);
    }
    return generate({SimilarityIFS::from_grid(dim, q, offsets), n});
  }
  throw InvalidInput("unknown set kind '" + kind + "'");
}

// -------------------------------------------------------------- experiments

namespace {

// Typed access to a validated configuration object.
class Config {
 public:
  explicit Config(const json& j) : j_(j) {}

  std::uint64_t seed() const {
    if (!j_.contains("seed")) throw InvalidInput("'seed' is mandatory");
    const auto& s = j_["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      throw InvalidInput("'seed' must be a non-negative integer");
    return s.get<std::uint64_t>();
  }
  double real(const char* key, double fallback) const { return number(j_, key, fallback); }
  int integer(const char* key, int fallback) const {
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_number_integer()) throw InvalidInput(std::string("'") + key + "' must be an integer");
    return j_[key].get<int>();
  }
  std::string text(const char* key, const std::string& fallback) const {
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_string()) throw InvalidInput(std::string("'") + key + "' must be a string");
    return j_[key].get<std::string>();
  }
  std::vector<double> reals(const char* key, std::vector<double> fallback) const {
    if (!j_.contains(key)) return fallback;
    std::vector<double> out;
    if (!j_[key].is_array()) throw InvalidInput(std::string("'") + key + "' must be an array");
    for (const auto& v : j_[key]) {
      if (!v.is_number()) throw InvalidInput(std::string("'") + key + "' must hold numbers");
      out.push_back(v.get<double>());
    }
    if (out.empty()) throw InvalidInput(std::string("'") + key + "' must be non-empty");
    return out;
  }
  // Inclusive integer range [first, last].
  std::vector<int> range(const char* key, int first, int last) const {
    if (j_.contains(key)) {
      const auto& r = j_[key];
      if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer())
        throw InvalidInput(std::string("'") + key + "' must be [first, last]");
      first = r[0];
      last = r[1];
    }
    if (last < first) throw InvalidInput(std::string("'") + key + "' range is empty");
    std::vector<int> out;
    for (int k = first; k <= last; ++k) out.push_back(k);
    return out;
  }
  json object(const char* key, json fallback) const { return j_.contains(key) ? j_[key] : fallback; }

 private:
  const json& j_;
};

using Runner = std::function<ExperimentResult(const Config&)>;

struct Experiment {
  std::string target;
  std::vector<std::string> keys;
  Runner run;
};

DecayRow row(double x, LengthEstimate est) { return {x, std::move(est)}; }

LengthEstimate scalar(double value, const std::string& method, double resolution = 0.0, double error = 0.0,
                      std::uint64_t seed = 0) {
  LengthEstimate e;
  e.value = value;
  e.method = method;
  e.resolution = resolution;
  e.error_bar = error;
  e.seed = seed;
  return e;
}

std::vector<double> values_of(const DecayTable& t) {
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(r.estimate.value);
  return v;
}

std::vector<double> xs_of(const DecayTable& t) {
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(r.x);
  return v;
}

const json kParabola = {{"type", "curve"}, {"curve", "parabola"}};
const json kFourCorner = {{"kind", "four-corner"}, {"q", 4}};

ExperimentResult favard_curve_decay(const Config& c) {
  const CurveSpec curve = curve_from_json(c.object("family", kParabola));
  const json set = c.object("set", kFourCorner);
  const std::string method = c.text("method", "minkowski");
  ExperimentResult res;
  json scaled = json::array();
  for (int n : c.range("n", 1, 6)) {
    const CellSet k = set_from_json(set, n);
    LengthEstimate est;
    if (method == "minkowski") {
      est = favard_minkowski(curve, k, c.real("pitch", std::pow(4.0, -(n + 1))));
    } else if (method == "parameter-integral") {
      auto fam = curve_family(curve);
      est = favard_parameter_integral(*fam, k, c.integer("quad_points", 1025), k.side()).psi_average;
    } else {
      throw InvalidInput("method must be minkowski or parameter-integral");
    }
    scaled.push_back(n * est.value);
    res.table.rows.push_back(row(n, est));
  }
  res.table.fit = fit_decay(xs_of(res.table), values_of(res.table), FitModel::LogLog);
  res.metadata["n_times_value"] = scaled;
  return res;
}

ExperimentResult mattila_neighborhood(const Config& c) {
  auto fam = family_from_json(c.object("family", {{"type", "orthogonal"}}));
  const double ratio = c.real("ratio", 0.25);
  const int quad = c.integer("quad_points", 257);
  const double dimension = std::log(2.0) / std::log(1.0 / ratio);
  ExperimentResult res;
  json scaled = json::array();
  for (double r : c.reals("r", {std::pow(4.0, -2), std::pow(4.0, -3), std::pow(4.0, -4), std::pow(4.0, -5),
                                std::pow(4.0, -6)})) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidInput("neighborhood radii must lie in (0, 1)");
    const int gen = static_cast<int>(std::ceil(std::log(1.0 / r) / std::log(1.0 / ratio) - 1e-9));
    const CellSet nbhd = dilate(linear_cantor(ratio, gen), r, 4);
    auto est = favard_parameter_integral(*fam, nbhd, quad, nbhd.side()).psi_average;
    scaled.push_back(std::pow(r, dimension - 1.0) * est.value);
    res.table.rows.push_back(row(r, est));
  }
  res.table.fit = fit_decay(xs_of(res.table), values_of(res.table), FitModel::LogLog);
  res.metadata["set_dimension"] = dimension;
  res.metadata["rescaled_value"] = scaled;
  return res;
}

ExperimentResult non_transversal_line(const Config& c) {
  const double f_len = c.real("set_length", 0.5);
  const double g_len = c.real("curve_length", 0.5);
  ExperimentResult res;
  json ratios = json::array();
  for (double r : c.reals("r", {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256})) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidInput("neighborhood radii must lie in (0, 1)");
    const double side = r / 16;
    const auto count = static_cast<std::int64_t>(std::llround(f_len / side));
    std::vector<CellIndex> strip;
    for (std::int64_t i = 0; i < count; ++i) strip.push_back({i, 0, 0});
    const CellSet nbhd = dilate(CellSet(2, side, strip), r, 16);
    CurveSpec seg = curve_from_json({{"curve", "segment"}, {"lo", -0.5 * g_len}, {"hi", 0.5 * g_len}});
    auto est = favard_minkowski(seg, nbhd, nbhd.side() / 2);
    ratios.push_back(est.value / r);
    res.table.rows.push_back(row(r, est));
  }
  res.table.fit = fit_decay(xs_of(res.table), values_of(res.table), FitModel::LogLog);
  res.metadata["value_over_r"] = ratios;
  return res;
}

ExperimentResult energy_law(const Config& c) {
  const json set = c.object("set", kFourCorner);
  const double s = c.real("s", 1.0);
  const int order = c.integer("quadrature_order", 2);
  ExperimentResult res;
  json diffs = json::array();
  for (int n : c.range("n", 2, 7)) {
    const CellMeasure nu = equidistributed_measure(set_from_json(set, n), order);
    res.table.rows.push_back(row(n, scalar(riesz_energy(nu, s), "riesz-energy", nu.support().side() / order)));
    const auto& rows = res.table.rows;
    if (rows.size() > 1) diffs.push_back(rows.back().estimate.value - rows[rows.size() - 2].estimate.value);
  }
  res.table.fit = fit_decay(xs_of(res.table), values_of(res.table), FitModel::Linear);
  res.metadata["consecutive_differences"] = diffs;
  return res;
}

ExperimentResult product_floor(const Config& c) {
  const json fam_json = c.object("family", kParabola);
  auto fam = family_from_json(fam_json);
  const json set = c.object("set", kFourCorner);
  const int order = c.integer("quadrature_order", 2);
  const int quad = c.integer("quad_points", 1025);
  const double s = c.real("s", 1.0);
  ExperimentResult res;
  json parts = json::array();
  for (int n : c.range("n", 1, 6)) {
    const CellSet k = set_from_json(set, n);
    const auto fav = favard_parameter_integral(*fam, k, quad, k.side()).psi_average;
    const auto rep = energy_lower_bound_check(*fam, equidistributed_measure(k, order), s, fav);
    if (rep.inconsistent) throw NumericalError("vanishing Favard value with positive mass at n = " + std::to_string(n));
    parts.push_back({{"n", n}, {"energy", rep.energy}, {"favard", rep.favard}});
    res.table.rows.push_back(row(n, scalar(rep.product, "energy-product", k.side())));
  }
  res.metadata["factors"] = parts;
  return res;
}

ExperimentResult transversality(const Config& c) {
  auto fam = family_from_json(c.object("family", kParabola));
  const auto rep = transversality_estimate(*fam, c.real("s", 1.0), c.reals("deltas", {0.1, 0.03, 0.01}),
                                           c.integer("pairs", 10000), c.integer("psi_samples", 10000), c.seed());
  ExperimentResult res;
  for (const auto& d : rep.per_delta)
    res.table.rows.push_back(row(d.delta, scalar(d.worst_ratio, "transversality", 0.0, 0.0, rep.seed)));
  res.metadata["report"] = to_json(rep);
  return res;
}

ExperimentResult orthogonal_arcsin(const Config& c) {
  auto fam = orthogonal_family();
  const json xy = c.object("pair", json::array({json::array({0.1, 0.2}), json::array({0.7, 0.4})}));
  if (!xy.is_array() || xy.size() != 2) throw InvalidInput("'pair' must hold two points");
  const Point x = point_from_json(xy[0]), y = point_from_json(xy[1]);
  const int samples = c.integer("psi_samples", 100000);
  ExperimentResult res;
  json exact = json::array(), z = json::array();
  for (double delta : c.reals("deltas", {0.5, 0.1, 0.02})) {
    const auto est = bad_set_measure(*fam, x, y, delta, samples, c.seed());
    const double law = delta >= 1.0 ? 1.0 : 2.0 / std::numbers::pi * std::asin(delta);
    exact.push_back(law);
    z.push_back((est.estimate - law) / est.std_error);
    res.table.rows.push_back(row(delta, scalar(est.estimate, "stratified-mc", 0.0, est.std_error, c.seed())));
  }
  res.metadata["exact"] = exact;
  res.metadata["z_scores"] = z;
  return res;
}

ExperimentResult tube_condition(const Config& c) {
  const Vantage v = vantage_from_json(
      c.object("vantage", {{"kind", "circle"}, {"center", {0.5, 0.5}}, {"radius", 3.0}}));
  const Box box = box_from_json(c.object("box", json::array({0, 0, 1, 1})));
  const auto rep = tube_condition_check(v, box, c.reals("deltas", {0.1, 0.01, 0.001}), c.integer("lines", 1000),
                                        c.seed());
  ExperimentResult res;
  for (std::size_t d = 0; d < rep.deltas.size(); ++d)
    res.table.rows.push_back(row(rep.deltas[d], scalar(rep.max_ratio[d], "tube-ratio", 0.0, 0.0, rep.seed)));
  res.metadata["report"] = to_json(rep);
  return res;
}

ExperimentResult visibility_decay(const Config& c) {
  const Vantage v = vantage_from_json(
      c.object("vantage", {{"kind", "circle"}, {"center", {0.5, 0.5}}, {"radius", 3.0}}));
  const json set = c.object("set", kFourCorner);
  const int quad = c.integer("quad_points", 1024);
  ExperimentResult res;
  json scaled = json::array();
  for (int n : c.range("n", 1, 5)) {
    const CellSet k = set_from_json(set, n);
    auto est = visibility_integral(v, k, quad, k.side());
    scaled.push_back(n * est.value);
    res.table.rows.push_back(row(n, est));
  }
  res.table.fit = fit_decay(xs_of(res.table), values_of(res.table), FitModel::LogLog);
  res.metadata["n_times_value"] = scaled;
  return res;
}

ExperimentResult slope_half_shadow(const Config& c) {
  const json set = c.object("set", kFourCorner);
  const double slope = c.real("slope", 0.5);
  ExperimentResult res;
  json pieces = json::array();
  for (int n : c.range("n", 0, 6)) {
    const CellSet k = set_from_json(set, n);
    const IntervalUnion img = line_projection_image(k, slope);
    pieces.push_back(img.size());
    res.table.rows.push_back(row(n, scalar(img.measure(), "shadow", k.side())));
  }
  res.metadata["interval_count"] = pieces;
  return res;
}

ExperimentResult cross_estimator(const Config& c) {
  const CurveSpec curve = curve_from_json(c.object("family", kParabola));
  const int n = c.integer("n", 2);
  const CellSet k = set_from_json(c.object("set", kFourCorner), n);
  auto fam = curve_family(curve);
  const auto par = favard_parameter_integral(*fam, k, c.integer("quad_points", 4097), k.side());
  const auto mink = favard_minkowski(curve, k, c.real("pitch", 1.0 / 1024));
  const auto buf = buffon_mc(curve, k, c.integer("drops", 1000000), std::nullopt, c.seed());
  ExperimentResult res;
  res.table.rows = {row(n, *par.lebesgue_extended), row(n, mink), row(n, buf)};
  res.metadata["buffon_box"] = json::array({buffon_default_box(curve, k).lo[0], buffon_default_box(curve, k).lo[1],
                                            buffon_default_box(curve, k).hi[0], buffon_default_box(curve, k).hi[1]});
  return res;
}

ExperimentResult marstrand(const Config& c) {
  auto fam = family_from_json(c.object("family", {{"type", "orthogonal"}}));
  const json set = c.object("set", {{"kind", "four-corner"}, {"q", 5}});
  const CellSet k = set_from_json(set, c.integer("n", 6));
  const auto rep = marstrand_dimension_experiment(*fam, k, c.integer("alphas", 20), c.seed(), c.integer("scales", 5));
  ExperimentResult res;
  for (std::size_t i = 0; i < rep.per_alpha.size(); ++i)
    res.table.rows.push_back(row(static_cast<double>(i), scalar(rep.per_alpha[i].slope, "box-counting", k.side(), 0.0,
                                                                rep.seed)));
  res.metadata["median"] = rep.median;
  json alphas = json::array();
  for (const auto& e : rep.per_alpha) alphas.push_back(json::array({e.alpha[0], e.alpha[1]}));
  res.metadata["alphas"] = alphas;
  return res;
}

ExperimentResult generate_sets(const Config& c) {
  const json set = c.object("set", kFourCorner);
  ExperimentResult res;
  json sets = json::array();
  for (int n : c.range("n", 0, 3)) {
    const CellSet k = set_from_json(set, n);
    res.table.rows.push_back(row(n, scalar(k.measure(), "cell-measure", k.side())));
    sets.push_back(to_json(k));
  }
  res.metadata["sets"] = sets;
  return res;
}

const std::map<std::string, Experiment>& registry() {
  static const std::map<std::string, Experiment> r = {
      {"favard-curve-decay",
       {"Favard curve length of the four-corner generations K_n stays above a multiple of 1/n",
        {"family", "set", "n", "method", "pitch", "quad_points"},
        favard_curve_decay}},
      {"mattila-neighborhood",
       {"Favard length of r-neighborhoods of an s-dimensional set decays no faster than r^(1-s)",
        {"family", "ratio", "r", "quad_points"},
        mattila_neighborhood}},
      {"non-transversal-line",
       {"Without curvature, the Favard curve length of a segment's r-neighborhood is about 2r",
        {"r", "set_length", "curve_length"},
        non_transversal_line}},
      {"energy-law",
       {"The 1-energy of the natural measure on K_n grows linearly in n", {"set", "n", "s", "quadrature_order"},
        energy_law}},
      {"product-floor",
       {"Energy times psi-averaged image length stays above a positive floor",
        {"family", "set", "n", "s", "quadrature_order", "quad_points"},
        product_floor}},
      {"transversality",
       {"Bad-parameter sets of curved families have measure at most c delta^m |x-y|^(m-s)",
        {"family", "s", "deltas", "pairs", "psi_samples"},
        transversality}},
      {"orthogonal-arcsin",
       {"Orthogonal projections: the bad-direction set has measure (2/pi) arcsin(delta)",
        {"pair", "deltas", "psi_samples"},
        orthogonal_arcsin}},
      {"tube-condition",
       {"Delta-tubes around lines through the visible set meet the vantage set in measure O(delta^(n-1))",
        {"vantage", "box", "deltas", "lines"},
        tube_condition}},
      {"visibility-decay",
       {"Integrated visibility of K_n from a surrounding circle stays above a multiple of 1/n",
        {"vantage", "set", "n", "quad_points"},
        visibility_decay}},
      {"slope-half-shadow",
       {"The shadow of K_n along lines of slope 1/2 is a single long interval", {"set", "n", "slope"},
        slope_half_shadow}},
      {"cross-estimator",
       {"Parameter integral, Minkowski area and Buffon probability measure the same quantity",
        {"family", "set", "n", "quad_points", "pitch", "drops"},
        cross_estimator}},
      {"marstrand",
       {"Generic nonlinear projections preserve the dimension of sets of dimension at most 1",
        {"family", "set", "n", "alphas", "scales"},
        marstrand}},
      {"generate", {"Four-corner and related self-similar generations", {"set", "n"}, generate_sets}},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [id, e] : registry()) v.push_back(id);
    return v;
  }();
  return ids;
}

std::string experiment_target(const std::string& id) {
  const auto it = registry().find(id);
  if (it == registry().end()) throw InvalidInput("unknown experiment '" + id + "'");
  return it->second.target;
}

ExperimentResult run_experiment(const json& config) {
  if (!config.is_object()) throw InvalidInput("configuration must be a JSON object");
  if (!config.contains("experiment") || !config["experiment"].is_string())
    throw InvalidInput("configuration needs a string 'experiment'");
  const std::string id = config["experiment"];
  const auto it = registry().find(id);
  if (it == registry().end()) throw InvalidInput("unknown experiment '" + id + "'");
  static const std::set<std::string> common = {"experiment", "seed", "out", "threads"};
  for (const auto& item : config.items()) {
    const auto& keys = it->second.keys;
    if (!common.count(item.key()) && std::find(keys.begin(), keys.end(), item.key()) == keys.end())
      throw InvalidInput("unknown key '" + item.key() + "' for experiment " + id);
  }
  const Config cfg(config);
  const std::uint64_t seed = cfg.seed();
  ExperimentResult res = it->second.run(cfg);
  for (auto& r : res.table.rows)
    if (r.estimate.seed == 0) r.estimate.seed = seed;
  res.metadata["experiment"] = id;
  res.metadata["target"] = it->second.target;
  res.metadata["seed"] = seed;
  res.metadata["config"] = config;
  res.metadata["rows"] = json::array();
  for (const auto& r : res.table.rows) res.metadata["rows"].push_back({{"x", r.x}, {"estimate", to_json(r.estimate)}});
  if (res.table.fit) res.metadata["fit"] = to_json(*res.table.fit);
  return res;
}

}  // namespace favard
