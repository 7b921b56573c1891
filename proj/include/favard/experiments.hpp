#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "favard/favard.hpp"
#include "favard/fractal.hpp"
#include "favard/transversality.hpp"

namespace favard {

enum class FitModel {
  // y against x.
  Linear,
  // log y against log x.
  LogLog,
  // 1 / y against log(1 / x): exact for y = c / log(1 / x).
  LogLinear,
};

struct FitResult {
  FitModel model = FitModel::LogLog;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares on the transformed coordinates. Needs at least 3
// rows, values admissible for the transform, and distinct abscissae.
FitResult fit_decay(const std::vector<double>& xs, const std::vector<double>& ys, FitModel model);

FitModel parse_fit_model(const std::string& name);
std::string fit_model_name(FitModel model);

struct DecayRow {
  double x = 0.0;
  LengthEstimate estimate;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  std::optional<FitResult> fit;
};

// Columns n_or_r,value,method,resolution,error_bar,seed with %.17g numbers.
std::string to_csv(const DecayTable& table);
// Parses the CSV written by to_csv.
DecayTable parse_csv(const std::string& text);

struct ExperimentResult {
  DecayTable table;
  nlohmann::json metadata;
};

const std::vector<std::string>& experiment_ids();
// Plain-language description of the statement an experiment probes.
std::string experiment_target(const std::string& id);

// Validates the configuration against the experiment's schema (unknown keys,
// wrong types, empty ranges and a missing seed are rejected) and runs it.
ExperimentResult run_experiment(const nlohmann::json& config);

// Builders shared with the bindings and the command line.
FamilyPtr family_from_json(const nlohmann::json& j);
Vantage vantage_from_json(const nlohmann::json& j);
Box box_from_json(const nlohmann::json& j);
CurveSpec curve_from_json(const nlohmann::json& j);
CellSet set_from_json(const nlohmann::json& j, int n);

nlohmann::json to_json(const CellSet& cells);
CellSet cells_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LengthEstimate& est);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const TransversalityReport& rep);
nlohmann::json to_json(const TubeReport& rep);
nlohmann::json to_json(const Point& p);

}  // namespace favard
