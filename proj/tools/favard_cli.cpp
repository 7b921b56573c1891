#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "favard/errors.hpp"
#include "favard/experiments.hpp"
#include "favard/parallel.hpp"

namespace {

using nlohmann::json;

// Experiments reachable from each subcommand; the first is the default.
const std::map<std::string, std::vector<std::string>>& subcommands() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"generate", {"generate"}},
      {"energy", {"energy-law", "product-floor"}},
      {"transversality", {"transversality", "orthogonal-arcsin", "tube-condition"}},
      {"favard", {"cross-estimator", "marstrand"}},
      {"visibility", {"visibility-decay"}},
      {"decay", {"favard-curve-decay", "mattila-neighborhood"}},
      {"counterexample", {"non-transversal-line", "slope-half-shadow", "tube-condition"}},
  };
  return table;
}

int fail(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  return 2;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw favard::Error("io", "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw favard::Error("io", "failed writing " + path.string());
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw favard::Error("io", "cannot read config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw favard::InvalidInput("config " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Favard length, visibility and transversality experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string experiment;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "out";
  unsigned threads = 0;

  for (const auto& [name, ids] : subcommands()) {
    std::string help = "experiments:";
    for (const auto& id : ids) help += " " + id;
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration file (its values override flags)");
    sub->add_option("--experiment", experiment, "experiment id when no config names one");
    sub->add_option("--seed", seed, "64-bit seed")->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (0 = hardware)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("invalid_input", e.what());
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const auto& allowed = subcommands().at(name);

  try {
    json config = config_path.empty() ? json::object() : load_config(config_path);
    if (!config.is_object()) throw favard::InvalidInput("config must be a JSON object");
    if (!config.contains("experiment")) config["experiment"] = experiment.empty() ? allowed.front() : experiment;
    if (!config.contains("seed") && seed_given) config["seed"] = seed;
    if (config.contains("out")) {
      if (!config["out"].is_string()) throw favard::InvalidInput("'out' must be a string");
      out_dir = config["out"];
    }
    if (config.contains("threads")) {
      if (!config["threads"].is_number_unsigned()) throw favard::InvalidInput("'threads' must be a non-negative integer");
      threads = config["threads"];
    }
    if (!config["experiment"].is_string()) throw favard::InvalidInput("'experiment' must be a string");
    const std::string id = config["experiment"];
    if (std::find(allowed.begin(), allowed.end(), id) == allowed.end())
      throw favard::InvalidInput("experiment '" + id + "' is not available under '" + name + "'");

    favard::parallel::set_thread_count(threads);
    const favard::ExperimentResult res = favard::run_experiment(config);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path base = std::filesystem::path(out_dir) / id;
    write_file(base.string() + ".csv", favard::to_csv(res.table));
    write_file(base.string() + ".json", res.metadata.dump(2) + "\n");
    std::cout << base.string() << ".csv\n";
    return 0;
  } catch (const favard::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
