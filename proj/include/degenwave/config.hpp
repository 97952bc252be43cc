#pragma once

#include <string>

#include "degenwave/decay.hpp"
#include "json.hpp"

namespace degenwave::config {

using nlohmann::json;

/// Everything a CLI run needs, parsed from one JSON document. Keys carry
/// their units (omega_per_time, t_final_time, ...); unknown keys are errors.
struct RunConfig {
  model::ProblemConfig problem;
  timestep::SimulateOptions sim;
  int k_min = 30;
  int k_max = 60;
  spectrum::SeedVariant seeds = spectrum::SeedVariant::corrected;
  decay::FitWindow window;
  int condition_c_terms = 50;
};

RunConfig parse(const json& doc);
/// Reads a JSON document; I/O and syntax failures are ConfigErrors.
json load_json(const std::string& path);
/// Reads and parses a file; every failure (I/O, JSON syntax, schema) is a ConfigError.
RunConfig load(const std::string& path);
/// Normalized echo with every field spelled out.
json to_json(const RunConfig& cfg);

}  // namespace degenwave::config
