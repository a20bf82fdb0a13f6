#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "recharge/model.hpp"
#include "recharge/sampler.hpp"
#include "recharge/scoring.hpp"

namespace recharge {

enum class Command { simulate, fit, score, compare, summarize };

std::string to_string(Command c);
Command parse_command(const std::string& s);

// Scenario for `simulate`: square study area centred on a square patch.
struct SimulationSettings {
  std::size_t m = 600;
  double dt = 0.05;
  std::size_t obs_every = 3;
  double beta = 3.0;
  double start_x = 1.5;
  double start_y = 1.0;
  double g0 = -1.0;
  double theta0 = -1.0;
  double theta1 = 4.0;
  double sigma2_s = 1e-5;
  double sigma2_0 = 0.02;
  double sigma2_1 = 0.03;
  double half_width = 4.0;
  double cell = 0.05;
  double patch_half = 0.15;
};

// Everything a run needs. File paths are kept as written and resolved
// against base_dir (the directory holding the config file).
struct RunConfig {
  std::filesystem::path base_dir;
  std::string source_text;

  std::string telemetry;
  std::map<std::string, std::string> covariates;            // name -> .asc path
  std::map<std::string, std::string> polygons;              // name -> polygon CSV path
  std::map<std::string, std::string> distance_covariates;   // name -> polygon name
  std::map<std::string, std::string> indicator_covariates;  // name -> polygon name
  std::string derived_template;  // covariate whose grid hosts derived fields

  std::vector<std::string> movement_covariates;
  std::vector<std::string> recharge_covariates;
  Variant variant = Variant::recharge_full;
  bool standardize = true;
  std::size_t m = 0;  // 0: grid equals the observation times

  std::string prior_preset = "simulation";
  PriorSpec prior = PriorSpec::simulation_defaults();

  ChainConfig chain;
  bool write_paths = false;

  std::size_t folds = 8;
  FoldScheme fold_scheme = FoldScheme::contiguous;
  double kde_bandwidth_scale = 1.0;

  std::string out = "out";
  SimulationSettings sim;

  std::filesystem::path resolve(const std::string& p) const;
  // Throws ValidationError naming the missing key.
  void require_for(Command c) const;
};

// Flat `key = value` format, '#' starts a comment. Unknown keys, duplicate
// keys and malformed values are rejected with the key and line number.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = ".");

// Canonical dump with every key spelled out; parsing it returns the same
// dump byte for byte.
std::string dump_config(const RunConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);

PriorSpec prior_preset(const std::string& name);

}  // namespace recharge
