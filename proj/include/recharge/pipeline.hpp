#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "recharge/config.hpp"
#include "recharge/model.hpp"
#include "recharge/simulator.hpp"

namespace recharge {

struct LoadedInputs {
  TelemetrySet data;
  std::map<std::string, FieldPtr> fields;  // raw, by config name
  std::map<std::string, Polygon> polygons;
};

// Reads telemetry, grids and polygons and derives distance/indicator fields.
LoadedInputs load_inputs(const RunConfig& cfg);

// Grid covering every observation time with max(m, n) points. Movement
// covariates are divided by their mean slope along the interpolated fixes
// when cfg.standardize is set (indicators are left as they are).
ModelSpec build_model_spec(const RunConfig& cfg, const LoadedInputs& in);

// Same, but with an explicit variant (used by score/compare runs).
ModelSpec build_model_spec(const RunConfig& cfg, const LoadedInputs& in, Variant variant);

struct SimulationBundle {
  PatchLandscape landscape;
  SimulationScenario scenario;
};

SimulationBundle simulation_from_settings(const SimulationSettings& s, std::uint64_t seed);

// Writes telemetry.csv, truth.csv, dist_patch.asc, in_patch.asc, patch.csv
// and fit.cfg (a ready-to-fit config pointing at those files).
void write_simulation(const SimulationBundle& bundle, const SimulationResult& result,
                      const RunConfig& base, const std::filesystem::path& outdir);

}  // namespace recharge
