#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "recharge/model.hpp"
#include "recharge/raster.hpp"

namespace recharge {

struct SimulationScenario {
  TimeGrid grid;
  Point start;
  MovementParams truth;
  double g0 = -1.0;
  std::vector<double> theta;      // intercept first
  std::vector<FieldPtr> w_fields;  // recharge covariates
  std::vector<FieldPtr> x_fields;  // movement covariates
  std::vector<std::size_t> obs_indices;
  std::uint64_t seed = 0;

  void validate() const;
};

// Grid indices 0, k, 2k, ... below m.
std::vector<std::size_t> every_kth(std::size_t m, std::size_t k);

struct SimulationResult {
  std::vector<Point> path;
  RechargeState recharge;
  TelemetrySet telemetry;
};

// Forward simulation of decisions, path, recharge level and telemetry. The
// recharge level at t_j only uses positions before t_j, exactly as the
// likelihood does. Throws OutOfBoundsError naming the step when the path
// leaves a covariate.
SimulationResult simulate(const SimulationScenario& scenario);

struct RateCheck {
  std::optional<double> inside_rate;
  std::optional<double> outside_rate;
  bool partial = false;  // a stratum had no steps
};

// Mean dg/dt over steps starting fully inside (indicator == 1) and fully
// outside (indicator == 0) the patch.
RateCheck empirical_rate_check(const RechargeState& recharge, std::span<const Point> path,
                               const TimeGrid& grid, const CovariateField& patch_indicator);

// Square study area with a polygonal recharge patch: distance-to-patch drives
// movement and the in-patch indicator drives recharge.
struct PatchLandscape {
  Polygon patch;
  FieldPtr distance;
  FieldPtr indicator;
};

PatchLandscape make_patch_landscape(const Polygon& patch, double half_width, double cell_size);

// Desk-scale version of the simulated-data study: g0 = -1, theta = (-1, 4),
// sigma2_s = 1e-5, sigma2_0 = 0.02, sigma2_1 = 0.03 with a distance-to-patch
// potential and in-patch recharge. The geometry is documented in the README.
struct StudyDesign {
  std::size_t m = 600;
  std::size_t obs_every = 3;
  double dt = 0.05;
  double beta = 3.0;
  Point start{1.5, 1.0};
};

SimulationScenario recharge_study_scenario(const PatchLandscape& landscape, const StudyDesign& design,
                                           std::uint64_t seed);
PatchLandscape default_patch_landscape();

}  // namespace recharge
