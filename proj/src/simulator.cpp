#include "recharge/simulator.hpp"

#include <cmath>
#include <memory>

#include "recharge/errors.hpp"
#include "recharge/normal.hpp"
#include "recharge/rng.hpp"

namespace recharge {

void SimulationScenario::validate() const {
  if (grid.size() < 2) throw ValidationError("scenario grid needs at least 2 points");
  if (theta.size() != w_fields.size() + 1)
    throw ValidationError("scenario theta must hold an intercept plus one value per recharge covariate");
  if (truth.beta.size() != x_fields.size())
    throw ValidationError("scenario beta must hold one value per movement covariate");
  if (!(truth.sigma2_s >= 0.0) || !(truth.sigma2_0 >= 0.0) || !(truth.sigma2_1 >= 0.0))
    throw ValidationError("scenario variances must be non-negative");
  for (std::size_t i = 0; i < obs_indices.size(); ++i) {
    if (obs_indices[i] >= grid.size()) throw ValidationError("observation index outside the grid");
    if (i > 0 && obs_indices[i] <= obs_indices[i - 1])
      throw ValidationError("observation indices must be strictly increasing");
  }
  for (const auto& f : w_fields)
    if (!f->can_interpolate(start)) throw ValidationError("scenario start is outside a recharge covariate");
  for (const auto& f : x_fields)
    if (!f->can_differentiate(start)) throw ValidationError("scenario start is outside a movement covariate");
}

std::vector<std::size_t> every_kth(std::size_t m, std::size_t k) {
  if (k == 0) throw ValidationError("observation stride must be positive");
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < m; j += k) idx.push_back(j);
  return idx;
}

SimulationResult simulate(const SimulationScenario& sc) {
  sc.validate();
  const std::size_t m = sc.grid.size();
  Rng rng(sc.seed, 0);

  SimulationResult out;
  out.path.resize(m);
  out.recharge.g0 = sc.g0;
  out.recharge.theta = sc.theta;
  out.recharge.g.assign(m, 0.0);
  out.recharge.z.assign(m, 0);

  out.path[0] = sc.start;
  out.recharge.g[0] = sc.g0;
  out.recharge.z[0] = rng.bernoulli(decision_prob(sc.g0)) ? 1 : 0;

  double g = sc.g0;
  for (std::size_t j = 1; j < m; ++j) {
    const Point prev = out.path[j - 1];
    try {
      g += sc.grid.weight(j - 1) * landscape_value(prev, sc.w_fields, sc.theta);
    } catch (const OutOfBoundsError&) {
      throw OutOfBoundsError("simulated path left the study area at step " + std::to_string(j - 1));
    }
    out.recharge.g[j] = g;
    const bool z = rng.bernoulli(decision_prob(g));
    out.recharge.z[j] = z ? 1 : 0;

    const double dt = sc.grid.delta(j);
    Point mean = prev;
    double var = sc.truth.sigma2_0 * dt;
    if (z) {
      for (const auto& f : sc.x_fields)
        if (!f->can_differentiate(prev))
          throw OutOfBoundsError("simulated path left the study area at step " + std::to_string(j - 1));
      mean = prev + dt * drift(prev, sc.truth.beta, sc.x_fields);
      var = sc.truth.sigma2_1 * dt;
    }
    const double sd = std::sqrt(var);
    const double ex = rng.normal();
    const double ey = rng.normal();
    out.path[j] = {mean.x + sd * ex, mean.y + sd * ey};
  }
  for (const auto& f : sc.w_fields)
    if (!f->can_interpolate(out.path[m - 1]))
      throw OutOfBoundsError("simulated path left the study area at step " + std::to_string(m - 1));

  const double sd_s = std::sqrt(sc.truth.sigma2_s);
  for (std::size_t j : sc.obs_indices) {
    const double ex = rng.normal();
    const double ey = rng.normal();
    out.telemetry.fixes.push_back(
        {sc.grid.time(j), {out.path[j].x + sd_s * ex, out.path[j].y + sd_s * ey}});
  }
  return out;
}

RateCheck empirical_rate_check(const RechargeState& recharge, std::span<const Point> path,
                               const TimeGrid& grid, const CovariateField& patch_indicator) {
  double in_sum = 0.0, out_sum = 0.0;
  std::size_t in_n = 0, out_n = 0;
  for (std::size_t j = 0; j + 1 < recharge.g.size(); ++j) {
    const double w = patch_indicator.interpolate(path[j]);
    const double rate = (recharge.g[j + 1] - recharge.g[j]) / grid.weight(j);
    if (w == 1.0) {
      in_sum += rate;
      ++in_n;
    } else if (w == 0.0) {
      out_sum += rate;
      ++out_n;
    }
  }
  RateCheck rc;
  if (in_n) rc.inside_rate = in_sum / static_cast<double>(in_n);
  if (out_n) rc.outside_rate = out_sum / static_cast<double>(out_n);
  rc.partial = in_n == 0 || out_n == 0;
  return rc;
}

PatchLandscape make_patch_landscape(const Polygon& patch, double half_width, double cell_size) {
  const auto n = static_cast<std::size_t>(std::llround(2.0 * half_width / cell_size));
  CovariateField tmpl("template", n, n, -half_width, -half_width, cell_size,
                      std::vector<double>(n * n, 0.0));
  PatchLandscape out;
  out.patch = patch;
  out.distance = std::make_shared<const CovariateField>(distance_to_polygon(patch, tmpl, "dist_patch"));
  out.indicator = std::make_shared<const CovariateField>(indicator_in_polygon(patch, tmpl, "in_patch"));
  return out;
}

PatchLandscape default_patch_landscape() {
  Polygon patch{{{-0.15, -0.15}, {0.15, -0.15}, {0.15, 0.15}, {-0.15, 0.15}}};
  return make_patch_landscape(patch, 4.0, 0.05);
}

SimulationScenario recharge_study_scenario(const PatchLandscape& landscape, const StudyDesign& design,
                                           std::uint64_t seed) {
  SimulationScenario sc;
  sc.grid = TimeGrid::uniform(design.m, design.dt);
  sc.start = design.start;
  sc.truth.beta = {design.beta};
  sc.truth.sigma2_s = 1e-5;
  sc.truth.sigma2_0 = 0.02;
  sc.truth.sigma2_1 = 0.03;
  sc.g0 = -1.0;
  sc.theta = {-1.0, 4.0};
  sc.w_fields = {landscape.indicator};
  sc.x_fields = {landscape.distance};
  sc.obs_indices = every_kth(design.m, design.obs_every);
  sc.seed = seed;
  return sc;
}

}  // namespace recharge
