#include "recharge/pipeline.hpp"

#include <memory>

#include "recharge/errors.hpp"
#include "recharge/io.hpp"
#include "recharge/sampler.hpp"

namespace recharge {

LoadedInputs load_inputs(const RunConfig& cfg) {
  LoadedInputs in;
  if (!cfg.telemetry.empty()) in.data = load_telemetry(cfg.resolve(cfg.telemetry));
  for (const auto& [name, path] : cfg.covariates)
    in.fields[name] = std::make_shared<const CovariateField>(load_ascii_grid(cfg.resolve(path)).with_name(name));
  for (const auto& [name, path] : cfg.polygons) {
    Polygon p = load_polygon_csv(cfg.resolve(path));
    p.validate();
    in.polygons[name] = std::move(p);
  }
  if (!cfg.distance_covariates.empty() || !cfg.indicator_covariates.empty()) {
    const auto& tmpl = *in.fields.at(cfg.derived_template);
    for (const auto& [name, poly] : cfg.distance_covariates)
      in.fields[name] = std::make_shared<const CovariateField>(distance_to_polygon(in.polygons.at(poly), tmpl, name));
    for (const auto& [name, poly] : cfg.indicator_covariates)
      in.fields[name] = std::make_shared<const CovariateField>(indicator_in_polygon(in.polygons.at(poly), tmpl, name));
  }
  return in;
}

ModelSpec build_model_spec(const RunConfig& cfg, const LoadedInputs& in) {
  return build_model_spec(cfg, in, cfg.variant);
}

ModelSpec build_model_spec(const RunConfig& cfg, const LoadedInputs& in, Variant variant) {
  in.data.validate();
  const auto times = in.data.times();
  const std::size_t m = std::max(cfg.m, in.data.size());
  ModelSpec spec;
  spec.variant = variant;
  spec.grid = TimeGrid::covering(times, m);
  const auto anchor = interpolate_path(in.data, spec.grid);
  auto field = [&](const std::string& name) {
    auto it = in.fields.find(name);
    if (it == in.fields.end()) throw ValidationError("covariate '" + name + "' is not loaded");
    return it->second;
  };
  if (has_drift(variant)) {
    for (const auto& name : cfg.movement_covariates) {
      FieldPtr f = field(name);
      if (cfg.standardize && !f->is_indicator())
        f = std::make_shared<const CovariateField>(standardize_for_trajectory(*f, anchor));
      spec.movement.push_back(f);
    }
  }
  if (has_recharge(variant))
    for (const auto& name : cfg.recharge_covariates) spec.recharge.push_back(field(name));
  spec.prior = cfg.prior.broadcast(spec.n_beta(), spec.n_theta());
  spec.validate();
  return spec;
}

SimulationBundle simulation_from_settings(const SimulationSettings& s, std::uint64_t seed) {
  if (s.obs_every == 0) throw ValidationError("sim.obs_every must be positive");
  const double h = s.patch_half;
  Polygon patch{{{-h, -h}, {h, -h}, {h, h}, {-h, h}}};
  SimulationBundle b;
  b.landscape = make_patch_landscape(patch, s.half_width, s.cell);
  StudyDesign design;
  design.m = s.m;
  design.obs_every = s.obs_every;
  design.dt = s.dt;
  design.beta = s.beta;
  design.start = {s.start_x, s.start_y};
  b.scenario = recharge_study_scenario(b.landscape, design, seed);
  b.scenario.g0 = s.g0;
  b.scenario.theta = {s.theta0, s.theta1};
  b.scenario.truth.sigma2_s = s.sigma2_s;
  b.scenario.truth.sigma2_0 = s.sigma2_0;
  b.scenario.truth.sigma2_1 = s.sigma2_1;
  return b;
}

void write_simulation(const SimulationBundle& bundle, const SimulationResult& result,
                      const RunConfig& base, const std::filesystem::path& outdir) {
  ensure_writable_dir(outdir);
  write_telemetry(result.telemetry, outdir / "telemetry.csv");
  write_truth(result, bundle.scenario.grid, outdir / "truth.csv");
  write_ascii_grid(*bundle.landscape.distance, outdir / "dist_patch.asc");
  write_ascii_grid(*bundle.landscape.indicator, outdir / "in_patch.asc");
  write_polygon_csv(bundle.landscape.patch, outdir / "patch.csv");

  RunConfig fit = base;
  fit.telemetry = "telemetry.csv";
  fit.covariates = {{"dist_patch", "dist_patch.asc"}, {"in_patch", "in_patch.asc"}};
  fit.polygons.clear();
  fit.distance_covariates.clear();
  fit.indicator_covariates.clear();
  fit.derived_template.clear();
  fit.movement_covariates = {"dist_patch"};
  fit.recharge_covariates = {"in_patch"};
  // Grid between the first and last fix at the simulation resolution.
  fit.m = (result.telemetry.size() - 1) * bundle.scenario.obs_indices.at(1) + 1;
  fit.out = "fit";
  write_text(outdir / "fit.cfg", dump_config(fit));
}

}  // namespace recharge
