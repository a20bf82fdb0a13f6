// recharge: simulate, fit, score, compare and summarize runs of the
// recharge movement model.
#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "recharge/config.hpp"
#include "recharge/errors.hpp"
#include "recharge/io.hpp"
#include "recharge/pipeline.hpp"
#include "recharge/sampler.hpp"
#include "recharge/scoring.hpp"
#include "recharge/simulator.hpp"
#include "recharge/text.hpp"

namespace fs = std::filesystem;
using namespace recharge;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
};

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? parse_config_text("") : parse_config(c.config);
  if (c.seed) cfg.chain.seed = *c.seed;
  return cfg;
}

fs::path out_dir(const Common& c, const RunConfig& cfg) {
  if (!c.out.empty()) return c.out;
  return cfg.resolve(cfg.out);
}

RunManifest base_manifest(const RunConfig& cfg, const std::string& command) {
  RunManifest m;
  m.set("command", command);
  m.set("version", kVersion);
  m.set("config_hash", hex64(fnv1a64(cfg.source_text)));
  m.set("seed", std::to_string(cfg.chain.seed));
  m.set("variant", to_string(cfg.variant));
  m.set("n_iter", std::to_string(cfg.chain.n_iter));
  m.set("n_burn", std::to_string(cfg.chain.n_burn));
  m.set("thin", std::to_string(cfg.chain.thin));
  m.set("threads", std::to_string(omp_get_max_threads()));
  m.set("compiler", __VERSION__);
  return m;
}

int cmd_simulate(const Common& c) {
  RunConfig cfg = load_config(c);
  const auto bundle = simulation_from_settings(cfg.sim, cfg.chain.seed);
  const auto result = simulate(bundle.scenario);
  const fs::path dir = out_dir(c, cfg);
  write_simulation(bundle, result, cfg, dir);
  RunManifest man = base_manifest(cfg, "simulate");
  man.set("observations", std::to_string(result.telemetry.size()));
  write_manifest(man, dir / "manifest.txt");
  std::cout << "simulated " << bundle.scenario.grid.size() << " grid points, "
            << result.telemetry.size() << " fixes -> " << dir.string() << '\n';
  return 0;
}

int cmd_fit(const Common& c, const std::string& resume) {
  RunConfig cfg = load_config(c);
  cfg.require_for(Command::fit);
  const fs::path dir = out_dir(c, cfg);
  ensure_writable_dir(dir);
  const auto inputs = load_inputs(cfg);
  const auto spec = build_model_spec(cfg, inputs);
  Sampler sampler(spec, inputs.data, cfg.chain);
  if (!resume.empty()) {
    // Continues to the configured n_iter; only draws made after the
    // checkpoint are written.
    std::ifstream is(resume);
    if (!is) throw IoError("cannot read checkpoint '" + resume + "'");
    sampler.load_checkpoint(is);
    if (sampler.iteration() >= cfg.chain.n_iter)
      throw ValidationError("checkpoint is at iteration " + std::to_string(sampler.iteration()) +
                            "; raise n_iter to continue the chain");
  }
  const auto samples = sampler.run();
  RunManifest man = base_manifest(cfg, "fit");
  if (!resume.empty()) man.set("resumed_from", resume);
  man.set("grid_points", std::to_string(spec.grid.size()));
  man.set("observations", std::to_string(inputs.data.size()));
  for (const auto& f : spec.movement)
    man.set("scale." + f->name(), text::format_double(f->scale_record().divisor));
  emit_results(samples, man, dir, cfg.write_paths);
  {
    std::ofstream os(dir / "checkpoint.txt");
    if (!os) throw IoError("cannot write checkpoint in '" + dir.string() + "'");
    sampler.save_checkpoint(os);
  }
  write_text(dir / "config.cfg", dump_config(cfg));
  std::cout << "fit " << to_string(cfg.variant) << ": " << samples.draws.size() << " draws -> "
            << dir.string() << '\n';
  return 0;
}

int cmd_score(const Common& c, const std::vector<std::string>& variants) {
  RunConfig cfg = load_config(c);
  cfg.require_for(Command::score);
  const fs::path dir = out_dir(c, cfg);
  ensure_writable_dir(dir);
  const auto inputs = load_inputs(cfg);
  const auto plan = make_folds(inputs.data.size(), cfg.folds, cfg.fold_scheme);
  std::vector<ScoreReport> reports;
  std::vector<std::string> names = variants;
  if (names.empty()) names.push_back(to_string(cfg.variant));
  for (const auto& name : names) {
    const Variant v = parse_variant(name);
    const auto spec = build_model_spec(cfg, inputs, v);
    reports.push_back(cross_validate(name, inputs.data, spec, cfg.chain, plan, cfg.kde_bandwidth_scale));
    std::cout << name << ": pooled score " << text::format_double(reports.back().pooled()) << '\n';
  }
  write_score_csv(reports, dir / "scores.csv");
  if (reports.size() >= 2) {
    const auto ranking = format_ranking(compare_models(reports));
    write_text(dir / "ranking.txt", ranking);
    std::cout << ranking;
  }
  RunManifest man = base_manifest(cfg, "score");
  man.set("folds", std::to_string(cfg.folds));
  man.set("fold_scheme", to_string(cfg.fold_scheme));
  write_manifest(man, dir / "manifest.txt");
  return 0;
}

int cmd_compare(const Common& c, const std::vector<std::string>& files) {
  std::vector<ScoreReport> reports;
  for (const auto& f : files)
    for (auto& r : read_score_csv(f)) reports.push_back(std::move(r));
  const auto ranking = format_ranking(compare_models(reports));
  std::cout << ranking;
  if (!c.out.empty()) {
    ensure_writable_dir(c.out);
    write_text(fs::path(c.out) / "ranking.txt", ranking);
  }
  return 0;
}

int cmd_summarize(const Common& c, const std::string& samples, const std::string& paths) {
  const auto s = read_samples_csv(samples, paths);
  const fs::path dir = c.out.empty() ? fs::path(samples).parent_path() : fs::path(c.out);
  ensure_writable_dir(dir.empty() ? fs::path(".") : dir);
  const auto params = summarize_parameters(s);
  std::vector<SummaryRow> rows;
  if (!paths.empty()) rows = summarize_paths(s);
  write_parameter_summary(params, dir / "parameters.csv");
  if (!paths.empty()) write_summary_csv(rows, dir / "summary.csv");
  for (const auto& p : params)
    std::printf("%-24s median %-14.6g 95%% [%.6g, %.6g]\n", p.name.c_str(), p.median, p.lo, p.hi);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recharge-driven animal movement model"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Flat key = value run configuration");
    sub->add_option("--seed", common.seed, "Overrides the configured seed");
    sub->add_option("--threads", common.threads, "OpenMP threads (default: runtime setting)");
    sub->add_option("--out", common.out, "Output directory");
  };

  auto* sim = app.add_subcommand("simulate", "Simulate a path, decisions and telemetry");
  add_common(sim);
  auto* fit = app.add_subcommand("fit", "Run the MCMC sampler and write posterior summaries");
  add_common(fit);
  std::string resume;
  fit->add_option("--resume", resume, "Continue the chain saved in a checkpoint.txt");
  auto* score = app.add_subcommand("score", "K-fold cross-validated predictive scores");
  add_common(score);
  std::vector<std::string> variants;
  score->add_option("--variants", variants, "Variants to score (default: the configured one)")->delimiter(',');
  auto* compare = app.add_subcommand("compare", "Rank score reports");
  add_common(compare);
  std::vector<std::string> score_files;
  compare->add_option("reports", score_files, "Score CSV files")->required();
  auto* summarize = app.add_subcommand("summarize", "Summaries of a samples CSV");
  add_common(summarize);
  std::string samples_file, paths_file;
  summarize->add_option("samples", samples_file, "samples.csv")->required();
  summarize->add_option("--paths", paths_file, "paths.csv with latent paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::validation);
  }

  try {
    if (common.threads < 0) throw ValidationError("--threads must be positive");
    if (common.threads > 0) omp_set_num_threads(common.threads);
    if (*sim) return cmd_simulate(common);
    if (*fit) return cmd_fit(common, resume);
    if (*score) return cmd_score(common, variants);
    if (*compare) return cmd_compare(common, score_files);
    if (*summarize) return cmd_summarize(common, samples_file, paths_file);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::io);
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return static_cast<int>(ExitCode::numeric);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numeric);
  }
  return 0;
}
