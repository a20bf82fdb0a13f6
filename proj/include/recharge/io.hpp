#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "recharge/model.hpp"
#include "recharge/sampler.hpp"
#include "recharge/scoring.hpp"
#include "recharge/simulator.hpp"

namespace recharge {

// CSV with header `time,x,y`. Errors name the 1-based data row.
TelemetrySet load_telemetry(const std::filesystem::path& path);
TelemetrySet parse_telemetry(const std::string& text, const std::string& source = "telemetry");
void write_telemetry(const TelemetrySet& data, const std::filesystem::path& path);

// time,x,y,z,g for every grid point of a simulated path.
void write_truth(const SimulationResult& sim, const TimeGrid& grid, const std::filesystem::path& path);

// One row per retained draw: iteration, variances, g0, beta.*, theta.*.
void write_samples_csv(const PosteriorSamples& samples, const std::filesystem::path& path);
// Long format draw,time,x,y,g,z; only meaningful when draws carry paths.
void write_paths_csv(const PosteriorSamples& samples, const std::filesystem::path& path);
// Reads a samples CSV and, when given, the matching paths CSV.
PosteriorSamples read_samples_csv(const std::filesystem::path& samples_path,
                                  const std::filesystem::path& paths_path = {});

// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double p);

struct SummaryRow {
  double time = 0.0;
  double x[3]{}, y[3]{}, g[3]{}, rho[3]{};  // median, 2.5%, 97.5%
  double z_mean = 0.0;
};

std::vector<SummaryRow> summarize_paths(const PosteriorSamples& samples);
void write_summary_csv(std::span<const SummaryRow> rows, const std::filesystem::path& path);

struct ParameterSummary {
  std::string name;
  double mean = 0.0, sd = 0.0, lo = 0.0, median = 0.0, hi = 0.0;
};

// Scalar parameters plus beta back-transformed to raw covariate units.
std::vector<ParameterSummary> summarize_parameters(const PosteriorSamples& samples);
void write_parameter_summary(std::span<const ParameterSummary> rows, const std::filesystem::path& path);

struct RunManifest {
  std::map<std::string, std::string> entries;
  void set(const std::string& key, const std::string& value) { entries[key] = value; }
};

std::string hex64(std::uint64_t v);

// Creates outdir and checks it is writable before writing samples.csv,
// summary.csv (when draws carry paths), parameters.csv, acceptance.txt,
// manifest.txt and, optionally, paths.csv.
void emit_results(const PosteriorSamples& samples, const RunManifest& manifest,
                  const std::filesystem::path& outdir, bool write_paths = false);

void write_acceptance(const AcceptanceReport& acc, const std::filesystem::path& path);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

// Throws IoError when the directory cannot be created or written.
void ensure_writable_dir(const std::filesystem::path& dir);

// `# fold_scheme=<scheme> folds=<K>` header, then model,fold,score rows.
void write_score_csv(std::span<const ScoreReport> reports, const std::filesystem::path& path);
std::vector<ScoreReport> read_score_csv(const std::filesystem::path& path);
std::string format_ranking(const Ranking& ranking);

void write_text(const std::filesystem::path& path, const std::string& body);

}  // namespace recharge
