#include "recharge/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "recharge/errors.hpp"
#include "recharge/kernels.hpp"
#include "recharge/rng.hpp"

namespace recharge {

std::string to_string(FoldScheme s) {
  return s == FoldScheme::contiguous ? "contiguous" : "interleaved";
}

FoldScheme parse_fold_scheme(const std::string& s) {
  if (s == "contiguous") return FoldScheme::contiguous;
  if (s == "interleaved") return FoldScheme::interleaved;
  throw ValidationError("unknown fold scheme '" + s + "' (expected contiguous or interleaved)");
}

std::vector<std::size_t> FoldPlan::members(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::sizes() const {
  std::vector<std::size_t> out(k, 0);
  for (auto f : assignment) ++out[f];
  return out;
}

FoldPlan make_folds(std::size_t n, std::size_t k, FoldScheme scheme) {
  if (k == 0) throw ValidationError("fold count must be positive");
  if (k > n) throw ValidationError("fold count " + std::to_string(k) + " exceeds the " +
                                   std::to_string(n) + " observations");
  FoldPlan plan;
  plan.k = k;
  plan.scheme = scheme;
  plan.assignment.resize(n);
  if (scheme == FoldScheme::interleaved) {
    for (std::size_t i = 0; i < n; ++i) plan.assignment[i] = i % k;
    return plan;
  }
  const std::size_t base = n / k, extra = n % k;
  std::size_t i = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    for (std::size_t c = 0; c < len; ++c) plan.assignment[i++] = f;
  }
  return plan;
}

namespace {

// Type-7 quantile of sorted data.
double quantile_sorted(const std::vector<double>& s, double p) {
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> v, double scale) {
  const std::size_t n = v.size();
  if (n < 2) throw ValidationError("bandwidth needs at least two points");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (!(spread > 0.0)) spread = 1e-12 * std::max(1.0, std::abs(mean));
  return scale * 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

double predictive_log_density(std::span<const Point> cloud, Point p, double bandwidth_scale) {
  std::vector<double> xs(cloud.size()), ys(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    xs[i] = cloud[i].x;
    ys[i] = cloud[i].y;
  }
  const double hx = silverman_bandwidth(xs, bandwidth_scale);
  const double hy = silverman_bandwidth(ys, bandwidth_scale);
  return kernels::kde_log_density(xs, ys, hx, hy, p);
}

double score_fold(const PosteriorSamples& samples, const TelemetrySet& holdout, std::uint64_t seed,
                  double bandwidth_scale) {
  const auto& draws = samples.draws;
  if (draws.size() < kMinScoringDraws)
    throw ValidationError("scoring needs at least " + std::to_string(kMinScoringDraws) +
                          " retained draws, got " + std::to_string(draws.size()));
  if (holdout.fixes.empty()) throw ValidationError("holdout set is empty");
  TimeGrid grid(samples.times);
  Rng rng(seed, 0);
  std::vector<Point> cloud(draws.size());
  double total = 0.0;
  for (const auto& fix : holdout.fixes) {
    const auto j = grid.find(fix.time);
    if (!j) throw ValidationError("holdout time " + std::to_string(fix.time) + " is not a grid point");
    for (std::size_t k = 0; k < draws.size(); ++k) {
      const auto& d = draws[k];
      if (d.path.size() != grid.size())
        throw ValidationError("posterior draws do not carry latent paths");
      const double sd = std::sqrt(d.sigma2_s);
      const double ex = rng.normal();
      const double ey = rng.normal();
      cloud[k] = {d.path[*j].x + sd * ex, d.path[*j].y + sd * ey};
    }
    total += predictive_log_density(cloud, fix.location, bandwidth_scale);
  }
  return -total / static_cast<double>(holdout.fixes.size());
}

double ScoreReport::pooled() const {
  if (fold_scores.empty()) return 0.0;
  return std::accumulate(fold_scores.begin(), fold_scores.end(), 0.0) /
         static_cast<double>(fold_scores.size());
}

ScoreReport cross_validate(const std::string& model, const TelemetrySet& data, const ModelSpec& spec,
                           const ChainConfig& chain, const FoldPlan& plan, double bandwidth_scale) {
  if (plan.assignment.size() != data.size())
    throw ValidationError("fold plan covers " + std::to_string(plan.assignment.size()) +
                          " observations but the data has " + std::to_string(data.size()));
  ChainConfig cfg = chain;
  cfg.store_paths = true;
  ScoreReport report;
  report.model = model;
  report.scheme = plan.scheme;
  report.fold_scores.assign(plan.k, 0.0);
  std::vector<std::exception_ptr> errors(plan.k);
  const auto k = static_cast<std::ptrdiff_t>(plan.k);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t f = 0; f < k; ++f) {
    try {
      const auto fold = static_cast<std::size_t>(f);
      const auto train_idx = plan.complement(fold);
      const auto hold_idx = plan.members(fold);
      const TelemetrySet train = data.subset(train_idx);
      const TelemetrySet hold = data.subset(hold_idx);
      ChainConfig c = cfg;
      c.stream = cfg.stream + fold + 1;
      const PosteriorSamples s = run_chain(train, spec, c);
      report.fold_scores[fold] = score_fold(s, hold, Rng(cfg.seed, 1000 + fold).next_u64(), bandwidth_scale);
    } catch (...) {
      errors[static_cast<std::size_t>(f)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return report;
}

Ranking compare_models(std::span<const ScoreReport> reports) {
  if (reports.size() < 2) throw ValidationError("comparison needs at least two score reports");
  const auto& ref = reports.front();
  for (const auto& r : reports) {
    if (r.fold_scores.size() != ref.fold_scores.size() || r.scheme != ref.scheme)
      throw ValidationError("score reports for '" + ref.model + "' and '" + r.model +
                            "' use different fold plans");
  }
  const std::size_t n = reports.size(), k = ref.fold_scores.size();
  std::vector<std::size_t> wins(n, 0);
  for (std::size_t f = 0; f < k; ++f) {
    double best = reports[0].fold_scores[f];
    for (const auto& r : reports) best = std::min(best, r.fold_scores[f]);
    for (std::size_t i = 0; i < n; ++i)
      if (reports[i].fold_scores[f] == best) ++wins[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return reports[a].pooled() < reports[b].pooled(); });
  Ranking out;
  for (auto i : order) {
    out.models.push_back(reports[i].model);
    out.pooled.push_back(reports[i].pooled());
    out.fold_wins.push_back(wins[i]);
  }
  out.tie = out.pooled[0] == out.pooled[1];
  return out;
}

}  // namespace recharge
