#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "recharge/model.hpp"
#include "recharge/sampler.hpp"

namespace recharge {

enum class FoldScheme { contiguous, interleaved };

std::string to_string(FoldScheme s);
FoldScheme parse_fold_scheme(const std::string& s);

struct FoldPlan {
  std::size_t k = 0;
  FoldScheme scheme = FoldScheme::contiguous;
  std::vector<std::size_t> assignment;  // observation index -> fold id

  std::vector<std::size_t> members(std::size_t fold) const;
  std::vector<std::size_t> complement(std::size_t fold) const;
  std::vector<std::size_t> sizes() const;
  bool operator==(const FoldPlan&) const = default;
};

// Contiguous: K consecutive blocks, the first n mod K one longer.
// Interleaved: observation i goes to fold i mod K.
FoldPlan make_folds(std::size_t n, std::size_t k, FoldScheme scheme = FoldScheme::contiguous);

// 0.9 min(sd, IQR / 1.34) N^(-1/5), times scale. Falls back to sd when the
// IQR vanishes.
double silverman_bandwidth(std::span<const double> v, double scale = 1.0);

// Log of the product-Gaussian KDE of the cloud evaluated at p, floored at
// log(1e-300).
double predictive_log_density(std::span<const Point> cloud, Point p, double bandwidth_scale = 1.0);

inline constexpr std::size_t kMinScoringDraws = 50;

// Negative mean log posterior predictive density of the held-out fixes. One
// predictive draw N(mu_k(t_i), sigma2_s_k I) is made per retained posterior
// draw; the cloud is smoothed with a Silverman-bandwidth KDE. Draws must carry
// paths on `times`.
double score_fold(const PosteriorSamples& samples, const TelemetrySet& holdout, std::uint64_t seed,
                  double bandwidth_scale = 1.0);

struct ScoreReport {
  std::string model;
  FoldScheme scheme = FoldScheme::contiguous;
  std::vector<double> fold_scores;

  double pooled() const;
};

// Fits the variant K times, each time leaving one fold out of the likelihood
// (the grid keeps every observation time), and scores the held-out fixes.
// Folds run concurrently; fold f uses chain stream f + 1.
ScoreReport cross_validate(const std::string& model, const TelemetrySet& data, const ModelSpec& spec,
                           const ChainConfig& chain, const FoldPlan& plan, double bandwidth_scale = 1.0);

struct Ranking {
  std::vector<std::string> models;   // ascending pooled score
  std::vector<double> pooled;
  std::vector<std::size_t> fold_wins;  // folds on which the model scored lowest
  bool tie = false;                    // best two pooled scores equal
};

// Throws ValidationError unless there are at least two reports on the same
// fold scheme and fold count.
Ranking compare_models(std::span<const ScoreReport> reports);

}  // namespace recharge
