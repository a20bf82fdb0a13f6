#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recharge/geometry.hpp"
#include "recharge/raster.hpp"

namespace recharge {

// Which mixture components are active.
//   recharge_full / recharge_reduced: latent decisions driven by the recharge
//     function (the two differ only in the covariates a run selects).
//   m1_only: every step uses the drifted kernel (z = 1 everywhere).
//   m0_only: every step is pure diffusion (z = 0 everywhere), no covariates.
enum class Variant { recharge_full, recharge_reduced, m1_only, m0_only };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

inline bool has_recharge(Variant v) {
  return v == Variant::recharge_full || v == Variant::recharge_reduced;
}
inline bool has_drift(Variant v) { return v != Variant::m0_only; }
// Decision value forced by the variant, if any.
std::optional<std::uint8_t> fixed_decision(Variant v);

// Fine time grid t_1 < ... < t_m on which the latent path lives.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> times);

  static TimeGrid uniform(std::size_t m, double dt, double t0 = 0.0);
  // m points spanning the observation times and containing each of them.
  // Extra points are spread over the gaps in proportion to gap length.
  static TimeGrid covering(std::span<const double> obs_times, std::size_t m);

  std::size_t size() const { return times_.size(); }
  double time(std::size_t j) const { return times_[j]; }
  const std::vector<double>& times() const { return times_; }

  // Length of the step ending at j (j >= 1).
  double delta(std::size_t j) const { return times_[j] - times_[j - 1]; }
  // Left-endpoint quadrature weight given to position j in the recharge sum.
  double weight(std::size_t j) const {
    return j + 1 < times_.size() ? times_[j + 1] - times_[j] : 0.0;
  }

  std::optional<std::size_t> find(double t) const;

 private:
  std::vector<double> times_;
};

struct Fix {
  double time = 0.0;
  Point location;
};

struct TelemetrySet {
  std::vector<Fix> fixes;

  std::size_t size() const { return fixes.size(); }
  std::vector<double> times() const;
  // Times strictly increasing, coordinates finite, at least 2 fixes.
  void validate() const;
  TelemetrySet subset(std::span<const std::size_t> indices) const;
};

// Observation attached to each grid index, if any.
class ObservationIndex {
 public:
  ObservationIndex() = default;
  ObservationIndex(const TelemetrySet& data, const TimeGrid& grid);

  std::size_t grid_size() const { return at_.size(); }
  std::size_t count() const { return count_; }
  const std::optional<Point>& at(std::size_t j) const { return at_[j]; }

 private:
  std::vector<std::optional<Point>> at_;
  std::size_t count_ = 0;
};

struct MovementParams {
  std::vector<double> beta;
  double sigma2_s = 1.0;
  double sigma2_0 = 1.0;
  double sigma2_1 = 1.0;

  void validate() const;
};

struct RechargeState {
  double g0 = 0.0;
  std::vector<double> theta;      // intercept first
  std::vector<double> g;          // g(t_j)
  std::vector<std::uint8_t> z;    // decisions z(t_j)
};

// IG(shape, scale) with density proportional to x^-(shape+1) exp(-scale/x).
struct InverseGammaPrior {
  double shape = 3.0;
  double scale = 1.0;

  double mode() const { return scale / (shape + 1.0); }
  double mean() const { return scale / (shape - 1.0); }
  double variance() const;
  double log_density(double x) const;
};

// Independent Gaussian components (diagonal covariance).
struct GaussianPrior {
  std::vector<double> mean;
  std::vector<double> variance;

  double log_density(std::span<const double> x) const;
  // Expands a single-entry prior to n identical components.
  GaussianPrior broadcast(std::size_t n) const;
};

struct PriorSpec {
  InverseGammaPrior sigma2_s;
  InverseGammaPrior sigma2_0;
  InverseGammaPrior sigma2_1;
  GaussianPrior beta;
  GaussianPrior theta;
  double g0_mean = 0.0;
  double g0_var = 1.0;

  void validate() const;
  PriorSpec broadcast(std::size_t n_beta, std::size_t n_theta) const;

  // Hyperparameters used for the simulated-data study.
  static PriorSpec simulation_defaults();
  static PriorSpec mountain_lion();
  static PriorSpec african_buffalo();
};

using FieldPtr = std::shared_ptr<const CovariateField>;

struct ModelSpec {
  TimeGrid grid;
  std::vector<FieldPtr> movement;  // potential-function covariates x
  std::vector<FieldPtr> recharge;  // physiological landscape covariates w
  PriorSpec prior;
  Variant variant = Variant::recharge_full;

  std::size_t n_beta() const { return has_drift(variant) ? movement.size() : 0; }
  std::size_t n_theta() const { return has_recharge(variant) ? recharge.size() + 1 : 0; }
  // Checks priors against the covariate counts (after broadcasting).
  void validate() const;
};

// Full sampler state: latent path, decisions, and all parameters.
struct ChainState {
  std::vector<Point> path;
  MovementParams movement;
  RechargeState recharge;
};

// Physiological landscape w'(mu) theta, intercept included.
double landscape_value(Point mu, std::span<const FieldPtr> w_fields, std::span<const double> theta);

// g(t_j) = g0 + sum_{l<j} weight_l * w'(mu_l) theta.
std::vector<double> recharge_series(std::span<const Point> path, const TimeGrid& grid,
                                    std::span<const FieldPtr> w_fields,
                                    std::span<const double> theta, double g0);

// Incremental form: after the cached term weight_j * w'(mu_j) theta changes
// from old_term to new_term, every later g shifts by the difference.
void recharge_shift_after(std::size_t j, double old_term, double new_term, std::span<double> g);

// Per-unit-time drift -sum_k beta_k grad x_k(mu).
Point drift(Point mu, std::span<const double> beta, std::span<const FieldPtr> x_fields);

// log N2(next; mean, var I).
double isotropic_logdensity(Point next, Point mean, double var);

// Euler-Maruyama transition log density. z = 0 ignores the covariates; z = 1
// applies drift(mu_prev) * dt. Returns -inf when mu_prev leaves a covariate.
double transition_logdensity(Point mu_prev, Point mu_next, bool z, const MovementParams& params,
                             double dt, std::span<const FieldPtr> x_fields);

double obs_logdensity(Point s, Point mu, double sigma2_s);

struct LogPosteriorTerms {
  double observation = 0.0;
  double transition = 0.0;
  double decision = 0.0;
  double prior = 0.0;

  double total() const { return observation + transition + decision + prior; }
};

// Unnormalized log posterior split by component. Throws NumericError when the
// cached recharge series or decisions disagree with the state.
LogPosteriorTerms joint_logposterior_terms(const ChainState& state, const ObservationIndex& data,
                                           const ModelSpec& spec);
double joint_logposterior(const ChainState& state, const ObservationIndex& data,
                          const ModelSpec& spec);

}  // namespace recharge
