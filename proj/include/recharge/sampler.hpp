#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recharge/kernels.hpp"
#include "recharge/model.hpp"
#include "recharge/rng.hpp"

namespace recharge {

struct AdaptationSettings {
  double target_position = 0.44;
  double target_block = 0.234;
  // Burn-in sweeps before block proposals switch to the empirical covariance.
  std::size_t shaping_start = 1000;
  // Robbins-Monro gain (n + 1)^-decay.
  double decay = 0.6;
};

struct ChainConfig {
  std::size_t n_iter = 20000;
  std::size_t n_burn = 10000;
  std::size_t thin = 10;
  AdaptationSettings adapt;
  bool random_scan = false;
  bool store_paths = true;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;

  void validate() const;
  std::size_t retained() const { return (n_iter - n_burn) / thin; }
};

struct ParameterDraw {
  std::size_t iteration = 0;
  std::vector<double> beta;
  std::vector<double> theta;
  double g0 = 0.0;
  double sigma2_s = 0.0;
  double sigma2_0 = 0.0;
  double sigma2_1 = 0.0;
  // Present when ChainConfig::store_paths is set.
  std::vector<Point> path;
  std::vector<double> g;
  std::vector<std::uint8_t> z;
};

struct AcceptanceCounter {
  std::size_t proposed = 0;
  std::size_t accepted = 0;

  void record(bool ok) {
    ++proposed;
    accepted += ok ? 1 : 0;
  }
  double rate() const {
    return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  }
};

// Acceptance counts after burn-in, per update family.
struct AcceptanceReport {
  AcceptanceCounter position;
  AcceptanceCounter movement_block;
  AcceptanceCounter recharge_block;
};

struct PosteriorSamples {
  Variant variant = Variant::recharge_full;
  std::vector<std::string> beta_names;
  std::vector<std::string> theta_names;  // "intercept" first
  std::vector<ScaleRecord> beta_scales;
  std::vector<double> times;
  std::vector<ParameterDraw> draws;
  AcceptanceReport acceptance;
};

// Conjugate draw: IG(q_s + n, r_s + sum of squared residuals / 2).
double draw_sigma_s(std::span<const Point> path, const ObservationIndex& data,
                    const InverseGammaPrior& prior, Rng& rng);

// Random-walk proposal with Robbins-Monro scale and, after a warm-up, an
// empirical-covariance shape.
class BlockProposal {
 public:
  BlockProposal() = default;
  explicit BlockProposal(Eigen::VectorXd initial_sd);

  std::size_t dim() const { return static_cast<std::size_t>(chol_.rows()); }
  Eigen::VectorXd propose(const Eigen::VectorXd& current, Rng& rng) const;
  void adapt_scale(bool accepted, double gain, double target);
  void observe(const Eigen::VectorXd& value);
  // Replaces the shape with the running covariance of observed values.
  void reshape();

  void write(std::ostream& os) const;
  void read(std::istream& is);

 private:
  Eigen::MatrixXd chol_;  // lower Cholesky factor of the shape matrix
  double log_scale_ = 0.0;
  std::size_t n_obs_ = 0;
  bool shaped_ = false;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

class Sampler {
 public:
  Sampler(ModelSpec spec, const TelemetrySet& data, ChainConfig config);

  const ModelSpec& spec() const { return spec_; }
  const ChainConfig& config() const { return config_; }
  const ObservationIndex& observations() const { return obs_; }
  const ChainState& state() const { return state_; }
  std::size_t iteration() const { return iteration_; }
  Rng& rng() { return rng_; }

  // Replaces the chain state and rebuilds every cache (g is recomputed).
  void set_state(ChainState state);

  // Individual updates, in sweep order.
  void update_sigma_s();
  bool update_position(std::size_t j);
  void update_decisions();
  bool update_movement_block();
  bool update_recharge_block();

  // One full sweep with adaptation when still in burn-in.
  void sweep();
  // Runs until n_iter sweeps have been done, returning the draws retained
  // along the way.
  PosteriorSamples run();

  // Log Metropolis ratios computed from cached local terms; -inf when a
  // proposal leaves the covariates.
  double position_log_ratio(std::size_t j, Point proposal);
  // Coordinates are (log sigma2_0, log sigma2_1, beta) restricted to the
  // parameters the variant uses; the log-Jacobian is included.
  double movement_log_ratio(const Eigen::VectorXd& proposal) const;
  double recharge_log_ratio(const Eigen::VectorXd& proposal);
  Eigen::VectorXd movement_coordinates() const;
  Eigen::VectorXd recharge_coordinates() const;
  MovementParams movement_from_coordinates(const Eigen::VectorXd& v) const;
  // Full-conditional P(z_j = 1 | rest) for every j.
  std::vector<double> decision_probabilities() const;

  double position_scale(std::size_t j) const { return std::exp(position_log_scale_[j]); }
  const AcceptanceReport& acceptance() const { return acceptance_; }

  void save_checkpoint(std::ostream& os) const;
  void load_checkpoint(std::istream& is);

 private:
  void initialize(const TelemetrySet& data);
  void rebuild_caches();
  bool in_domain(Point p) const;
  void evaluate_covariates(Point p, Point* grads, double* wvals) const;
  double transition(Point prev, Point next, bool z, const Point* prev_grads, double dt) const;
  double movement_target(const Eigen::VectorXd& v) const;
  double recharge_target(const Eigen::VectorXd& v, std::span<double> landscape,
                         std::span<double> g, std::span<double> terms) const;
  kernels::TransitionInputs transition_inputs() const;
  ParameterDraw make_draw() const;
  double gain() const;
  bool adapting() const { return iteration_ < config_.n_burn; }

  ModelSpec spec_;
  ChainConfig config_;
  ObservationIndex obs_;
  ChainState state_;
  Rng rng_;
  std::size_t iteration_ = 0;
  std::size_t m_ = 0;
  std::size_t n_beta_ = 0;
  std::size_t n_theta_ = 0;

  std::vector<double> dts_;
  std::vector<Point> grads_;       // m x n_beta
  std::vector<double> wvals_;      // m x n_theta, intercept column first
  std::vector<double> landscape_;  // w'(mu_j) theta
  std::vector<double> dec_terms_;  // log P(z_j | g_j)
  std::vector<double> scratch_;
  std::vector<Point> prop_grads_;
  std::vector<double> prop_wvals_;

  std::vector<double> position_log_scale_;
  BlockProposal movement_proposal_;
  BlockProposal recharge_proposal_;
  AcceptanceReport acceptance_;
};

PosteriorSamples run_chain(const TelemetrySet& data, const ModelSpec& spec, const ChainConfig& config);

// Linear interpolation of the fixes onto the grid, constant beyond the ends.
std::vector<Point> interpolate_path(const TelemetrySet& data, const TimeGrid& grid);

}  // namespace recharge
