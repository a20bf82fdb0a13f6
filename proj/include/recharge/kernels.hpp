#pragma once

// Data-parallel inner loops of the sampler and the predictive score.
//
// Each kernel exists twice: recharge::kernels::serial holds the plain
// reference loop, recharge::kernels holds the OpenMP version used in
// production. Parallel reductions sum fixed-size chunks and then combine the
// chunk partials in index order, so results do not depend on the thread
// count. They may differ from the serial reference in the last bits.

#include <cstdint>
#include <span>

#include "recharge/geometry.hpp"

namespace recharge::kernels {

// Inputs of the Euler-Maruyama transition sums. grads holds, for each grid
// index j, the K covariate gradients at path[j] (row-major, m x K).
struct TransitionInputs {
  std::span<const Point> path;
  std::span<const double> dt;  // dt[j] = t_j - t_{j-1}; dt[0] unused
  std::span<const Point> grads;
  std::size_t n_covariates = 0;
};

struct MovementValues {
  std::span<const double> beta;
  double sigma2_0 = 1.0;
  double sigma2_1 = 1.0;
};

// sum_l [log P(z_l | g_l + shift) - old_terms[l]]; new terms go to new_terms.
double decision_shift(std::span<const double> g, std::span<const std::uint8_t> z,
                      std::span<const double> old_terms, double shift,
                      std::span<double> new_terms);

// Writes log P(z_j | g_j) to terms and returns their sum.
double decision_terms(std::span<const double> g, std::span<const std::uint8_t> z,
                      std::span<double> terms);

// out[j] = sum_k wvals[j*p + k] * theta[k], p = theta.size().
void landscape_terms(std::span<const double> wvals, std::span<const double> theta,
                     std::span<double> out);

// sum_{j>=1} log N(path[j]; path[j-1] + z_j drift_{j-1} dt_j, sigma2_{z_j} dt_j I).
double movement_loglik(const TransitionInputs& in, std::span<const std::uint8_t> z,
                       const MovementValues& mv);

// Full-conditional probability that z_j = 1 for every j. Index 0 has no
// incoming transition and uses the decision prior alone.
void decision_posteriors(const TransitionInputs& in, std::span<const double> g,
                         const MovementValues& mv, std::span<double> p1);

// Product Gaussian kernel density estimate of the cloud (xs, ys) at p, in log space.
double kde_log_density(std::span<const double> xs, std::span<const double> ys, double hx,
                       double hy, Point p);

namespace serial {

double decision_shift(std::span<const double> g, std::span<const std::uint8_t> z,
                      std::span<const double> old_terms, double shift,
                      std::span<double> new_terms);
double decision_terms(std::span<const double> g, std::span<const std::uint8_t> z,
                      std::span<double> terms);
void landscape_terms(std::span<const double> wvals, std::span<const double> theta,
                     std::span<double> out);
double movement_loglik(const TransitionInputs& in, std::span<const std::uint8_t> z,
                       const MovementValues& mv);
void decision_posteriors(const TransitionInputs& in, std::span<const double> g,
                         const MovementValues& mv, std::span<double> p1);
double kde_log_density(std::span<const double> xs, std::span<const double> ys, double hx,
                       double hy, Point p);

}  // namespace serial

// Transition log density j-1 -> j under decision z (used by both versions).
double transition_term(const TransitionInputs& in, std::size_t j, bool z, const MovementValues& mv);

}  // namespace recharge::kernels
