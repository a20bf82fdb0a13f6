#pragma once

namespace recharge {

// Standard normal CDF via erfc.
double normal_cdf(double x);

// log Phi(x), finite for every finite x. Uses a Mills-ratio expansion in the
// far lower tail where erfc underflows.
double log_normal_cdf(double x);

// Probability of choosing to recharge given the recharge level: 1 - Phi(g).
double decision_prob(double g);

// log P(z | g) with P(z = 1 | g) = 1 - Phi(g).
inline double log_decision_prob(bool z, double g) {
  return z ? log_normal_cdf(-g) : log_normal_cdf(g);
}

}  // namespace recharge
