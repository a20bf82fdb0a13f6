#include "recharge/normal.hpp"

#include <cmath>
#include <numbers>

namespace recharge {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double decision_prob(double g) { return 0.5 * std::erfc(g * kInvSqrt2); }

double log_normal_cdf(double x) {
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x > -30.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  // Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-x) + std::log(series);
}

}  // namespace recharge
