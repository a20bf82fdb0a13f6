#include <doctest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <string>

#include "fixtures.hpp"
#include "recharge/errors.hpp"
#include "recharge/normal.hpp"
#include "recharge/simulator.hpp"

using namespace recharge;

namespace {

// Asymptotic Kolmogorov tail with the usual small-sample correction.
double ks_pvalue(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double f = normal_cdf(u[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double q = 0.0;
  for (int k = 1; k < 100; ++k) q += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
  return std::clamp(q, 0.0, 1.0);
}

SimulationScenario wide_walk(std::size_t m, double g0, std::vector<double> theta, std::uint64_t seed) {
  static PatchLandscape land = make_patch_landscape(Polygon{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}}, 40.0, 0.5);
  SimulationScenario sc;
  sc.grid = TimeGrid::uniform(m, 0.05);
  sc.start = {0.0, 0.0};
  sc.truth.beta = {};
  sc.truth.sigma2_s = 1e-4;
  sc.truth.sigma2_0 = 0.02;
  sc.truth.sigma2_1 = 0.03;
  sc.g0 = g0;
  sc.theta = std::move(theta);
  sc.w_fields = {land.indicator};
  sc.obs_indices = every_kth(m, 10);
  sc.seed = seed;
  return sc;
}

SimulationScenario study(std::uint64_t seed) {
  static PatchLandscape land = default_patch_landscape();
  return recharge_study_scenario(land, StudyDesign{}, seed);
}

}  // namespace

TEST_CASE("frozen path with zero movement variance") {
  auto sc = wide_walk(200, -1.0, {-1.0, 4.0}, 3);
  sc.truth.sigma2_0 = 0.0;
  sc.truth.sigma2_1 = 0.0;
  auto r = simulate(sc);
  for (auto p : r.path) CHECK(p == sc.start);
  int ones = 0;
  for (auto z : r.recharge.z) ones += z;
  CHECK(ones > 0);  // decisions still random
  CHECK(r.telemetry.size() == 20);
  CHECK(r.telemetry.fixes[3].location != sc.start);
}

TEST_CASE("charged walker never recharges and diffuses at sigma0") {
  auto sc = wide_walk(100001, 8.0, {0.0, 0.0}, 11);
  auto r = simulate(sc);
  CHECK(std::all_of(r.recharge.z.begin(), r.recharge.z.end(), [](auto z) { return z == 0; }));
  double ss = 0.0;
  for (std::size_t j = 1; j < r.path.size(); ++j) ss += squared_norm(r.path[j] - r.path[j - 1]);
  const double var = ss / (2.0 * static_cast<double>(r.path.size() - 1));
  CHECK(std::abs(var / (0.02 * 0.05) - 1.0) < 0.05);
}

TEST_CASE("simulation is bit reproducible") {
  auto a = simulate(study(5));
  auto b = simulate(study(5));
  auto c = simulate(study(6));
  CHECK(a.path == b.path);
  CHECK(a.recharge.z == b.recharge.z);
  CHECK(a.recharge.g == b.recharge.g);
  CHECK(a.path != c.path);
}

TEST_CASE("recharge rates inside and outside the patch") {
  auto sc = study(1);
  auto r = simulate(sc);
  const auto& ind = *sc.w_fields[0];
  auto rc = empirical_rate_check(r.recharge, r.path, sc.grid, ind);
  REQUIRE_FALSE(rc.partial);
  CHECK(std::abs(*rc.inside_rate - 3.0) < 1e-9);
  CHECK(std::abs(*rc.outside_rate + 1.0) < 1e-9);

  // Same path re-accumulated with other coefficients.
  for (auto theta : {std::vector<double>{0.0, 0.0}, std::vector<double>{0.4, -2.5}}) {
    RechargeState other = r.recharge;
    other.g = recharge_series(r.path, sc.grid, sc.w_fields, theta, 0.0);
    auto o = empirical_rate_check(other, r.path, sc.grid, ind);
    CHECK(std::abs(*o.inside_rate - (theta[0] + theta[1])) < 1e-9);
    CHECK(std::abs(*o.outside_rate - theta[0]) < 1e-9);
  }

  // A walker that never reaches the patch gives a partial result.
  auto far = wide_walk(50, 0.0, {-1.0, 4.0}, 2);
  far.start = {20.0, 20.0};
  auto rf = simulate(far);
  auto p = empirical_rate_check(rf.recharge, rf.path, far.grid, *far.w_fields[0]);
  CHECK(p.partial);
  CHECK_FALSE(p.inside_rate);
}

TEST_CASE("recharge level follows the likelihood's cumulative rule") {
  auto sc = study(8);
  auto r = simulate(sc);
  auto g = recharge_series(r.path, sc.grid, sc.w_fields, sc.theta, sc.g0);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(g[j] - r.recharge.g[j]) < 1e-10);
  CHECK(r.recharge.g[0] == sc.g0);
}

TEST_CASE("decisions match the probit link") {
  // Pool steps from many tracks and bin by predicted probability.
  const int bins = 10;
  std::vector<double> expected(bins), variance(bins), observed(bins);
  for (std::uint64_t s = 0; s < 60; ++s) {
    auto r = simulate(study(1000 + s));
    for (std::size_t j = 0; j < r.recharge.z.size(); ++j) {
      const double p = decision_prob(r.recharge.g[j]);
      const int b = std::min(bins - 1, static_cast<int>(p * bins));
      expected[b] += p;
      variance[b] += p * (1 - p);
      observed[b] += r.recharge.z[j];
    }
  }
  double chi2 = 0.0;
  int df = 0;
  for (int b = 0; b < bins; ++b)
    if (variance[b] > 1.0) {
      chi2 += (observed[b] - expected[b]) * (observed[b] - expected[b]) / variance[b];
      ++df;
    }
  REQUIRE(df >= 3);
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), chi2));
  CHECK(p > 0.01);
}

TEST_CASE("driftless steps are gaussian with variance sigma0^2 dt") {
  std::vector<double> u;
  for (std::uint64_t s = 0; u.size() < 10000; ++s) {
    auto sc = study(500 + s);
    auto r = simulate(sc);
    for (std::size_t j = 1; j < r.path.size() && u.size() < 10000; ++j)
      if (r.recharge.z[j] == 0) u.push_back((r.path[j].x - r.path[j - 1].x) / std::sqrt(0.02 * sc.grid.delta(j)));
  }
  CHECK(ks_pvalue(u) > 0.01);
}

TEST_CASE("leaving the study area names the step") {
  auto sc = wide_walk(400, -1.0, {0.0, 0.0}, 4);
  sc.start = {39.0, 0.0};
  sc.truth.sigma2_0 = 4.0;
  sc.truth.sigma2_1 = 4.0;
  try {
    simulate(sc);
    FAIL("expected OutOfBoundsError");
  } catch (const OutOfBoundsError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("scenario validation") {
  auto sc = study(1);
  sc.theta = {-1.0};
  CHECK_THROWS_AS(simulate(sc), ValidationError);
  sc = study(1);
  sc.obs_indices = {0, 5, 5};
  CHECK_THROWS_AS(simulate(sc), ValidationError);
  CHECK(every_kth(10, 3) == std::vector<std::size_t>{0, 3, 6, 9});
  CHECK_THROWS_AS(every_kth(10, 0), ValidationError);
}
