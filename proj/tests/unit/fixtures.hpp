#pragma once
// Small shared landscapes and states for the unit tests.
#include <cmath>
#include <memory>
#include <vector>

#include "recharge/model.hpp"
#include "recharge/raster.hpp"
#include "recharge/rng.hpp"
#include "recharge/simulator.hpp"

namespace fx {

using namespace recharge;

// Field whose value at a cell center is f(x, y).
template <class F>
inline FieldPtr field_from(const std::string& name, std::size_t n, double origin, double cell, F f) {
  std::vector<double> v(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double x = origin + (static_cast<double>(c) + 0.5) * cell;
      const double y = origin + (static_cast<double>(n - 1 - r) + 0.5) * cell;
      v[r * n + c] = f(x, y);
    }
  return std::make_shared<const CovariateField>(name, n, n, origin, origin, cell, std::move(v));
}

// Patch landscape on [-2, 2]^2 with a 0.6 x 0.6 patch at the origin, plus a
// smooth second movement covariate.
struct Small {
  PatchLandscape land = make_patch_landscape(Polygon{{{-0.3, -0.3}, {0.3, -0.3}, {0.3, 0.3}, {-0.3, 0.3}}},
                                             2.0, 0.05);
  FieldPtr smooth = field_from("smooth", 80, -2.0, 0.05,
                               [](double x, double y) { return std::sin(x) * std::cos(0.7 * y) + 0.3 * x; });
  FieldPtr ramp = field_from("ramp", 80, -2.0, 0.05, [](double x, double y) { return 0.5 * x - 0.2 * y; });
};

inline Small& small() {
  static Small s;
  return s;
}

// Telemetry on every k-th point of a uniform grid from a short simulated track.
struct Problem {
  ModelSpec spec;
  TelemetrySet data;
  SimulationResult sim;
};

inline Problem small_problem(Variant v, std::size_t m = 40, std::uint64_t seed = 7, std::size_t every = 3) {
  auto& s = small();
  Problem p;
  SimulationScenario sc;
  sc.grid = TimeGrid::uniform(m, 0.05);
  sc.start = {0.8, 0.5};
  sc.truth.beta = {1.0, 0.3};
  sc.truth.sigma2_s = 1e-4;
  sc.truth.sigma2_0 = 0.02;
  sc.truth.sigma2_1 = 0.03;
  sc.g0 = -0.5;
  sc.theta = {-1.0, 4.0, 0.5};
  sc.w_fields = {s.land.indicator, s.ramp};
  sc.x_fields = {s.land.distance, s.smooth};
  sc.obs_indices = every_kth(m, every);
  sc.seed = seed;
  p.sim = simulate(sc);
  p.data = p.sim.telemetry;
  p.spec.grid = sc.grid;
  p.spec.variant = v;
  if (has_drift(v)) p.spec.movement = sc.x_fields;
  if (has_recharge(v)) p.spec.recharge = sc.w_fields;
  p.spec.prior = PriorSpec::simulation_defaults().broadcast(p.spec.n_beta(), p.spec.n_theta());
  return p;
}

// Random but valid chain state near the simulated truth.
inline ChainState random_state(const Problem& p, Rng& rng) {
  ChainState st;
  const auto m = p.spec.grid.size();
  st.path = p.sim.path;
  for (auto& q : st.path) q += Point{0.05 * rng.normal(), 0.05 * rng.normal()};
  st.movement.beta.resize(p.spec.n_beta());
  for (auto& b : st.movement.beta) b = rng.normal();
  st.movement.sigma2_s = 1e-4 * std::exp(0.3 * rng.normal());
  st.movement.sigma2_0 = 0.02 * std::exp(0.3 * rng.normal());
  st.movement.sigma2_1 = 0.03 * std::exp(0.3 * rng.normal());
  st.recharge.g0 = rng.normal();
  st.recharge.theta.resize(p.spec.n_theta());
  for (auto& t : st.recharge.theta) t = 2.0 * rng.normal();
  st.recharge.z.resize(m);
  auto fixed = fixed_decision(p.spec.variant);
  for (auto& z : st.recharge.z) z = fixed ? *fixed : (rng.bernoulli(0.5) ? 1 : 0);
  if (has_recharge(p.spec.variant))
    st.recharge.g = recharge_series(st.path, p.spec.grid, p.spec.recharge, st.recharge.theta, st.recharge.g0);
  else
    st.recharge.g.assign(m, 0.0);
  return st;
}

inline void refresh_g(const ModelSpec& spec, ChainState& st) {
  if (has_recharge(spec.variant))
    st.recharge.g = recharge_series(st.path, spec.grid, spec.recharge, st.recharge.theta, st.recharge.g0);
}

}  // namespace fx
