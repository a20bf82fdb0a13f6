#include "recharge/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "recharge/errors.hpp"
#include "recharge/normal.hpp"

namespace recharge {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::recharge_full: return "recharge_full";
    case Variant::recharge_reduced: return "recharge_reduced";
    case Variant::m1_only: return "m1_only";
    case Variant::m0_only: return "m0_only";
  }
  return "unknown";
}

Variant parse_variant(const std::string& s) {
  if (s == "recharge_full") return Variant::recharge_full;
  if (s == "recharge_reduced") return Variant::recharge_reduced;
  if (s == "m1_only") return Variant::m1_only;
  if (s == "m0_only") return Variant::m0_only;
  throw ValidationError("unknown model variant '" + s + "'");
}

std::optional<std::uint8_t> fixed_decision(Variant v) {
  if (v == Variant::m1_only) return 1;
  if (v == Variant::m0_only) return 0;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ValidationError("time grid needs at least 2 points");
  for (std::size_t j = 0; j < times_.size(); ++j) {
    if (!std::isfinite(times_[j])) throw ValidationError("time grid contains a non-finite time");
    if (j > 0 && !(times_[j] > times_[j - 1]))
      throw ValidationError("time grid is not strictly increasing at index " + std::to_string(j));
  }
}

TimeGrid TimeGrid::uniform(std::size_t m, double dt, double t0) {
  if (!(dt > 0.0)) throw ValidationError("grid spacing must be positive");
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j) t[j] = t0 + dt * static_cast<double>(j);
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::covering(std::span<const double> obs, std::size_t m) {
  const std::size_t n = obs.size();
  if (n < 2) throw ValidationError("need at least 2 observation times to build a grid");
  if (m < n) throw ValidationError("grid size m must be at least the number of observations");
  for (std::size_t i = 1; i < n; ++i)
    if (!(obs[i] > obs[i - 1])) throw ValidationError("observation times must be strictly increasing");

  // Largest-remainder apportionment of the m - n extra points over the gaps.
  const std::size_t extra = m - n;
  const double span = obs[n - 1] - obs[0];
  std::vector<std::size_t> per_gap(n - 1, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double share = static_cast<double>(extra) * (obs[i + 1] - obs[i]) / span;
    per_gap[i] = static_cast<std::size_t>(std::floor(share));
    assigned += per_gap[i];
    remainders.emplace_back(share - std::floor(share), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < extra; ++k, ++assigned) ++per_gap[remainders[k].second];

  std::vector<double> t;
  t.reserve(m);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.push_back(obs[i]);
    const double step = (obs[i + 1] - obs[i]) / static_cast<double>(per_gap[i] + 1);
    for (std::size_t k = 1; k <= per_gap[i]; ++k) t.push_back(obs[i] + step * static_cast<double>(k));
  }
  t.push_back(obs[n - 1]);
  return TimeGrid(std::move(t));
}

std::optional<std::size_t> TimeGrid::find(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  std::optional<std::size_t> best;
  if (it != times_.end() && std::abs(*it - t) <= tol) best = static_cast<std::size_t>(it - times_.begin());
  if (!best && it != times_.begin() && std::abs(*(it - 1) - t) <= tol)
    best = static_cast<std::size_t>(it - times_.begin() - 1);
  return best;
}

// ---------------------------------------------------------------------------
// Telemetry

std::vector<double> TelemetrySet::times() const {
  std::vector<double> t;
  t.reserve(fixes.size());
  for (const auto& f : fixes) t.push_back(f.time);
  return t;
}

void TelemetrySet::validate() const {
  if (fixes.size() < 2) throw ValidationError("telemetry needs at least 2 fixes");
  for (std::size_t i = 0; i < fixes.size(); ++i) {
    const auto& f = fixes[i];
    if (!std::isfinite(f.time) || !std::isfinite(f.location.x) || !std::isfinite(f.location.y))
      throw ValidationError("telemetry fix " + std::to_string(i) + " is not finite");
    if (i > 0 && !(f.time > fixes[i - 1].time))
      throw ValidationError("telemetry times not strictly increasing at fix " + std::to_string(i));
  }
}

TelemetrySet TelemetrySet::subset(std::span<const std::size_t> indices) const {
  TelemetrySet out;
  out.fixes.reserve(indices.size());
  for (auto i : indices) out.fixes.push_back(fixes.at(i));
  return out;
}

ObservationIndex::ObservationIndex(const TelemetrySet& data, const TimeGrid& grid)
    : at_(grid.size()) {
  for (std::size_t i = 0; i < data.fixes.size(); ++i) {
    auto j = grid.find(data.fixes[i].time);
    if (!j)
      throw ValidationError("observation time " + std::to_string(data.fixes[i].time) +
                            " (fix " + std::to_string(i) + ") is not a grid point");
    if (at_[*j]) throw ValidationError("two observations map to grid index " + std::to_string(*j));
    at_[*j] = data.fixes[i].location;
    ++count_;
  }
}

void MovementParams::validate() const {
  if (!(sigma2_s > 0.0) || !(sigma2_0 > 0.0) || !(sigma2_1 > 0.0))
    throw ValidationError("movement variances must be positive");
}

// ---------------------------------------------------------------------------
// Priors

double InverseGammaPrior::variance() const {
  return scale * scale / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0));
}

double InverseGammaPrior::log_density(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double GaussianPrior::log_density(std::span<const double> x) const {
  double lp = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - mean[k];
    lp += -0.5 * std::log(2.0 * std::numbers::pi * variance[k]) - 0.5 * d * d / variance[k];
  }
  return lp;
}

GaussianPrior GaussianPrior::broadcast(std::size_t n) const {
  if (mean.size() == n && variance.size() == n) return *this;
  if (mean.size() > 1 || variance.size() > 1 || mean.empty() || variance.empty())
    throw ValidationError("Gaussian prior has " + std::to_string(mean.size()) +
                          " components but " + std::to_string(n) + " are required");
  return GaussianPrior{std::vector<double>(n, mean[0]), std::vector<double>(n, variance[0])};
}

void PriorSpec::validate() const {
  for (const auto* ig : {&sigma2_s, &sigma2_0, &sigma2_1}) {
    if (!(ig->shape > 2.0)) throw ValidationError("inverse-gamma shapes must exceed 2");
    if (!(ig->scale > 0.0)) throw ValidationError("inverse-gamma scales must be positive");
  }
  for (const auto* g : {&beta, &theta}) {
    if (g->mean.size() != g->variance.size())
      throw ValidationError("Gaussian prior mean and variance lengths differ");
    for (double v : g->variance)
      if (!(v > 0.0)) throw ValidationError("Gaussian prior variances must be positive");
  }
  if (!(g0_var > 0.0)) throw ValidationError("g0 prior variance must be positive");
}

PriorSpec PriorSpec::broadcast(std::size_t n_beta, std::size_t n_theta) const {
  PriorSpec out = *this;
  out.beta = n_beta ? beta.broadcast(n_beta) : GaussianPrior{};
  out.theta = n_theta ? theta.broadcast(n_theta) : GaussianPrior{};
  return out;
}

PriorSpec PriorSpec::simulation_defaults() {
  PriorSpec p;
  p.sigma2_s = {2.000122, 3.000122e-5};
  p.sigma2_0 = {2.003556, 0.06007113};
  p.sigma2_1 = {2.008019, 0.09024058};
  // Standard deviation 50 on the standardized covariate scale.
  p.beta = {{0.0}, {2500.0}};
  p.theta = {{0.0}, {1000.0}};
  p.g0_mean = 0.0;
  p.g0_var = 1.0;
  return p;
}

PriorSpec PriorSpec::mountain_lion() {
  PriorSpec p;
  p.sigma2_s = {4.479787, 54.79787};
  p.sigma2_0 = {4.479815, 21919260.0};
  p.sigma2_1 = {4.479815, 21919260.0};
  p.beta = {{0.0}, {2.5e7}};
  p.theta = {{0.0}, {532.0}};
  p.g0_mean = 0.0;
  p.g0_var = 1.0;
  return p;
}

PriorSpec PriorSpec::african_buffalo() {
  PriorSpec p;
  p.sigma2_s = {2.266181, 3.266181};
  p.sigma2_0 = {4.479815, 493183.4};
  p.sigma2_1 = {4.479815, 493183.4};
  p.beta = {{0.0}, {1e4}};
  p.theta = {{0.0}, {359.0}};
  p.g0_mean = 0.0;
  p.g0_var = 1.0;
  return p;
}

void ModelSpec::validate() const {
  if (grid.size() < 2) throw ValidationError("model grid needs at least 2 points");
  prior.validate();
  if (prior.beta.mean.size() != n_beta())
    throw ValidationError("beta prior length does not match the movement covariates");
  if (prior.theta.mean.size() != n_theta())
    throw ValidationError("theta prior length does not match the recharge covariates");
  for (const auto& f : movement)
    if (!f) throw ValidationError("null movement covariate");
  for (const auto& f : recharge)
    if (!f) throw ValidationError("null recharge covariate");
}

// ---------------------------------------------------------------------------
// Densities and the recharge accumulator

double landscape_value(Point mu, std::span<const FieldPtr> w_fields, std::span<const double> theta) {
  double v = theta[0];
  for (std::size_t k = 0; k < w_fields.size(); ++k) v += theta[k + 1] * w_fields[k]->interpolate(mu);
  return v;
}

std::vector<double> recharge_series(std::span<const Point> path, const TimeGrid& grid,
                                    std::span<const FieldPtr> w_fields,
                                    std::span<const double> theta, double g0) {
  if (theta.size() != w_fields.size() + 1)
    throw ValidationError("theta must hold an intercept plus one coefficient per recharge covariate");
  if (path.size() != grid.size()) throw ValidationError("path and grid sizes differ");
  std::vector<double> g(path.size());
  double acc = g0;
  for (std::size_t j = 0; j < path.size(); ++j) {
    g[j] = acc;
    if (j + 1 < path.size()) acc += grid.weight(j) * landscape_value(path[j], w_fields, theta);
  }
  return g;
}

void recharge_shift_after(std::size_t j, double old_term, double new_term, std::span<double> g) {
  const double shift = new_term - old_term;
  if (shift == 0.0) return;
  for (std::size_t l = j + 1; l < g.size(); ++l) g[l] += shift;
}

Point drift(Point mu, std::span<const double> beta, std::span<const FieldPtr> x_fields) {
  Point d{0.0, 0.0};
  for (std::size_t k = 0; k < x_fields.size(); ++k) d += -beta[k] * x_fields[k]->gradient(mu);
  return d;
}

double isotropic_logdensity(Point next, Point mean, double var) {
  return -std::log(2.0 * std::numbers::pi * var) - 0.5 * squared_norm(next - mean) / var;
}

double transition_logdensity(Point mu_prev, Point mu_next, bool z, const MovementParams& params,
                             double dt, std::span<const FieldPtr> x_fields) {
  if (!(dt > 0.0)) throw ValidationError("transition needs a positive time step");
  if (!z) return isotropic_logdensity(mu_next, mu_prev, params.sigma2_0 * dt);
  for (const auto& f : x_fields)
    if (!f->can_differentiate(mu_prev)) return -std::numeric_limits<double>::infinity();
  const Point mean = mu_prev + dt * drift(mu_prev, params.beta, x_fields);
  return isotropic_logdensity(mu_next, mean, params.sigma2_1 * dt);
}

double obs_logdensity(Point s, Point mu, double sigma2_s) {
  return isotropic_logdensity(s, mu, sigma2_s);
}

LogPosteriorTerms joint_logposterior_terms(const ChainState& state, const ObservationIndex& data,
                                           const ModelSpec& spec) {
  const std::size_t m = spec.grid.size();
  const auto& mv = state.movement;
  const auto& rc = state.recharge;
  if (state.path.size() != m || rc.z.size() != m || data.grid_size() != m)
    throw NumericError("chain state does not match the time grid");

  const Variant variant = spec.variant;
  const std::span<const FieldPtr> x_fields =
      has_drift(variant) ? std::span<const FieldPtr>(spec.movement) : std::span<const FieldPtr>();

  LogPosteriorTerms terms;
  for (std::size_t j = 0; j < m; ++j)
    if (const auto& s = data.at(j)) terms.observation += obs_logdensity(*s, state.path[j], mv.sigma2_s);

  if (auto fixed = fixed_decision(variant)) {
    for (std::size_t j = 0; j < m; ++j)
      if (rc.z[j] != *fixed) throw NumericError("decision vector violates the fixed-decision variant");
  }
  for (std::size_t j = 1; j < m; ++j)
    terms.transition += transition_logdensity(state.path[j - 1], state.path[j], rc.z[j] != 0, mv,
                                              spec.grid.delta(j), x_fields);

  if (has_recharge(variant)) {
    const auto expected = recharge_series(state.path, spec.grid, spec.recharge, rc.theta, rc.g0);
    if (rc.g.size() != m) throw NumericError("cached recharge series has the wrong length");
    for (std::size_t j = 0; j < m; ++j) {
      if (std::abs(expected[j] - rc.g[j]) > 1e-8 * (1.0 + std::abs(expected[j])))
        throw NumericError("cached recharge series is inconsistent with the path at index " +
                           std::to_string(j));
    }
    for (std::size_t j = 0; j < m; ++j) terms.decision += log_decision_prob(rc.z[j] != 0, rc.g[j]);
    terms.prior += spec.prior.theta.log_density(rc.theta);
    const double d = rc.g0 - spec.prior.g0_mean;
    terms.prior += -0.5 * std::log(2.0 * std::numbers::pi * spec.prior.g0_var) -
                   0.5 * d * d / spec.prior.g0_var;
  }

  terms.prior += spec.prior.sigma2_s.log_density(mv.sigma2_s);
  if (variant != Variant::m1_only) terms.prior += spec.prior.sigma2_0.log_density(mv.sigma2_0);
  if (variant != Variant::m0_only) terms.prior += spec.prior.sigma2_1.log_density(mv.sigma2_1);
  if (has_drift(variant)) terms.prior += spec.prior.beta.log_density(mv.beta);
  return terms;
}

double joint_logposterior(const ChainState& state, const ObservationIndex& data,
                          const ModelSpec& spec) {
  return joint_logposterior_terms(state, data, spec).total();
}

}  // namespace recharge
