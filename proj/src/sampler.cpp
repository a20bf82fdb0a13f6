#include "recharge/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "recharge/errors.hpp"
#include "recharge/normal.hpp"
#include "recharge/text.hpp"

namespace recharge {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr const char* kCheckpointMagic = "recharge-checkpoint";
constexpr int kCheckpointVersion = 1;

double log_normal_density(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

void expect_token(std::istream& is, const std::string& want) {
  std::string got;
  if (!(is >> got) || got != want)
    throw ParseError("checkpoint: expected '" + want + "', found '" + got + "'");
}

void write_doubles(std::ostream& os, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) os << ' ' << text::format_double(v[i]);
}

void read_doubles(std::istream& is, double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::string tok;
    if (!(is >> tok)) throw ParseError("checkpoint: truncated numeric block");
    auto d = text::to_double(tok);
    if (!d) throw ParseError("checkpoint: bad number '" + tok + "'");
    v[i] = *d;
  }
}

}  // namespace

void ChainConfig::validate() const {
  if (thin < 1) throw ValidationError("thin must be at least 1");
  if (n_burn >= n_iter) throw ValidationError("n_burn must be smaller than n_iter");
  if (!(adapt.target_position > 0.0 && adapt.target_position < 1.0) ||
      !(adapt.target_block > 0.0 && adapt.target_block < 1.0))
    throw ValidationError("adaptation targets must lie in (0, 1)");
  if (!(adapt.decay > 0.5 && adapt.decay <= 1.0))
    throw ValidationError("adaptation decay must lie in (0.5, 1]");
}

double draw_sigma_s(std::span<const Point> path, const ObservationIndex& data,
                    const InverseGammaPrior& prior, Rng& rng) {
  double ss = 0.0;
  for (std::size_t j = 0; j < path.size(); ++j)
    if (const auto& s = data.at(j)) ss += squared_norm(*s - path[j]);
  return rng.inverse_gamma(prior.shape + static_cast<double>(data.count()), prior.scale + 0.5 * ss);
}

std::vector<Point> interpolate_path(const TelemetrySet& data, const TimeGrid& grid) {
  const auto& f = data.fixes;
  if (f.empty()) throw ValidationError("cannot initialize a path without observations");
  std::vector<Point> path(grid.size());
  std::size_t i = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid.time(j);
    while (i + 1 < f.size() && f[i + 1].time <= t) ++i;
    if (t <= f.front().time) {
      path[j] = f.front().location;
    } else if (i + 1 >= f.size()) {
      path[j] = f.back().location;
    } else {
      const double w = (t - f[i].time) / (f[i + 1].time - f[i].time);
      path[j] = (1.0 - w) * f[i].location + w * f[i + 1].location;
    }
  }
  return path;
}

// ---------------------------------------------------------------------------
// BlockProposal

BlockProposal::BlockProposal(Eigen::VectorXd initial_sd) {
  const auto d = initial_sd.size();
  chol_ = initial_sd.asDiagonal();
  mean_ = Eigen::VectorXd::Zero(d);
  m2_ = Eigen::MatrixXd::Zero(d, d);
}

Eigen::VectorXd BlockProposal::propose(const Eigen::VectorXd& current, Rng& rng) const {
  Eigen::VectorXd e(current.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = rng.normal();
  return current + std::exp(log_scale_) * (chol_ * e);
}

void BlockProposal::adapt_scale(bool accepted, double gain, double target) {
  log_scale_ += gain * ((accepted ? 1.0 : 0.0) - target);
}

void BlockProposal::observe(const Eigen::VectorXd& value) {
  ++n_obs_;
  const Eigen::VectorXd delta = value - mean_;
  mean_ += delta / static_cast<double>(n_obs_);
  m2_ += delta * (value - mean_).transpose();
}

void BlockProposal::reshape() {
  const auto d = chol_.rows();
  if (n_obs_ < static_cast<std::size_t>(2 * d + 2)) return;
  Eigen::MatrixXd cov = m2_ / static_cast<double>(n_obs_ - 1);
  const double ridge = 1e-10 * std::max(1.0, cov.diagonal().maxCoeff());
  cov += ridge * Eigen::MatrixXd::Identity(d, d);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) return;
  const bool first = shaped_ == false;
  chol_ = llt.matrixL();
  if (first) log_scale_ = std::log(2.38 / std::sqrt(static_cast<double>(d)));
  shaped_ = true;
}

void BlockProposal::write(std::ostream& os) const {
  const auto d = static_cast<std::size_t>(chol_.rows());
  os << d << ' ' << text::format_double(log_scale_) << ' ' << n_obs_ << ' ' << (shaped_ ? 1 : 0);
  write_doubles(os, chol_.data(), d * d);
  write_doubles(os, mean_.data(), d);
  write_doubles(os, m2_.data(), d * d);
  os << '\n';
}

void BlockProposal::read(std::istream& is) {
  std::size_t d = 0;
  int shaped = 0;
  std::string ls;
  if (!(is >> d >> ls >> n_obs_ >> shaped)) throw ParseError("checkpoint: bad proposal header");
  auto v = text::to_double(ls);
  if (!v) throw ParseError("checkpoint: bad proposal scale");
  log_scale_ = *v;
  shaped_ = shaped != 0;
  chol_.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  mean_.resize(static_cast<Eigen::Index>(d));
  m2_.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  read_doubles(is, chol_.data(), d * d);
  read_doubles(is, mean_.data(), d);
  read_doubles(is, m2_.data(), d * d);
}

// ---------------------------------------------------------------------------
// Sampler

Sampler::Sampler(ModelSpec spec, const TelemetrySet& data, ChainConfig config)
    : spec_(std::move(spec)), config_(config), rng_(config.seed, config.stream) {
  config_.validate();
  spec_.validate();
  data.validate();
  obs_ = ObservationIndex(data, spec_.grid);
  m_ = spec_.grid.size();
  n_beta_ = spec_.n_beta();
  n_theta_ = spec_.n_theta();
  dts_.assign(m_, 0.0);
  for (std::size_t j = 1; j < m_; ++j) dts_[j] = spec_.grid.delta(j);
  initialize(data);
}

void Sampler::initialize(const TelemetrySet& data) {
  const auto& prior = spec_.prior;
  ChainState st;
  st.path = interpolate_path(data, spec_.grid);
  st.movement.sigma2_s = prior.sigma2_s.mode();
  st.movement.sigma2_0 = prior.sigma2_0.mode();
  st.movement.sigma2_1 = prior.sigma2_1.mode();
  st.movement.beta = prior.beta.mean;
  st.recharge.g0 = has_recharge(spec_.variant) ? prior.g0_mean : 0.0;
  st.recharge.theta = prior.theta.mean;
  st.recharge.z.assign(m_, 0);
  for (std::size_t j = 0; j < m_; ++j) {
    if (!in_domain(st.path[j]))
      throw NumericError("initialization: interpolated position at grid index " + std::to_string(j) +
                         " is outside the covariates");
  }
  set_state(std::move(st));

  // Decisions start from their prior given the implied recharge level.
  if (auto fixed = fixed_decision(spec_.variant)) {
    std::fill(state_.recharge.z.begin(), state_.recharge.z.end(), *fixed);
  } else {
    for (std::size_t j = 0; j < m_; ++j)
      state_.recharge.z[j] = rng_.bernoulli(decision_prob(state_.recharge.g[j])) ? 1 : 0;
  }
  rebuild_caches();

  const auto terms = joint_logposterior_terms(state_, obs_, spec_);
  if (!std::isfinite(terms.total())) {
    std::ostringstream msg;
    msg << "initialization: non-finite log posterior (observation=" << terms.observation
        << ", transition=" << terms.transition << ", decision=" << terms.decision
        << ", prior=" << terms.prior << ")";
    throw NumericError(msg.str());
  }

  position_log_scale_.assign(m_, 0.0);
  const double move_var = spec_.variant == Variant::m1_only ? state_.movement.sigma2_1
                                                             : state_.movement.sigma2_0;
  for (std::size_t j = 0; j < m_; ++j) {
    const double dt = j > 0 ? dts_[j] : dts_[1];
    const double sd = obs_.at(j) ? std::sqrt(std::min(state_.movement.sigma2_s, move_var * dt))
                                 : 0.5 * std::sqrt(move_var * dt);
    position_log_scale_[j] = std::log(sd);
  }
  movement_proposal_ = BlockProposal(Eigen::VectorXd::Constant(movement_coordinates().size(), 0.05));
  if (n_theta_) recharge_proposal_ = BlockProposal(Eigen::VectorXd::Constant(1 + n_theta_, 0.1));
}

bool Sampler::in_domain(Point p) const {
  if (has_drift(spec_.variant))
    for (const auto& f : spec_.movement)
      if (!f->can_differentiate(p)) return false;
  if (has_recharge(spec_.variant))
    for (const auto& f : spec_.recharge)
      if (!f->can_interpolate(p)) return false;
  return true;
}

void Sampler::evaluate_covariates(Point p, Point* grads, double* wvals) const {
  for (std::size_t k = 0; k < n_beta_; ++k) grads[k] = spec_.movement[k]->gradient(p);
  if (n_theta_) {
    wvals[0] = 1.0;
    for (std::size_t k = 1; k < n_theta_; ++k) wvals[k] = spec_.recharge[k - 1]->interpolate(p);
  }
}

void Sampler::set_state(ChainState st) {
  if (st.path.size() != m_) throw ValidationError("state path length differs from the grid");
  if (st.movement.beta.size() != n_beta_) throw ValidationError("state beta has the wrong length");
  if (st.recharge.theta.size() != n_theta_) throw ValidationError("state theta has the wrong length");
  st.movement.validate();
  if (st.recharge.z.size() != m_) st.recharge.z.assign(m_, 0);
  state_ = std::move(st);
  rebuild_caches();
}

void Sampler::rebuild_caches() {
  grads_.assign(m_ * n_beta_, Point{});
  wvals_.assign(m_ * n_theta_, 0.0);
  for (std::size_t j = 0; j < m_; ++j)
    evaluate_covariates(state_.path[j], grads_.data() + j * n_beta_, wvals_.data() + j * n_theta_);
  landscape_.assign(m_, 0.0);
  dec_terms_.assign(m_, 0.0);
  scratch_.assign(m_, 0.0);
  prop_grads_.assign(n_beta_, Point{});
  prop_wvals_.assign(n_theta_, 0.0);
  auto& g = state_.recharge.g;
  g.assign(m_, 0.0);
  if (n_theta_) {
    kernels::landscape_terms(wvals_, state_.recharge.theta, landscape_);
    g[0] = state_.recharge.g0;
    for (std::size_t j = 0; j + 1 < m_; ++j) g[j + 1] = g[j] + spec_.grid.weight(j) * landscape_[j];
    kernels::decision_terms(g, state_.recharge.z, dec_terms_);
  }
}

double Sampler::transition(Point prev, Point next, bool z, const Point* prev_grads, double dt) const {
  Point mean = prev;
  double var = state_.movement.sigma2_0 * dt;
  if (z) {
    Point d{0.0, 0.0};
    for (std::size_t k = 0; k < n_beta_; ++k) d += -state_.movement.beta[k] * prev_grads[k];
    mean = prev + dt * d;
    var = state_.movement.sigma2_1 * dt;
  }
  return -kLog2Pi - std::log(var) - 0.5 * squared_norm(next - mean) / var;
}

kernels::TransitionInputs Sampler::transition_inputs() const {
  return {state_.path, dts_, grads_, n_beta_};
}

double Sampler::gain() const {
  return std::pow(static_cast<double>(iteration_) + 1.0, -config_.adapt.decay);
}

// ---------------------------------------------------------------------------
// sigma_s^2

void Sampler::update_sigma_s() {
  state_.movement.sigma2_s = draw_sigma_s(state_.path, obs_, spec_.prior.sigma2_s, rng_);
}

// ---------------------------------------------------------------------------
// Positions

double Sampler::position_log_ratio(std::size_t j, Point prop) {
  if (!in_domain(prop)) return kNegInf;
  evaluate_covariates(prop, prop_grads_.data(), prop_wvals_.data());
  const auto& path = state_.path;
  const auto& z = state_.recharge.z;
  const Point cur = path[j];
  double lr = 0.0;
  if (j >= 1) {
    const Point* g_prev = grads_.data() + (j - 1) * n_beta_;
    lr += transition(path[j - 1], prop, z[j] != 0, g_prev, dts_[j]) -
          transition(path[j - 1], cur, z[j] != 0, g_prev, dts_[j]);
  }
  if (j + 1 < m_) {
    lr += transition(prop, path[j + 1], z[j + 1] != 0, prop_grads_.data(), dts_[j + 1]) -
          transition(cur, path[j + 1], z[j + 1] != 0, grads_.data() + j * n_beta_, dts_[j + 1]);
  }
  if (const auto& s = obs_.at(j)) {
    const double s2 = state_.movement.sigma2_s;
    lr += (squared_norm(*s - cur) - squared_norm(*s - prop)) / (2.0 * s2);
  }
  if (n_theta_ && j + 1 < m_) {
    double a = 0.0;
    for (std::size_t k = 0; k < n_theta_; ++k) a += prop_wvals_[k] * state_.recharge.theta[k];
    const double shift = spec_.grid.weight(j) * (a - landscape_[j]);
    if (shift != 0.0) {
      const std::size_t n = m_ - j - 1;
      lr += kernels::decision_shift(std::span<const double>(state_.recharge.g).subspan(j + 1, n),
                                    std::span<const std::uint8_t>(z).subspan(j + 1, n),
                                    std::span<const double>(dec_terms_).subspan(j + 1, n), shift,
                                    std::span<double>(scratch_).subspan(j + 1, n));
    }
  }
  return lr;
}

bool Sampler::update_position(std::size_t j) {
  const double sd = std::exp(position_log_scale_[j]);
  const Point prop = state_.path[j] + Point{sd * rng_.normal(), sd * rng_.normal()};
  const double lr = position_log_ratio(j, prop);
  const bool accept = std::log(rng_.uniform_open()) < lr;
  if (accept) {
    state_.path[j] = prop;
    std::copy(prop_grads_.begin(), prop_grads_.end(), grads_.begin() + static_cast<std::ptrdiff_t>(j * n_beta_));
    if (n_theta_) {
      std::copy(prop_wvals_.begin(), prop_wvals_.end(), wvals_.begin() + static_cast<std::ptrdiff_t>(j * n_theta_));
      double a = 0.0;
      for (std::size_t k = 0; k < n_theta_; ++k) a += prop_wvals_[k] * state_.recharge.theta[k];
      const double shift = spec_.grid.weight(j) * (a - landscape_[j]);
      landscape_[j] = a;
      if (shift != 0.0 && j + 1 < m_) {
        auto& g = state_.recharge.g;
        for (std::size_t l = j + 1; l < m_; ++l) {
          g[l] += shift;
          dec_terms_[l] = scratch_[l];
        }
      }
    }
  }
  if (adapting())
    position_log_scale_[j] += gain() * ((accept ? 1.0 : 0.0) - config_.adapt.target_position);
  else
    acceptance_.position.record(accept);
  return accept;
}

// ---------------------------------------------------------------------------
// Decisions

std::vector<double> Sampler::decision_probabilities() const {
  std::vector<double> p(m_);
  const kernels::MovementValues mv{state_.movement.beta, state_.movement.sigma2_0,
                                   state_.movement.sigma2_1};
  kernels::decision_posteriors(transition_inputs(), state_.recharge.g, mv, p);
  return p;
}

void Sampler::update_decisions() {
  if (fixed_decision(spec_.variant)) return;
  const auto p = decision_probabilities();
  auto& z = state_.recharge.z;
  for (std::size_t j = 0; j < m_; ++j) z[j] = rng_.uniform() < p[j] ? 1 : 0;
  kernels::decision_terms(state_.recharge.g, z, dec_terms_);
}

// ---------------------------------------------------------------------------
// Movement block: (log sigma2_0, log sigma2_1, beta)

Eigen::VectorXd Sampler::movement_coordinates() const {
  const auto& mv = state_.movement;
  std::vector<double> v;
  if (spec_.variant != Variant::m1_only) v.push_back(std::log(mv.sigma2_0));
  if (spec_.variant != Variant::m0_only) v.push_back(std::log(mv.sigma2_1));
  v.insert(v.end(), mv.beta.begin(), mv.beta.end());
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MovementParams Sampler::movement_from_coordinates(const Eigen::VectorXd& v) const {
  MovementParams mv = state_.movement;
  Eigen::Index i = 0;
  if (spec_.variant != Variant::m1_only) mv.sigma2_0 = std::exp(v[i++]);
  if (spec_.variant != Variant::m0_only) mv.sigma2_1 = std::exp(v[i++]);
  for (std::size_t k = 0; k < n_beta_; ++k) mv.beta[k] = v[i++];
  return mv;
}

double Sampler::movement_target(const Eigen::VectorXd& v) const {
  const MovementParams mv = movement_from_coordinates(v);
  if (!(mv.sigma2_0 > 0.0) || !(mv.sigma2_1 > 0.0) || !std::isfinite(mv.sigma2_0) ||
      !std::isfinite(mv.sigma2_1))
    return kNegInf;
  double t = kernels::movement_loglik(transition_inputs(), state_.recharge.z,
                                      {mv.beta, mv.sigma2_0, mv.sigma2_1});
  const auto& prior = spec_.prior;
  if (spec_.variant != Variant::m1_only)
    t += prior.sigma2_0.log_density(mv.sigma2_0) + std::log(mv.sigma2_0);
  if (spec_.variant != Variant::m0_only)
    t += prior.sigma2_1.log_density(mv.sigma2_1) + std::log(mv.sigma2_1);
  if (n_beta_) t += prior.beta.log_density(mv.beta);
  return t;
}

double Sampler::movement_log_ratio(const Eigen::VectorXd& proposal) const {
  return movement_target(proposal) - movement_target(movement_coordinates());
}

bool Sampler::update_movement_block() {
  const Eigen::VectorXd cur = movement_coordinates();
  const Eigen::VectorXd prop = movement_proposal_.propose(cur, rng_);
  const double lr = movement_log_ratio(prop);
  const bool accept = std::log(rng_.uniform_open()) < lr;
  if (accept) {
    const MovementParams mv = movement_from_coordinates(prop);
    state_.movement = mv;
    if (has_recharge(spec_.variant)) {
      // Decision terms do not depend on movement parameters.
    }
  }
  if (adapting()) {
    movement_proposal_.adapt_scale(accept, gain(), config_.adapt.target_block);
  } else {
    acceptance_.movement_block.record(accept);
  }
  return accept;
}

// ---------------------------------------------------------------------------
// Recharge block: (g0, theta)

Eigen::VectorXd Sampler::recharge_coordinates() const {
  Eigen::VectorXd v(1 + static_cast<Eigen::Index>(n_theta_));
  v[0] = state_.recharge.g0;
  for (std::size_t k = 0; k < n_theta_; ++k) v[static_cast<Eigen::Index>(k) + 1] = state_.recharge.theta[k];
  return v;
}

double Sampler::recharge_target(const Eigen::VectorXd& v, std::span<double> landscape,
                                std::span<double> g, std::span<double> terms) const {
  const std::span<const double> theta(v.data() + 1, n_theta_);
  kernels::landscape_terms(wvals_, theta, landscape);
  g[0] = v[0];
  for (std::size_t j = 0; j + 1 < m_; ++j) g[j + 1] = g[j] + spec_.grid.weight(j) * landscape[j];
  double t = kernels::decision_terms(g, state_.recharge.z, terms);
  t += spec_.prior.theta.log_density(theta);
  t += log_normal_density(v[0], spec_.prior.g0_mean, spec_.prior.g0_var);
  return t;
}

double Sampler::recharge_log_ratio(const Eigen::VectorXd& proposal) {
  std::vector<double> land(m_), g(m_), terms(m_);
  const double prop = recharge_target(proposal, land, g, terms);
  const double cur = recharge_target(recharge_coordinates(), land, g, terms);
  return prop - cur;
}

bool Sampler::update_recharge_block() {
  if (!n_theta_) return false;
  const Eigen::VectorXd cur = recharge_coordinates();
  const Eigen::VectorXd prop = recharge_proposal_.propose(cur, rng_);
  std::vector<double> land(m_), g(m_), terms(m_);
  const double t_prop = recharge_target(prop, land, g, terms);
  double t_cur = 0.0;
  for (double d : dec_terms_) t_cur += d;
  t_cur += spec_.prior.theta.log_density(state_.recharge.theta) +
           log_normal_density(state_.recharge.g0, spec_.prior.g0_mean, spec_.prior.g0_var);
  const bool accept = std::log(rng_.uniform_open()) < t_prop - t_cur;
  if (accept) {
    state_.recharge.g0 = prop[0];
    for (std::size_t k = 0; k < n_theta_; ++k) state_.recharge.theta[k] = prop[static_cast<Eigen::Index>(k) + 1];
    landscape_ = std::move(land);
    state_.recharge.g = std::move(g);
    dec_terms_ = std::move(terms);
  }
  if (adapting()) {
    recharge_proposal_.adapt_scale(accept, gain(), config_.adapt.target_block);
  } else {
    acceptance_.recharge_block.record(accept);
  }
  return accept;
}

// ---------------------------------------------------------------------------
// Sweeps

void Sampler::sweep() {
  update_sigma_s();

  if (config_.random_scan) {
    std::vector<std::size_t> order(m_);
    for (std::size_t j = 0; j < m_; ++j) order[j] = j;
    for (std::size_t j = m_ - 1; j > 0; --j) {
      const auto k = static_cast<std::size_t>(rng_.uniform() * static_cast<double>(j + 1));
      std::swap(order[j], order[std::min(k, j)]);
    }
    for (std::size_t j : order) update_position(j);
  } else {
    for (std::size_t j = 0; j < m_; ++j) update_position(j);
  }

  update_decisions();
  update_movement_block();
  update_recharge_block();

  if (adapting()) {
    const auto& ad = config_.adapt;
    if (iteration_ >= ad.shaping_start / 2) {
      movement_proposal_.observe(movement_coordinates());
      if (n_theta_) recharge_proposal_.observe(recharge_coordinates());
    }
    if (iteration_ >= ad.shaping_start && (iteration_ - ad.shaping_start) % 200 == 0) {
      movement_proposal_.reshape();
      if (n_theta_) recharge_proposal_.reshape();
    }
  }
  ++iteration_;
}

ParameterDraw Sampler::make_draw() const {
  ParameterDraw d;
  d.iteration = iteration_;
  d.beta = state_.movement.beta;
  d.theta = state_.recharge.theta;
  d.g0 = state_.recharge.g0;
  d.sigma2_s = state_.movement.sigma2_s;
  d.sigma2_0 = state_.movement.sigma2_0;
  d.sigma2_1 = state_.movement.sigma2_1;
  if (config_.store_paths) {
    d.path = state_.path;
    d.g = state_.recharge.g;
    d.z = state_.recharge.z;
  }
  return d;
}

PosteriorSamples Sampler::run() {
  PosteriorSamples out;
  out.variant = spec_.variant;
  out.times = spec_.grid.times();
  if (n_beta_) {
    for (const auto& f : spec_.movement) {
      out.beta_names.push_back(f->name());
      out.beta_scales.push_back(f->scale_record());
    }
  }
  if (n_theta_) {
    out.theta_names.push_back("intercept");
    for (const auto& f : spec_.recharge) out.theta_names.push_back(f->name());
  }
  while (iteration_ < config_.n_iter) {
    sweep();
    const std::size_t it = iteration_ - 1;
    if (it >= config_.n_burn && (it - config_.n_burn + 1) % config_.thin == 0)
      out.draws.push_back(make_draw());
  }
  out.acceptance = acceptance_;
  return out;
}

PosteriorSamples run_chain(const TelemetrySet& data, const ModelSpec& spec, const ChainConfig& config) {
  Sampler sampler(spec, data, config);
  return sampler.run();
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// Text layout, one record per line:
//   recharge-checkpoint <version>
//   iteration <n> m <m> n_beta <K> n_theta <p> variant <name>
//   sigma2 <s> <0> <1>
//   beta <K values>
//   g0 <value>
//   theta <p values>
//   path <2m values>
//   g <m values>
//   z <m values>
//   position_log_scale <m values>
//   movement_proposal <dim> <log scale> <n> <shaped> <chol> <mean> <m2>
//   recharge_proposal ... (same layout, only when p > 0)
//   acceptance <6 counts>
//   rng <engine state>
//   end

void Sampler::save_checkpoint(std::ostream& os) const {
  const auto& st = state_;
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  os << "iteration " << iteration_ << " m " << m_ << " n_beta " << n_beta_ << " n_theta " << n_theta_
     << " variant " << to_string(spec_.variant) << '\n';
  os << "sigma2 " << text::format_double(st.movement.sigma2_s) << ' '
     << text::format_double(st.movement.sigma2_0) << ' ' << text::format_double(st.movement.sigma2_1)
     << '\n';
  os << "beta";
  write_doubles(os, st.movement.beta.data(), n_beta_);
  os << "\ng0 " << text::format_double(st.recharge.g0) << "\ntheta";
  write_doubles(os, st.recharge.theta.data(), n_theta_);
  os << "\npath";
  for (const auto& p : st.path) os << ' ' << text::format_double(p.x) << ' ' << text::format_double(p.y);
  os << "\ng";
  write_doubles(os, st.recharge.g.data(), m_);
  os << "\nz";
  for (auto v : st.recharge.z) os << ' ' << static_cast<int>(v);
  os << "\nposition_log_scale";
  write_doubles(os, position_log_scale_.data(), m_);
  os << "\nmovement_proposal ";
  movement_proposal_.write(os);
  if (n_theta_) {
    os << "recharge_proposal ";
    recharge_proposal_.write(os);
  }
  const auto& a = acceptance_;
  os << "acceptance " << a.position.proposed << ' ' << a.position.accepted << ' '
     << a.movement_block.proposed << ' ' << a.movement_block.accepted << ' '
     << a.recharge_block.proposed << ' ' << a.recharge_block.accepted << '\n';
  os << "rng ";
  rng_.write_state(os);
  os << "\nend\n";
}

void Sampler::load_checkpoint(std::istream& is) {
  expect_token(is, kCheckpointMagic);
  int version = 0;
  if (!(is >> version) || version != kCheckpointVersion)
    throw ParseError("checkpoint: unsupported version");
  std::size_t it = 0, m = 0, nb = 0, nt = 0;
  std::string variant;
  expect_token(is, "iteration");
  is >> it;
  expect_token(is, "m");
  is >> m;
  expect_token(is, "n_beta");
  is >> nb;
  expect_token(is, "n_theta");
  is >> nt;
  expect_token(is, "variant");
  is >> variant;
  if (!is || m != m_ || nb != n_beta_ || nt != n_theta_ || parse_variant(variant) != spec_.variant)
    throw ValidationError("checkpoint does not match the model specification");

  ChainState st;
  expect_token(is, "sigma2");
  double s[3];
  read_doubles(is, s, 3);
  st.movement.sigma2_s = s[0];
  st.movement.sigma2_0 = s[1];
  st.movement.sigma2_1 = s[2];
  expect_token(is, "beta");
  st.movement.beta.resize(nb);
  read_doubles(is, st.movement.beta.data(), nb);
  expect_token(is, "g0");
  read_doubles(is, &st.recharge.g0, 1);
  expect_token(is, "theta");
  st.recharge.theta.resize(nt);
  read_doubles(is, st.recharge.theta.data(), nt);
  expect_token(is, "path");
  std::vector<double> xy(2 * m);
  read_doubles(is, xy.data(), 2 * m);
  st.path.resize(m);
  for (std::size_t j = 0; j < m; ++j) st.path[j] = {xy[2 * j], xy[2 * j + 1]};
  expect_token(is, "g");
  std::vector<double> g(m);
  read_doubles(is, g.data(), m);
  expect_token(is, "z");
  st.recharge.z.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    int v = 0;
    if (!(is >> v) || (v != 0 && v != 1)) throw ParseError("checkpoint: bad decision value");
    st.recharge.z[j] = static_cast<std::uint8_t>(v);
  }
  expect_token(is, "position_log_scale");
  std::vector<double> scales(m);
  read_doubles(is, scales.data(), m);
  expect_token(is, "movement_proposal");
  BlockProposal mp;
  mp.read(is);
  BlockProposal rp;
  if (nt) {
    expect_token(is, "recharge_proposal");
    rp.read(is);
  }
  AcceptanceReport acc;
  expect_token(is, "acceptance");
  is >> acc.position.proposed >> acc.position.accepted >> acc.movement_block.proposed >>
      acc.movement_block.accepted >> acc.recharge_block.proposed >> acc.recharge_block.accepted;
  expect_token(is, "rng");
  Rng rng;
  rng.read_state(is);
  expect_token(is, "end");
  if (!is) throw ParseError("checkpoint: truncated file");

  set_state(std::move(st));
  // Keep the incrementally maintained series bit-for-bit.
  if (nt) {
    state_.recharge.g = std::move(g);
    kernels::decision_terms(state_.recharge.g, state_.recharge.z, dec_terms_);
  }
  iteration_ = it;
  position_log_scale_ = std::move(scales);
  movement_proposal_ = std::move(mp);
  recharge_proposal_ = std::move(rp);
  acceptance_ = acc;
  rng_ = std::move(rng);
}

}  // namespace recharge
