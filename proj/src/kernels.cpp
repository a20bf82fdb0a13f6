#include "recharge/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "recharge/normal.hpp"

namespace recharge::kernels {

namespace {

constexpr std::size_t kChunk = 256;
// Below this many chunks the parallel region costs more than it saves.
constexpr std::size_t kMinParallelChunks = 4;

constexpr double kLog2Pi = 1.8378770664093454836;

// Deterministic chunked reduction of term(i) over [0, n).
template <class Term>
double chunked_sum(std::size_t n, Term&& term) {
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  if (n_chunks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::array<double, 64> stack_partial{};
  std::vector<double> heap_partial;
  double* partial = stack_partial.data();
  if (n_chunks > stack_partial.size()) {
    heap_partial.assign(n_chunks, 0.0);
    partial = heap_partial.data();
  }
  const auto nc = static_cast<std::ptrdiff_t>(n_chunks);
#pragma omp parallel for schedule(static) if (n_chunks >= kMinParallelChunks)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const std::size_t b = static_cast<std::size_t>(c) * kChunk;
    const std::size_t e = std::min(n, b + kChunk);
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += term(i);
    partial[c] = s;
  }
  double total = 0.0;
  for (std::size_t c = 0; c < n_chunks; ++c) total += partial[c];
  return total;
}

Point drift_at(const TransitionInputs& in, std::size_t j, std::span<const double> beta) {
  Point d{0.0, 0.0};
  const Point* g = in.grads.data() + j * in.n_covariates;
  for (std::size_t k = 0; k < in.n_covariates; ++k) d += -beta[k] * g[k];
  return d;
}

double kde_term(double x, double y, double hx, double hy, Point p) {
  const double u = (p.x - x) / hx;
  const double v = (p.y - y) / hy;
  return std::exp(-0.5 * (u * u + v * v));
}

double kde_finish(double sum, std::size_t n, double hx, double hy) {
  const double dens = sum / (static_cast<double>(n) * 2.0 * std::numbers::pi * hx * hy);
  return std::log(std::max(dens, 1e-300));
}

double posterior_one(const TransitionInputs& in, std::span<const double> g,
                     const MovementValues& mv, std::size_t j) {
  if (j == 0) return decision_prob(g[0]);
  const double l1 = log_decision_prob(true, g[j]) + transition_term(in, j, true, mv);
  const double l0 = log_decision_prob(false, g[j]) + transition_term(in, j, false, mv);
  // p1 = 1 / (1 + exp(l0 - l1)), evaluated without overflow.
  const double d = l0 - l1;
  if (d > 0.0) {
    const double e = std::exp(-d);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(d));
}

}  // namespace

double transition_term(const TransitionInputs& in, std::size_t j, bool z, const MovementValues& mv) {
  const double dt = in.dt[j];
  const Point prev = in.path[j - 1];
  const Point mean = z ? prev + dt * drift_at(in, j - 1, mv.beta) : prev;
  const double var = (z ? mv.sigma2_1 : mv.sigma2_0) * dt;
  const Point r = in.path[j] - mean;
  return -kLog2Pi - std::log(var) - 0.5 * squared_norm(r) / var;
}

// ---------------------------------------------------------------------------
// OpenMP versions

double decision_shift(std::span<const double> g, std::span<const std::uint8_t> z,
                      std::span<const double> old_terms, double shift,
                      std::span<double> new_terms) {
  return chunked_sum(g.size(), [&](std::size_t l) {
    const double t = log_decision_prob(z[l] != 0, g[l] + shift);
    new_terms[l] = t;
    return t - old_terms[l];
  });
}

double decision_terms(std::span<const double> g, std::span<const std::uint8_t> z,
                      std::span<double> terms) {
  return chunked_sum(g.size(), [&](std::size_t l) {
    const double t = log_decision_prob(z[l] != 0, g[l]);
    terms[l] = t;
    return t;
  });
}

void landscape_terms(std::span<const double> wvals, std::span<const double> theta,
                     std::span<double> out) {
  const std::size_t p = theta.size();
  const auto m = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (out.size() >= kMinParallelChunks * kChunk)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    const double* w = wvals.data() + static_cast<std::size_t>(j) * p;
    double v = 0.0;
    for (std::size_t k = 0; k < p; ++k) v += w[k] * theta[k];
    out[j] = v;
  }
}

double movement_loglik(const TransitionInputs& in, std::span<const std::uint8_t> z,
                       const MovementValues& mv) {
  const std::size_t m = in.path.size();
  if (m < 2) return 0.0;
  return chunked_sum(m - 1, [&](std::size_t i) {
    const std::size_t j = i + 1;
    return transition_term(in, j, z[j] != 0, mv);
  });
}

void decision_posteriors(const TransitionInputs& in, std::span<const double> g,
                         const MovementValues& mv, std::span<double> p1) {
  const auto m = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static) if (g.size() >= kMinParallelChunks * kChunk)
  for (std::ptrdiff_t j = 0; j < m; ++j) p1[j] = posterior_one(in, g, mv, static_cast<std::size_t>(j));
}

double kde_log_density(std::span<const double> xs, std::span<const double> ys, double hx,
                       double hy, Point p) {
  const double sum = chunked_sum(xs.size(), [&](std::size_t i) { return kde_term(xs[i], ys[i], hx, hy, p); });
  return kde_finish(sum, xs.size(), hx, hy);
}

// ---------------------------------------------------------------------------
// Serial references

namespace serial {

double decision_shift(std::span<const double> g, std::span<const std::uint8_t> z,
                      std::span<const double> old_terms, double shift,
                      std::span<double> new_terms) {
  double s = 0.0;
  for (std::size_t l = 0; l < g.size(); ++l) {
    new_terms[l] = log_decision_prob(z[l] != 0, g[l] + shift);
    s += new_terms[l] - old_terms[l];
  }
  return s;
}

double decision_terms(std::span<const double> g, std::span<const std::uint8_t> z,
                      std::span<double> terms) {
  double s = 0.0;
  for (std::size_t l = 0; l < g.size(); ++l) {
    terms[l] = log_decision_prob(z[l] != 0, g[l]);
    s += terms[l];
  }
  return s;
}

void landscape_terms(std::span<const double> wvals, std::span<const double> theta,
                     std::span<double> out) {
  const std::size_t p = theta.size();
  for (std::size_t j = 0; j < out.size(); ++j) {
    double v = 0.0;
    for (std::size_t k = 0; k < p; ++k) v += wvals[j * p + k] * theta[k];
    out[j] = v;
  }
}

double movement_loglik(const TransitionInputs& in, std::span<const std::uint8_t> z,
                       const MovementValues& mv) {
  double s = 0.0;
  for (std::size_t j = 1; j < in.path.size(); ++j) s += transition_term(in, j, z[j] != 0, mv);
  return s;
}

void decision_posteriors(const TransitionInputs& in, std::span<const double> g,
                         const MovementValues& mv, std::span<double> p1) {
  for (std::size_t j = 0; j < g.size(); ++j) p1[j] = posterior_one(in, g, mv, j);
}

double kde_log_density(std::span<const double> xs, std::span<const double> ys, double hx,
                       double hy, Point p) {
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sum += kde_term(xs[i], ys[i], hx, hy, p);
  return kde_finish(sum, xs.size(), hx, hy);
}

}  // namespace serial

}  // namespace recharge::kernels
