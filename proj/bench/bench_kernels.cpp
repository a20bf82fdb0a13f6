// Serial reference loops vs the OpenMP kernels, at path lengths from the
// desk-scale study up to long synthetic tracks.
#include <benchmark/benchmark.h>

#include <vector>

#include "recharge/kernels.hpp"
#include "recharge/rng.hpp"

using namespace recharge;

namespace {

struct Fixture {
  std::vector<Point> path, grads;
  std::vector<double> dt, g, terms, scratch, wvals, theta, out, p1, xs, ys;
  std::vector<std::uint8_t> z;
  std::vector<double> beta{0.7, -0.3, 1.1, 0.2, -0.5};
  std::size_t k = 5;

  explicit Fixture(std::size_t m) {
    Rng rng(42, 0);
    path.resize(m);
    grads.resize(m * k);
    dt.assign(m, 0.05);
    g.resize(m);
    z.resize(m);
    terms.resize(m);
    scratch.resize(m);
    theta = {-1.0, 4.0, 0.5, -0.2, 0.3, 0.1};
    wvals.resize(m * theta.size());
    out.resize(m);
    p1.resize(m);
    xs.resize(m);
    ys.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      path[j] = {rng.normal(), rng.normal()};
      g[j] = rng.normal();
      z[j] = rng.bernoulli(0.5);
      xs[j] = rng.normal();
      ys[j] = rng.normal();
    }
    for (auto& q : grads) q = {rng.normal(), rng.normal()};
    for (auto& w : wvals) w = rng.uniform();
  }
  kernels::TransitionInputs inputs() const { return {path, dt, grads, k}; }
  kernels::MovementValues mv() const { return {beta, 0.02, 0.03}; }
};

template <bool Parallel>
void BM_decision_shift(benchmark::State& st) {
  Fixture f(static_cast<std::size_t>(st.range(0)));
  kernels::decision_terms(f.g, f.z, f.terms);
  for (auto _ : st) {
    double v = Parallel ? kernels::decision_shift(f.g, f.z, f.terms, 0.01, f.scratch)
                        : kernels::serial::decision_shift(f.g, f.z, f.terms, 0.01, f.scratch);
    benchmark::DoNotOptimize(v);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_movement_loglik(benchmark::State& st) {
  Fixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    double v = Parallel ? kernels::movement_loglik(f.inputs(), f.z, f.mv())
                        : kernels::serial::movement_loglik(f.inputs(), f.z, f.mv());
    benchmark::DoNotOptimize(v);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_decision_posteriors(benchmark::State& st) {
  Fixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if (Parallel) kernels::decision_posteriors(f.inputs(), f.g, f.mv(), f.p1);
    else kernels::serial::decision_posteriors(f.inputs(), f.g, f.mv(), f.p1);
    benchmark::DoNotOptimize(f.p1.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_landscape_terms(benchmark::State& st) {
  Fixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if (Parallel) kernels::landscape_terms(f.wvals, f.theta, f.out);
    else kernels::serial::landscape_terms(f.wvals, f.theta, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_kde_log_density(benchmark::State& st) {
  Fixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    double v = Parallel ? kernels::kde_log_density(f.xs, f.ys, 0.3, 0.3, {0.1, -0.2})
                        : kernels::serial::kde_log_density(f.xs, f.ys, 0.3, 0.3, {0.1, -0.2});
    benchmark::DoNotOptimize(v);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

#define SIZES ->Arg(600)->Arg(1441)->Arg(20000)->Arg(200000)

BENCHMARK(BM_decision_shift<false>) SIZES;
BENCHMARK(BM_decision_shift<true>) SIZES;
BENCHMARK(BM_movement_loglik<false>) SIZES;
BENCHMARK(BM_movement_loglik<true>) SIZES;
BENCHMARK(BM_decision_posteriors<false>) SIZES;
BENCHMARK(BM_decision_posteriors<true>) SIZES;
BENCHMARK(BM_landscape_terms<false>) SIZES;
BENCHMARK(BM_landscape_terms<true>) SIZES;
BENCHMARK(BM_kde_log_density<false>) SIZES;
BENCHMARK(BM_kde_log_density<true>) SIZES;

BENCHMARK_MAIN();
