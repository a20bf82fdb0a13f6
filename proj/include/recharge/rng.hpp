#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>

namespace recharge {

// Seedable stream generator. Independent streams for chains, folds and
// replications are derived from (seed, stream id) pairs so parallel runs stay
// reproducible regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  double uniform();        // [0, 1)
  double uniform_open();   // (0, 1)
  double normal();
  double gamma(double shape);  // unit scale
  double inverse_gamma(double shape, double scale);
  bool bernoulli(double p);

  std::uint64_t next_u64() { return engine_(); }

  // Child stream derived from this generator's seed material, not its state.
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  void write_state(std::ostream& os) const;
  void read_state(std::istream& is);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace recharge
