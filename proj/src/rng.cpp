#include "recharge/rng.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace recharge {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

double Rng::uniform() { return std::generate_canonical<double, 53>(engine_); }

double Rng::uniform_open() {
  double u = 0.0;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

double Rng::inverse_gamma(double shape, double scale) { return scale / gamma(shape); }

bool Rng::bernoulli(double p) { return uniform() < p; }

Rng Rng::split(std::uint64_t stream) const {
  // Mix the parent stream id into the child id so nested splits do not collide.
  std::uint64_t child = stream_ * 0x9e3779b97f4a7c15ULL + stream + 1;
  return Rng(seed_, child);
}

void Rng::write_state(std::ostream& os) const {
  os << seed_ << ' ' << stream_ << ' ' << engine_ << ' ' << normal_;
}

void Rng::read_state(std::istream& is) { is >> seed_ >> stream_ >> engine_ >> normal_; }

}  // namespace recharge
