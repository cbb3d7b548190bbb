#include "flocksim/brownian.hpp"

#include <cmath>

namespace flocksim {

namespace {
// Stream ids: level L increments draw from stream L. Level 0 is the base
// path; level L > 0 holds the bridge midpoint corrections.
constexpr std::uint64_t kStreamTag = 0x42726f776eull;  // keeps noise streams apart from init streams
}  // namespace

BrownianPath BrownianPath::generate(std::uint64_t seed, double dt, std::size_t steps) {
  if (!(dt > 0.0)) throw InvalidInput("BrownianPath: dt must be positive");
  BrownianPath p;
  p.seed_ = seed;
  p.dt_ = dt;
  p.level_ = 0;
  p.increments_.resize(steps);
  const double scale = std::sqrt(dt);
  for (std::size_t k = 0; k < steps; ++k)
    p.increments_[k] = scale * normal01(seed, hash_combine(kStreamTag, 0), k);
  return p;
}

BrownianPath BrownianPath::refined() const {
  BrownianPath fine;
  fine.seed_ = seed_;
  fine.dt_ = dt_ / 2.0;
  fine.level_ = level_ + 1;
  fine.increments_.resize(2 * increments_.size());
  // Midpoint bridge over each parent interval: xi ~ N(0, dt/4), children are
  // dB/2 + xi and dB/2 - xi, so their sum reproduces dB.
  const double half_scale = 0.5 * std::sqrt(dt_);
  const std::uint64_t stream = hash_combine(kStreamTag, static_cast<std::uint64_t>(level_ + 1));
  for (std::size_t k = 0; k < increments_.size(); ++k) {
    const double half = 0.5 * increments_[k];
    const double xi = half_scale * normal01(seed_, stream, k);
    fine.increments_[2 * k] = half + xi;
    fine.increments_[2 * k + 1] = half - xi;
  }
  return fine;
}

}  // namespace flocksim
