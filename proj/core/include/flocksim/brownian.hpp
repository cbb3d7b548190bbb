#pragma once

#include <cstdint>
#include <vector>

#include "flocksim/common.hpp"

namespace flocksim {

/// A seeded scalar Brownian increment stream, shared by every particle of a
/// simulation (one-dimensional common noise).
///
/// Increments are a pure function of (seed, dt, M): the same triple always
/// reproduces the same path bit-for-bit. `refined()` halves the step using
/// sum-preserving midpoint splitting with a secondary seeded stream, so a
/// coarse path and its refinements sample the same underlying Brownian
/// motion; pairwise sums of the refined increments recover the parent's
/// increments to within one rounding.
class BrownianPath {
 public:
  static BrownianPath generate(std::uint64_t seed, double dt, std::size_t steps);

  BrownianPath refined() const;

  double dt() const { return dt_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t steps() const { return increments_.size(); }
  double increment(std::size_t k) const { return increments_[k]; }
  const std::vector<double>& increments() const { return increments_; }

 private:
  BrownianPath() = default;

  std::uint64_t seed_ = 0;
  double dt_ = 0.0;
  int level_ = 0;  // number of refinements below the generating step
  std::vector<double> increments_;
};

}  // namespace flocksim
