#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flocksim/common.hpp"

namespace flocksim {

/// N particle states (x, v) in R^d with implicit uniform weights 1/N; the
/// empirical measure of the system.
struct ParticleEnsemble {
  int n = 0;
  int dim = 0;
  std::vector<double> pos;  // n * dim, row-major
  std::vector<double> vel;  // n * dim

  ParticleEnsemble() = default;
  ParticleEnsemble(int n_, int dim_)
      : n(n_), dim(dim_),
        pos(static_cast<std::size_t>(n_) * static_cast<std::size_t>(dim_), 0.0),
        vel(static_cast<std::size_t>(n_) * static_cast<std::size_t>(dim_), 0.0) {}

  std::span<const double> position(int i) const {
    return {pos.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<const double> velocity(int i) const {
    return {vel.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> position(int i) {
    return {pos.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> velocity(int i) {
    return {vel.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }

  bool all_finite() const {
    for (double x : pos)
      if (!std::isfinite(x)) return false;
    for (double v : vel)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::uint64_t position_checksum() const {
    return fnv1a(pos.data(), pos.size() * sizeof(double));
  }
};

}  // namespace flocksim
