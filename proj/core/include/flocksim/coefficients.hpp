#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "flocksim/ensemble.hpp"
#include "flocksim/kernels.hpp"

namespace flocksim {

// ---------------------------------------------------------------------------
// Regularized mean-field coefficients evaluated against the empirical measure:
//
//   l_cs[i] = (1/N) sum_j chi(x_i-x_j) psi(x_i-x_j) theta(v_j-v_i)
//   u[i]    = ((1/N) sum_j phi(x_i-x_j) theta(v_j)) / (1/R + (1/N) sum_j phi(x_i-x_j))
//   l_mt[i] = u[i] - v_i
//   k[i]    = chi(x_i) F(x_i) + (1/N) sum_j chi(x_i-x_j) psitld(x_i-x_j) theta(v_j-v_i)
//   s[i]    = (1/(2N)) sum_j psitld(x_i-x_j) (k[j] - k[i])
//
// All sums include j = i and use compensated accumulation.
// ---------------------------------------------------------------------------

struct CoefficientBundle {
  int n = 0;
  int dim = 0;
  std::vector<double> l_cs;   // n * dim
  std::vector<double> u;      // n * dim, u evaluated at each x_i
  std::vector<double> l_mt;   // n * dim
  std::vector<double> k;      // n * dim
  std::vector<double> s;      // n * dim
  std::vector<double> drift;  // n * dim, = l_cs + l_mt + s

  std::span<const double> drift_row(int i) const {
    return {drift.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<const double> k_row(int i) const {
    return {k.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
};

/// Hash grid over positions with cell size = r2 (the support radius of phi).
/// Querying the 3^d neighborhood of a point returns every particle within
/// distance r2, so phi-sums over the neighborhood are exact. Neighborhood
/// lists are precomputed per occupied cell (sorted ascending), so queries at
/// particle positions are lookups; the index is read-only after construction
/// and safe to share across threads.
class CellIndex {
 public:
  CellIndex(const ParticleEnsemble& ens, double cell_size);

  /// All particle indices in the 3^d cells around x, ascending. A superset of
  /// the particles within `cell_size` of x.
  void gather(std::span<const double> x, std::vector<int>& out) const;

  /// Cached neighborhood when x falls in an occupied cell; empty span with
  /// found = false otherwise (caller gathers manually).
  std::span<const int> cached_neighborhood(std::span<const double> x, bool& found) const;

  double cell_size() const { return cell_; }
  std::uint64_t source_checksum() const { return checksum_; }

  /// True when the whole grid spans at most 3 cells per axis (neighborhood
  /// queries would return everything; callers fall back to the plain loop).
  bool degenerate() const { return degenerate_; }

 private:
  std::uint64_t key_of(std::span<const double> x) const;
  void gather_cells(const std::vector<std::int64_t>& base, std::vector<int>& out) const;

  double cell_ = 1.0;
  int dim_ = 0;
  std::vector<double> origin_;
  std::uint64_t checksum_ = 0;
  bool degenerate_ = false;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
  std::unordered_map<std::uint64_t, std::vector<int>> neighborhoods_;
};

std::vector<double> eval_l_cs(const ParticleEnsemble& ens, const KernelSpec& spec,
                              const Truncation& tr, int i);

/// u_R at an arbitrary point; well-defined everywhere (denominator >= 1/R).
std::vector<double> eval_u_r(const ParticleEnsemble& ens, const KernelSpec& spec,
                             const Truncation& tr, std::span<const double> x,
                             const CellIndex* index = nullptr);

std::vector<double> eval_l_mt(const ParticleEnsemble& ens, const KernelSpec& spec,
                              const Truncation& tr, int i);

std::vector<double> eval_k_r(const ParticleEnsemble& ens, const KernelSpec& spec,
                             const Truncation& tr, int i);

std::vector<double> eval_s_r(const ParticleEnsemble& ens, const KernelSpec& spec,
                             const Truncation& tr, int i);

/// Evaluates every coefficient at every particle. When `index` is given it
/// must have been built from this ensemble's positions (checksum verified);
/// it accelerates the phi-sums only and the result is bit-identical to the
/// brute-force route.
CoefficientBundle eval_bundle(const ParticleEnsemble& ens, const KernelSpec& spec,
                              const Truncation& tr, const CellIndex* index = nullptr,
                              int threads = 1);

}  // namespace flocksim
