#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "flocksim/ensemble.hpp"
#include "flocksim/kernels.hpp"

namespace flocksim {

enum class MomentPart { Full, Position, Velocity };

/// (1/N) sum_i |.|^p over the selected coordinates.
double moment(const ParticleEnsemble& ens, double p, MomentPart part);

// ---------------------------------------------------------------------------
// Wasserstein distances between equal-weight point clouds over the full state
// z = (x, v).
// ---------------------------------------------------------------------------

struct ExactMethod {};
struct SlicedMethod {
  int n_projections = 64;
  std::uint64_t seed = 0;
};

struct TransportResult {
  double distance = 0.0;
  double p = 2.0;
  std::variant<ExactMethod, SlicedMethod> method;
};

inline constexpr int kExactTransportCap = 2048;

/// Exact W_p via the N x N assignment problem on cost |z_i - z_j|^p (the
/// optimal plan between equal-size uniform clouds is a permutation).
/// Requires a.n == b.n and n <= cap.
TransportResult wasserstein_exact(const ParticleEnsemble& a, const ParticleEnsemble& b, double p,
                                  int cap = kExactTransportCap);

/// Sliced W_p: average of 1-d W_p^p over seeded random unit directions
/// (1-d transport by quantile matching), then the p-th root. Any cloud sizes.
TransportResult wasserstein_sliced(const ParticleEnsemble& a, const ParticleEnsemble& b, double p,
                                   int n_projections, std::uint64_t seed);

/// Exact solver for the rectangular-free case: minimal total assignment cost
/// for a square cost matrix (row-major). Exposed for reuse and testing.
double solve_assignment(const std::vector<double>& cost, int n,
                        std::vector<int>* row_to_col = nullptr);

/// m copies of every particle; represents the same empirical measure with
/// m*N atoms (used to equalize cloud sizes before the exact solver).
ParticleEnsemble replicate_atoms(const ParticleEnsemble& ens, int m);

// ---------------------------------------------------------------------------
// Velocity-weighted spatial densities rho_phi(x) = (1/N) sum_i phi_v(v_i) G_h(x - x_i)
// ---------------------------------------------------------------------------

struct ConstantWeight {
  double c = 1.0;
};
struct BumpWeight {
  BumpKernel bump;  // radial in |v|
};
/// theta_R(v)[axis]: the truncated velocity component, so rho approximates
/// the flux density along `axis`.
struct ThetaComponentWeight {
  Truncation truncation;
  int axis = 0;
};
using VelocityWeight = std::variant<ConstantWeight, BumpWeight, ThetaComponentWeight>;

double eval_velocity_weight(const VelocityWeight& w, std::span<const double> v);

struct GridSpec {
  std::vector<double> origin;  // length dim
  std::vector<double> extent;  // length dim, physical size per axis
  std::vector<int> resolution; // cells per axis
  double padding = 0.0;        // margin added around the data when auto-built

  int dim() const { return static_cast<int>(origin.size()); }
  std::size_t cell_count() const;
  double cell_volume() const;
  void validate() const;
};

/// Bounding box of the ensemble padded by `pad` on every side.
GridSpec cover_ensemble(const ParticleEnsemble& ens, int resolution, double pad);

/// Periodic-embedding grid for Fourier norms: the bounding box padded by
/// 4 kernel bandwidths to suppress wrap-around.
GridSpec cover_ensemble_for_fourier(const ParticleEnsemble& ens, int resolution, double bandwidth);

struct GridDensity {
  GridSpec grid;
  double bandwidth = 0.0;
  double mass_leak = 0.0;              // deposited weight minus grid integral
  std::string weight_descriptor;
  std::vector<double> values;          // row-major over grid cells

  double integral() const;
  void write_csv(const std::string& path) const;
};

/// Deposits phi_v(v_i)/N with an isotropic Gaussian kernel of the given
/// spatial bandwidth onto the grid (kernel truncated at 4 bandwidths; the
/// truncated and out-of-grid mass is reported as mass_leak).
GridDensity rho_phi(const ParticleEnsemble& ens, const VelocityWeight& weight, double bandwidth,
                    const GridSpec& grid);

/// Same deposit with caller-supplied per-particle weights (rho is linear in
/// them); rho_phi(ens, w, ...) equals this with weights[i] = phi_v(v_i).
GridDensity rho_weights(const ParticleEnsemble& ens, const std::vector<double>& weights,
                        double bandwidth, const GridSpec& grid, std::string descriptor);

/// Default bandwidth: Silverman-style N^(-1/(d+4)) times the positional
/// standard deviation.
double silverman_bandwidth(const ParticleEnsemble& ens);

// ---------------------------------------------------------------------------
// Discrete fractional Sobolev norm of a density time series:
//   sum_t dt * sum_xi (1 + |xi|^2)^eta |rho_hat(t, xi)|^2
// with rho_hat the DFT on the (periodically embedded) grid and xi the
// physical wavenumber. At eta = 0 this is exactly the squared L^2_t L^2_x
// norm (Plancherel).
// ---------------------------------------------------------------------------

double sobolev_norm_time_series(const std::vector<GridDensity>& densities, double eta, double dt);

/// Mean velocity of the k nearest particles to x in position space; the
/// sampling oracle for the local velocity u_0 in the small-mollifier limit.
std::vector<double> local_velocity_knn(const ParticleEnsemble& ens, std::span<const double> x,
                                       int k);

// In-place complex DFT helpers (radix-2 FFT for power-of-two sizes, direct
// transform otherwise). Exposed for the Plancherel tests.
void dft_1d(std::vector<std::complex<double>>& data, bool inverse);

}  // namespace flocksim
