#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "flocksim/brownian.hpp"
#include "flocksim/coefficients.hpp"
#include "flocksim/ensemble.hpp"
#include "flocksim/kernels.hpp"

namespace flocksim {

// ---------------------------------------------------------------------------
// Time stepping of the N-particle system under one shared scalar Brownian
// path. Two schemes:
//   - ItoEM:     Euler-Maruyama with drift l_cs + l_mt + s (Ito form),
//   - StratHeun: Heun predictor-corrector with drift l_cs + l_mt
//                (Stratonovich form; no s term).
// Their agreement as dt -> 0 is the cross-validation of the conversion drift.
// ---------------------------------------------------------------------------

enum class Scheme { ItoEM, StratHeun };

struct GaussianInit {
  std::vector<double> pos_mean;  // length dim (empty = origin)
  std::vector<double> vel_mean;
  double pos_std = 1.0;
  double vel_std = 1.0;
};

struct UniformBoxInit {
  std::vector<double> pos_lo, pos_hi;  // length dim
  std::vector<double> vel_lo, vel_hi;
};

/// Two spatial clusters at +-(separation/2) e1 with mean velocities
/// +-speed e1; particles alternate clusters so prefixes stay balanced.
struct TwoClusterInit {
  double separation = 4.0;
  double speed = 1.0;
  double pos_std = 0.5;
  double vel_std = 0.1;
};

using InitSpec = std::variant<GaussianInit, UniformBoxInit, TwoClusterInit>;

struct SimConfig {
  int n = 1;
  int dim = 2;
  double t_final = 1.0;
  double dt = 0.01;
  Scheme scheme = Scheme::ItoEM;
  Truncation truncation;
  KernelSpec kernel;
  std::uint64_t noise_seed = 1;
  std::uint64_t init_seed = 1;
  InitSpec init = GaussianInit{};
  int record_every = 1;
  int threads = 1;

  std::size_t step_count() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }
  void validate() const;  // throws ConfigError
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ParticleEnsemble> snapshots;
  BrownianPath path = BrownianPath::generate(0, 1.0, 0);
};

/// Per-snapshot scalar diagnostics.
struct DiagnosticsRecord {
  std::vector<double> times;
  std::vector<double> moment2_state;      // (1/N) sum |z|^2
  std::vector<double> moment2_velocity;   // (1/N) sum |v|^2
  std::vector<double> moment4_velocity;   // (1/N) sum |v|^4
  std::vector<double> velocity_variance;  // (1/N) sum |v - vbar|^2
  std::vector<double> kinetic_energy;     // (1/2N) sum |v|^2
  std::vector<double> mean_velocity;      // snapshots * dim, row-major

  std::size_t size() const { return times.size(); }
};

struct SimResult {
  Trajectory trajectory;
  DiagnosticsRecord diagnostics;
  ParticleEnsemble final_state;  // state after the last step, regardless of recording stride
};

/// Thrown when a coordinate leaves the sanity envelope (non-finite or beyond
/// 1e12); carries the offending step and the diagnostics recorded so far.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(std::size_t step, DiagnosticsRecord diag)
      : std::runtime_error("numerical blow-up at step " + std::to_string(step)),
        step_index(step), diagnostics_so_far(std::move(diag)) {}
  std::size_t step_index;
  DiagnosticsRecord diagnostics_so_far;
};

/// N i.i.d. draws from the init descriptor. Draw i depends only on
/// (init_seed, i), so the first N particles of a larger draw with the same
/// seed coincide with the smaller draw (nested coupling).
ParticleEnsemble sample_initial(const SimConfig& config);

ParticleEnsemble step_ito_em(const ParticleEnsemble& ens, const KernelSpec& spec,
                             const Truncation& tr, double dbeta, double dt, int threads = 1);

/// One Euler step with the conversion drift switchable; step_ito_em is
/// step_euler with include_correction = true. The switched-off form is the
/// negative control of the scheme-consistency study.
ParticleEnsemble step_euler(const ParticleEnsemble& ens, const KernelSpec& spec,
                            const Truncation& tr, double dbeta, double dt,
                            bool include_correction, int threads = 1);

ParticleEnsemble step_strat_heun(const ParticleEnsemble& ens, const KernelSpec& spec,
                                 const Truncation& tr, double dbeta, double dt, int threads = 1);

SimResult simulate(const SimConfig& config);
SimResult simulate(const SimConfig& config, const BrownianPath& path);

/// Deterministic RK4 on the drift-only dynamics (dx = v dt, dv = drift dt).
/// Serves as the independent integration oracle for noise-free studies.
ParticleEnsemble integrate_drift_rk4(const ParticleEnsemble& init, const KernelSpec& spec,
                                     const Truncation& tr, bool include_s, double t_final,
                                     double dt, int threads = 1);

Scheme scheme_from_string(const std::string& s);
std::string to_string(Scheme s);

}  // namespace flocksim
