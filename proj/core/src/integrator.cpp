#include "flocksim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace flocksim {

namespace {

constexpr double kBlowupThreshold = 1e12;
constexpr std::uint64_t kInitStreamTag = 0x496e6974ull;

double init_normal(std::uint64_t seed, int particle, int slot) {
  return normal01(seed, hash_combine(kInitStreamTag, static_cast<std::uint64_t>(slot)),
                  static_cast<std::uint64_t>(particle));
}

double init_uniform(std::uint64_t seed, int particle, int slot) {
  return uniform01(seed, hash_combine(kInitStreamTag, static_cast<std::uint64_t>(slot)),
                   static_cast<std::uint64_t>(particle));
}

bool within_envelope(const ParticleEnsemble& ens) {
  for (double x : ens.pos)
    if (!std::isfinite(x) || std::abs(x) > kBlowupThreshold) return false;
  for (double v : ens.vel)
    if (!std::isfinite(v) || std::abs(v) > kBlowupThreshold) return false;
  return true;
}

void record_diagnostics(DiagnosticsRecord& rec, double t, const ParticleEnsemble& ens) {
  const int d = ens.dim;
  double m2z = 0.0, m2v = 0.0, m4v = 0.0;
  std::vector<double> vbar(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < ens.n; ++i) {
    const double x2 = norm_sq(ens.position(i));
    const double v2 = norm_sq(ens.velocity(i));
    m2z += x2 + v2;
    m2v += v2;
    m4v += v2 * v2;
    const auto vi = ens.velocity(i);
    for (int k = 0; k < d; ++k) vbar[static_cast<std::size_t>(k)] += vi[static_cast<std::size_t>(k)];
  }
  const double inv_n = 1.0 / ens.n;
  for (auto& c : vbar) c *= inv_n;
  double var = 0.0;
  for (int i = 0; i < ens.n; ++i) {
    const auto vi = ens.velocity(i);
    for (int k = 0; k < d; ++k) var += sq(vi[static_cast<std::size_t>(k)] - vbar[static_cast<std::size_t>(k)]);
  }
  rec.times.push_back(t);
  rec.moment2_state.push_back(m2z * inv_n);
  rec.moment2_velocity.push_back(m2v * inv_n);
  rec.moment4_velocity.push_back(m4v * inv_n);
  rec.velocity_variance.push_back(var * inv_n);
  rec.kinetic_energy.push_back(0.5 * m2v * inv_n);
  rec.mean_velocity.insert(rec.mean_velocity.end(), vbar.begin(), vbar.end());
}

// Builds a cell index when phi-sums would actually profit from one.
std::unique_ptr<CellIndex> maybe_index(const ParticleEnsemble& ens, const KernelSpec& spec) {
  if (ens.n < 256) return nullptr;
  auto idx = std::make_unique<CellIndex>(ens, spec.phi.r2);
  if (idx->degenerate()) return nullptr;
  return idx;
}

ParticleEnsemble apply_update(const ParticleEnsemble& ens, const CoefficientBundle& drift_b,
                              const CoefficientBundle& diff_b, double dt, double dbeta,
                              bool include_s) {
  ParticleEnsemble out(ens.n, ens.dim);
  const std::size_t total = ens.pos.size();
  for (std::size_t m = 0; m < total; ++m) {
    out.pos[m] = ens.pos[m] + ens.vel[m] * dt;
    double a = drift_b.l_cs[m] + drift_b.l_mt[m];
    if (include_s) a += drift_b.s[m];
    out.vel[m] = ens.vel[m] + a * dt + diff_b.k[m] * dbeta;
  }
  return out;
}

}  // namespace

void SimConfig::validate() const {
  if (n < 1) throw ConfigError("sim.n: particle count must be >= 1");
  if (dim < 1) throw ConfigError("sim.dim: dimension must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("sim.dt: step must be positive");
  if (t_final < 0.0) throw ConfigError("sim.t_final: horizon must be >= 0");
  if (t_final > 0.0 && t_final < dt) throw ConfigError("sim.t_final: horizon must be >= dt");
  if (record_every < 1) throw ConfigError("sim.record_every: stride must be >= 1");
  if (!(truncation.R > 0.0)) throw ConfigError("truncation.R: must be positive");
  if (!(truncation.smoothing_width > 0.0))
    throw ConfigError("truncation.smoothing_width: must be positive");
  if (kernel.dim != dim) throw ConfigError("kernel.dim: must match sim.dim");
  if (const auto* cf = std::get_if<ConstantForcing>(&kernel.forcing)) {
    if (static_cast<int>(cf->value.size()) != dim)
      throw ConfigError("kernel.forcing.value: constant forcing vector must have sim.dim entries");
  }
  if (const auto* ub = std::get_if<UniformBoxInit>(&init)) {
    if (static_cast<int>(ub->pos_lo.size()) != dim || static_cast<int>(ub->pos_hi.size()) != dim ||
        static_cast<int>(ub->vel_lo.size()) != dim || static_cast<int>(ub->vel_hi.size()) != dim)
      throw ConfigError("sim.init: uniform_box bounds must have sim.dim entries");
  }
}

ParticleEnsemble sample_initial(const SimConfig& config) {
  config.validate();
  const int d = config.dim;
  ParticleEnsemble ens(config.n, d);

  if (const auto* g = std::get_if<GaussianInit>(&config.init)) {
    for (int i = 0; i < config.n; ++i) {
      auto x = ens.position(i);
      auto v = ens.velocity(i);
      for (int k = 0; k < d; ++k) {
        const double mx = k < static_cast<int>(g->pos_mean.size()) ? g->pos_mean[static_cast<std::size_t>(k)] : 0.0;
        const double mv = k < static_cast<int>(g->vel_mean.size()) ? g->vel_mean[static_cast<std::size_t>(k)] : 0.0;
        x[static_cast<std::size_t>(k)] = mx + g->pos_std * init_normal(config.init_seed, i, k);
        v[static_cast<std::size_t>(k)] = mv + g->vel_std * init_normal(config.init_seed, i, d + k);
      }
    }
    return ens;
  }
  if (const auto* u = std::get_if<UniformBoxInit>(&config.init)) {
    for (int i = 0; i < config.n; ++i) {
      auto x = ens.position(i);
      auto v = ens.velocity(i);
      for (int k = 0; k < d; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        x[ks] = u->pos_lo[ks] + (u->pos_hi[ks] - u->pos_lo[ks]) * init_uniform(config.init_seed, i, k);
        v[ks] = u->vel_lo[ks] + (u->vel_hi[ks] - u->vel_lo[ks]) * init_uniform(config.init_seed, i, d + k);
      }
    }
    return ens;
  }
  const auto& tc = std::get<TwoClusterInit>(config.init);
  for (int i = 0; i < config.n; ++i) {
    const double side = (i % 2 == 0) ? 1.0 : -1.0;
    auto x = ens.position(i);
    auto v = ens.velocity(i);
    for (int k = 0; k < d; ++k) {
      x[static_cast<std::size_t>(k)] = tc.pos_std * init_normal(config.init_seed, i, k);
      v[static_cast<std::size_t>(k)] = tc.vel_std * init_normal(config.init_seed, i, d + k);
    }
    x[0] += side * 0.5 * tc.separation;
    v[0] += side * tc.speed;
  }
  return ens;
}

ParticleEnsemble step_euler(const ParticleEnsemble& ens, const KernelSpec& spec,
                            const Truncation& tr, double dbeta, double dt,
                            bool include_correction, int threads) {
  const auto index = maybe_index(ens, spec);
  const CoefficientBundle b = eval_bundle(ens, spec, tr, index.get(), threads);
  return apply_update(ens, b, b, dt, dbeta, include_correction);
}

ParticleEnsemble step_ito_em(const ParticleEnsemble& ens, const KernelSpec& spec,
                             const Truncation& tr, double dbeta, double dt, int threads) {
  return step_euler(ens, spec, tr, dbeta, dt, true, threads);
}

ParticleEnsemble step_strat_heun(const ParticleEnsemble& ens, const KernelSpec& spec,
                                 const Truncation& tr, double dbeta, double dt, int threads) {
  const auto index = maybe_index(ens, spec);
  const CoefficientBundle b0 = eval_bundle(ens, spec, tr, index.get(), threads);
  // Predictor: full Euler step with the Stratonovich drift (no s).
  const ParticleEnsemble pred = apply_update(ens, b0, b0, dt, dbeta, /*include_s=*/false);
  const auto pred_index = maybe_index(pred, spec);
  const CoefficientBundle b1 = eval_bundle(pred, spec, tr, pred_index.get(), threads);

  ParticleEnsemble out(ens.n, ens.dim);
  const std::size_t total = ens.pos.size();
  for (std::size_t m = 0; m < total; ++m) {
    out.pos[m] = ens.pos[m] + 0.5 * (ens.vel[m] + pred.vel[m]) * dt;
    const double a0 = b0.l_cs[m] + b0.l_mt[m];
    const double a1 = b1.l_cs[m] + b1.l_mt[m];
    out.vel[m] = ens.vel[m] + 0.5 * (a0 + a1) * dt + 0.5 * (b0.k[m] + b1.k[m]) * dbeta;
  }
  return out;
}

SimResult simulate(const SimConfig& config) {
  return simulate(config, BrownianPath::generate(config.noise_seed, config.dt,
                                                 std::max<std::size_t>(config.step_count(), 1)));
}

SimResult simulate(const SimConfig& config, const BrownianPath& path) {
  config.validate();
  const std::size_t steps = config.step_count();
  if (path.steps() < steps) throw InvalidInput("simulate: Brownian path shorter than the run");
  if (steps > 0 && std::abs(path.dt() - config.dt) > 1e-12 * config.dt)
    throw InvalidInput("simulate: Brownian path step does not match sim.dt");

  SimResult result;
  result.trajectory.path = path;
  ParticleEnsemble state = sample_initial(config);

  auto record = [&](std::size_t step) {
    const double t = static_cast<double>(step) * config.dt;
    result.trajectory.times.push_back(t);
    result.trajectory.snapshots.push_back(state);
    record_diagnostics(result.diagnostics, t, state);
  };
  record(0);

  for (std::size_t step = 0; step < steps; ++step) {
    const double db = path.increment(step);
    state = config.scheme == Scheme::ItoEM
                ? step_ito_em(state, config.kernel, config.truncation, db, config.dt, config.threads)
                : step_strat_heun(state, config.kernel, config.truncation, db, config.dt, config.threads);
    if (!within_envelope(state))
      throw BlowupError(step + 1, std::move(result.diagnostics));
    if ((step + 1) % static_cast<std::size_t>(config.record_every) == 0) record(step + 1);
  }

  result.final_state = std::move(state);
  return result;
}

ParticleEnsemble integrate_drift_rk4(const ParticleEnsemble& init, const KernelSpec& spec,
                                     const Truncation& tr, bool include_s, double t_final,
                                     double dt, int threads) {
  const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
  const std::size_t total = init.pos.size();
  ParticleEnsemble state = init;

  struct Slope {
    std::vector<double> dx, dv;
  };
  auto eval_slope = [&](const ParticleEnsemble& ens) {
    const auto index = maybe_index(ens, spec);
    const CoefficientBundle b = eval_bundle(ens, spec, tr, index.get(), threads);
    Slope s;
    s.dx = ens.vel;
    s.dv.resize(total);
    for (std::size_t m = 0; m < total; ++m) {
      s.dv[m] = b.l_cs[m] + b.l_mt[m];
      if (include_s) s.dv[m] += b.s[m];
    }
    return s;
  };
  auto shifted = [&](const ParticleEnsemble& ens, const Slope& sl, double h) {
    ParticleEnsemble out(ens.n, ens.dim);
    for (std::size_t m = 0; m < total; ++m) {
      out.pos[m] = ens.pos[m] + h * sl.dx[m];
      out.vel[m] = ens.vel[m] + h * sl.dv[m];
    }
    return out;
  };

  for (std::size_t step = 0; step < steps; ++step) {
    const Slope k1 = eval_slope(state);
    const Slope k2 = eval_slope(shifted(state, k1, 0.5 * dt));
    const Slope k3 = eval_slope(shifted(state, k2, 0.5 * dt));
    const Slope k4 = eval_slope(shifted(state, k3, dt));
    for (std::size_t m = 0; m < total; ++m) {
      state.pos[m] += dt / 6.0 * (k1.dx[m] + 2 * k2.dx[m] + 2 * k3.dx[m] + k4.dx[m]);
      state.vel[m] += dt / 6.0 * (k1.dv[m] + 2 * k2.dv[m] + 2 * k3.dv[m] + k4.dv[m]);
    }
  }
  return state;
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "ito_em") return Scheme::ItoEM;
  if (s == "strat_heun") return Scheme::StratHeun;
  throw ConfigError("sim.scheme: unknown scheme '" + s + "' (expected ito_em or strat_heun)");
}

std::string to_string(Scheme s) {
  return s == Scheme::ItoEM ? "ito_em" : "strat_heun";
}

}  // namespace flocksim
