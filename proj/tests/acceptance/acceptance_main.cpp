// Acceptance suite: one criterion per entry, each printing a single
// [PASS]/[FAIL] line with the measured values, thresholds and elapsed time.
//
//   flocksim_acceptance <1..7|all>
//
// Criteria 1-6 run the studies from the shipped reference configs; criterion
// 7 is the battery of structural invariants.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "config.hpp"
#include "flocksim/experiments.hpp"

using namespace flocksim;

#ifndef FLOCKSIM_CONFIG_DIR
#error "FLOCKSIM_CONFIG_DIR must be defined"
#endif

namespace {

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;
  std::function<bool(std::string&)> run;  // fills a detail string
};

StudySpec load_study(const std::string& file) {
  cli::Config cfg = cli::Config::parse_file(std::string(FLOCKSIM_CONFIG_DIR) + "/" + file);
  return cli::study_from_config(cfg, "");
}

bool verdicts_pass(const StudyReport& rep, std::string& detail) {
  std::ostringstream os;
  bool ok = true;
  for (const auto& v : rep.verdicts) {
    os << v.criterion << "=" << v.measured << (v.pass ? " (<=ok) " : " (FAIL) ");
    ok = ok && v.pass;
  }
  detail += os.str();
  return ok;
}

void expect(bool cond, const char* what, bool& ok, std::string& detail) {
  if (!cond) {
    ok = false;
    detail += std::string(" [config drift: ") + what + "]";
  }
}

// --------------------------------------------------------------------------
// Criteria 1-6: reference studies
// --------------------------------------------------------------------------

bool criterion1(std::string& detail) {
  StudySpec spec = load_study("strat_ito.ini");
  bool ok = true;
  expect(spec.base.n == 16 && spec.base.dim == 2, "n=16 d=2", ok, detail);
  expect(spec.seeds.size() == 8, "8 seeds", ok, detail);
  expect(std::abs(spec.base.dt - 0.015625) < 1e-15, "dt=2^-6", ok, detail);
  expect(std::get<DtHalvings>(spec.sweep).count == 5, "5 ladder levels", ok, detail);
  expect(spec.base.truncation.R == 50.0, "R=50", ok, detail);
  const StudyReport rep = study_strat_ito(spec);
  return verdicts_pass(rep, detail) && ok;
}

bool criterion2(std::string& detail) {
  StudySpec spec = load_study("meanfield.ini");
  bool ok = true;
  expect(std::get<NDoubling>(spec.sweep).n_list == std::vector<int>{32, 64, 128, 256},
         "n_list 32..256", ok, detail);
  expect(spec.seeds.size() == 20, "20 seeds", ok, detail);
  const StudyReport rep = study_meanfield(spec);
  return verdicts_pass(rep, detail) && ok;
}

bool criterion3(std::string& detail) {
  StudySpec spec = load_study("sweep_R.ini");
  bool ok = true;
  expect(std::get<RSweep>(spec.sweep).r_values == std::vector<double>{1.0, 10.0, 100.0},
         "R sweep {1,10,100}", ok, detail);
  expect(spec.base.n == 512, "n=512", ok, detail);
  expect(spec.seeds.size() == 10, "10 seeds", ok, detail);
  const StudyReport rep = study_r_uniformity(spec);
  bool pass = ok;
  for (const auto& v : rep.verdicts)
    if (v.criterion.rfind("C3.", 0) == 0) {
      detail += v.criterion + "=" + std::to_string(v.measured) + (v.pass ? " " : " (FAIL) ");
      pass = pass && v.pass;
    }
  return pass;
}

bool criterion4(std::string& detail) {
  StudySpec spec = load_study("sweep_R.ini");
  bool ok = true;
  expect(std::abs(std::get<RSweep>(spec.sweep).eta - 1.0 / 6.0) < 1e-12, "eta=1/6", ok, detail);
  const StudyReport rep = study_r_uniformity(spec);
  bool pass = ok;
  for (const auto& v : rep.verdicts)
    if (v.criterion.rfind("C4.", 0) == 0) {
      detail += v.criterion + "=" + std::to_string(v.measured) + (v.pass ? " " : " (FAIL) ");
      pass = pass && v.pass;
    }
  return pass;
}

bool criterion5(std::string& detail) {
  StudySpec spec = load_study("sweep_r.ini");
  bool ok = true;
  expect(spec.base.n == 4096, "n=4096", ok, detail);
  expect(std::get<PhiRSweep>(spec.sweep).r_values == std::vector<double>{2.0, 1.0, 0.5, 0.25},
         "r sweep {2,1,0.5,0.25}", ok, detail);
  expect(std::get<PhiRSweep>(spec.sweep).n_projections == 64, "64 projections", ok, detail);
  expect(std::holds_alternative<TwoClusterInit>(spec.base.init), "two-cluster init", ok, detail);
  const StudyReport rep = study_sla_limit(spec);
  return verdicts_pass(rep, detail) && ok;
}

bool criterion6(std::string& detail) {
  StudySpec spec = load_study("flock.ini");
  bool ok = true;
  const auto* cpsi = std::get_if<ConstantKernel>(&spec.base.kernel.psi);
  expect(cpsi != nullptr && cpsi->c == 1.0, "psi == 1", ok, detail);
  expect(pair_kernel_is_zero(spec.base.kernel.psi_tilde), "noise off", ok, detail);
  const StudyReport rep = study_flocking(spec);
  return verdicts_pass(rep, detail) && ok;
}

// --------------------------------------------------------------------------
// Criterion 7: invariant suites
// --------------------------------------------------------------------------

ParticleEnsemble random_cloud(int n, int d, std::uint64_t seed, double pos_scale = 2.0,
                              double vel_scale = 2.0) {
  ParticleEnsemble ens(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      ens.position(i)[static_cast<std::size_t>(k)] =
          pos_scale * normal01(seed, 1, static_cast<std::uint64_t>(i * d + k));
      ens.velocity(i)[static_cast<std::size_t>(k)] =
          vel_scale * normal01(seed, 2, static_cast<std::uint64_t>(i * d + k));
    }
  return ens;
}

bool check_truncation_invariants(std::string& detail) {
  for (double R : {1.0, 10.0, 100.0}) {
    const Truncation tr{R, 0.5};
    const double cap = tr.outer_radius();
    for (int i = 0; i < 500; ++i) {
      std::vector<double> v{3.0 * cap * normal01(900, 0, 2 * static_cast<std::uint64_t>(i)),
                            3.0 * cap * normal01(900, 0, 2 * static_cast<std::uint64_t>(i) + 1)};
      std::vector<double> out(2), neg_out(2);
      theta(tr, v, out);
      const double nv = norm(v);
      if (norm(out) > std::min(nv, cap) * (1 + 1e-12)) {
        detail += "sandwich violated ";
        return false;
      }
      if (nv <= R && (out[0] != v[0] || out[1] != v[1])) {
        detail += "identity-inside violated ";
        return false;
      }
      std::vector<double> nv2{-v[0], -v[1]};
      theta(tr, nv2, neg_out);
      if (neg_out[0] != -out[0] || neg_out[1] != -out[1]) {
        detail += "odd symmetry violated ";
        return false;
      }
    }
  }
  detail += "sandwich+odd ok; ";
  return true;
}

bool check_hull_bound(std::string& detail) {
  KernelSpec spec;
  spec.dim = 2;
  spec.psi = RationalKernel{1.0, 1.0};
  spec.psi_tilde = ConstantKernel{0.0};
  spec.phi = BumpKernel{1.0, 2.0, 1.0};
  const Truncation tr{10.0, 0.5};
  for (int trial = 0; trial < 1000; ++trial) {
    const ParticleEnsemble ens = random_cloud(12, 2, 1000 + static_cast<std::uint64_t>(trial), 1.5, 4.0);
    double cap = 0.0;
    std::vector<double> th(2);
    for (int j = 0; j < ens.n; ++j) {
      theta(tr, ens.velocity(j), th);
      cap = std::max(cap, norm(th));
    }
    const CoefficientBundle b = eval_bundle(ens, spec, tr);
    for (int i = 0; i < ens.n; ++i) {
      const double nu = norm(std::span<const double>{b.u.data() + 2 * static_cast<std::size_t>(i), 2});
      if (nu > cap * (1 + 1e-12) + 1e-300) {
        detail += "hull bound violated ";
        return false;
      }
    }
  }
  detail += "hull bound ok on 1000 ensembles; ";
  return true;
}

bool check_antisymmetry(std::string& detail) {
  KernelSpec spec;
  spec.dim = 2;
  spec.psi = RationalKernel{1.3, 1.0};
  spec.psi_tilde = ConstantKernel{0.0};
  spec.phi = BumpKernel{0.5, 1.0, 1.0};
  const Truncation tr{10.0, 0.5};
  const ParticleEnsemble ens = random_cloud(128, 2, 31);
  const CoefficientBundle b = eval_bundle(ens, spec, tr);
  double total = 0.0, mass = 0.0;
  for (double x : b.l_cs) {
    total += x;
    mass += std::abs(x);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "sum l_cs rel=%.2e; ", std::abs(total) / mass);
  detail += buf;
  return std::abs(total) <= 1e-10 * mass;
}

bool check_cell_list_bit_equality(std::string& detail) {
  KernelSpec spec;
  spec.dim = 2;
  spec.psi = ConstantKernel{0.0};
  spec.psi_tilde = ConstantKernel{0.0};
  spec.phi = BumpKernel{0.6, 1.1, 1.0};
  const Truncation tr{20.0, 0.5};
  const ParticleEnsemble ens = random_cloud(200, 2, 55, 3.0, 1.0);
  const CellIndex index(ens, spec.phi.r2);
  const CoefficientBundle brute = eval_bundle(ens, spec, tr, nullptr);
  const CoefficientBundle indexed = eval_bundle(ens, spec, tr, &index);
  const bool equal =
      std::memcmp(brute.u.data(), indexed.u.data(), brute.u.size() * sizeof(double)) == 0;
  detail += equal ? "cell-list bit-equal at n=200; " : "cell-list mismatch; ";
  return equal;
}

double brute_force_w2(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  std::vector<int> perm(static_cast<std::size_t>(a.n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < a.n; ++i) {
      for (int k = 0; k < a.dim; ++k) {
        total += sq(a.position(i)[static_cast<std::size_t>(k)] -
                    b.position(perm[static_cast<std::size_t>(i)])[static_cast<std::size_t>(k)]);
        total += sq(a.velocity(i)[static_cast<std::size_t>(k)] -
                    b.velocity(perm[static_cast<std::size_t>(i)])[static_cast<std::size_t>(k)]);
      }
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / a.n);
}

bool check_w2_axioms(std::string& detail) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(t % 7);  // 2..8
    const ParticleEnsemble a = random_cloud(n, 1, 3 * t + 11);
    const ParticleEnsemble b = random_cloud(n, 1, 3 * t + 12);
    const ParticleEnsemble c = random_cloud(n, 1, 3 * t + 13);
    const double dab = wasserstein_exact(a, b, 2.0).distance;
    const double dba = wasserstein_exact(b, a, 2.0).distance;
    const double dac = wasserstein_exact(a, c, 2.0).distance;
    const double dbc = wasserstein_exact(b, c, 2.0).distance;
    if (std::abs(dab - dba) > 1e-12 * (1 + dab)) {
      detail += "symmetry violated ";
      return false;
    }
    if (wasserstein_exact(a, a, 2.0).distance > 1e-12) {
      detail += "identity violated ";
      return false;
    }
    if (dac > dab + dbc + 1e-9) {
      detail += "triangle violated ";
      return false;
    }
    if (n <= 6) {  // exhaustive permutation oracle
      if (std::abs(dab - brute_force_w2(a, b)) > 1e-10 * (1 + dab)) {
        detail += "permutation optimum missed ";
        return false;
      }
    }
  }
  detail += "W2 axioms + permutation oracle ok; ";
  return true;
}

bool check_plancherel(std::string& detail) {
  GridDensity g;
  g.grid.origin = {-1.0, -2.0};
  g.grid.extent = {2.0, 4.0};
  g.grid.resolution = {32, 16};
  g.values.resize(g.grid.cell_count());
  for (std::size_t c = 0; c < g.values.size(); ++c) g.values[c] = normal01(77, 0, c);
  double direct = 0.0;
  for (double v : g.values) direct += v * v;
  direct *= g.grid.cell_volume() * 0.125;
  const double viaft = sobolev_norm_time_series({g}, 0.0, 0.125);
  const double rel = std::abs(viaft - direct) / direct;
  char buf[64];
  std::snprintf(buf, sizeof buf, "plancherel rel=%.2e; ", rel);
  detail += buf;
  return rel <= 1e-10;
}

bool reports_identical(const StudyReport& a, const StudyReport& b) {
  if (a.tables.size() != b.tables.size()) return false;
  for (std::size_t t = 0; t < a.tables.size(); ++t)
    if (a.tables[t].rows != b.tables[t].rows) return false;
  for (std::size_t v = 0; v < a.verdicts.size(); ++v)
    if (std::memcmp(&a.verdicts[v].measured, &b.verdicts[v].measured, sizeof(double)) != 0)
      return false;
  return true;
}

bool check_study_rerun_determinism(std::string& detail) {
  SimConfig base;
  base.n = 16;
  base.dim = 2;
  base.t_final = 0.25;
  base.dt = 0.0625;
  base.truncation = Truncation{20.0, 0.5};
  base.kernel.dim = 2;
  base.kernel.psi = RationalKernel{1.0, 1.0};
  base.kernel.psi_tilde = ConstantKernel{0.4};
  base.kernel.phi = BumpKernel{0.5, 1.0, 1.0};
  base.record_every = 2;

  StudySpec spec;
  spec.base = base;
  spec.seeds = {1, 2};

  spec.sweep = DtHalvings{2};
  if (!reports_identical(study_strat_ito(spec), study_strat_ito(spec))) {
    detail += "strat-ito rerun differs ";
    return false;
  }
  spec.sweep = NDoubling{{8, 16}};
  if (!reports_identical(study_meanfield(spec), study_meanfield(spec))) {
    detail += "meanfield rerun differs ";
    return false;
  }
  {
    StudySpec s = spec;
    RSweep sweep;
    sweep.r_values = {1.0, 10.0};
    sweep.grid.origin = {-6.0, -6.0};
    sweep.grid.extent = {12.0, 12.0};
    sweep.grid.resolution = {16, 16};
    sweep.bandwidth = 0.4;
    s.sweep = sweep;
    if (!reports_identical(study_r_uniformity(s), study_r_uniformity(s))) {
      detail += "sweep-R rerun differs ";
      return false;
    }
  }
  {
    StudySpec s = spec;
    s.base.kernel.psi = ConstantKernel{0.0};
    s.base.kernel.psi_tilde = ConstantKernel{0.0};
    s.base.init = TwoClusterInit{1.0, 1.0, 0.5, 0.02};
    s.base.n = 32;
    s.sweep = PhiRSweep{{1.0, 0.5}, 8, 0};
    if (!reports_identical(study_sla_limit(s), study_sla_limit(s))) {
      detail += "sweep-r rerun differs ";
      return false;
    }
  }
  {
    StudySpec s = spec;
    s.base.kernel.psi = ConstantKernel{1.0};
    s.base.kernel.psi_tilde = ConstantKernel{0.0};
    s.base.kernel.phi = BumpKernel{0.004, 0.01, 1e4};
    s.base.init = UniformBoxInit{{0, 0}, {10, 10}, {-1, -1}, {1, 1}};
    s.base.dt = 0.005;
    s.sweep = FlockStudy{};
    if (!reports_identical(study_flocking(s), study_flocking(s))) {
      detail += "flock rerun differs ";
      return false;
    }
  }
  detail += "bit-identical reruns of all 5 study kinds; ";
  return true;
}

bool criterion7(std::string& detail) {
  bool ok = true;
  ok = check_truncation_invariants(detail) && ok;
  ok = check_hull_bound(detail) && ok;
  ok = check_antisymmetry(detail) && ok;
  ok = check_cell_list_bit_equality(detail) && ok;
  ok = check_w2_axioms(detail) && ok;
  ok = check_plancherel(detail) && ok;
  ok = check_study_rerun_determinism(detail) && ok;
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "scheme consistency: Heun vs Euler-Maruyama with conversion drift", 120.0, criterion1},
      {2, "mean-field Cauchy decrease of E[sup_t W2^2] in n", 300.0, criterion2},
      {3, "uniform-in-R velocity moments (4th-moment ratio <= 3)", 180.0, criterion3},
      {4, "uniform-in-R averaging norm (eta = 1/6, ratio <= 2)", 120.0, criterion4},
      {5, "local-alignment limit: u_R vs k-NN oracle + Cauchy endpoints", 300.0, criterion5},
      {6, "deterministic flocking decay rate within 10% of 2*lambda", 30.0, criterion6},
      {7, "invariant suites (truncation, hull, antisymmetry, cell list, W2, "
          "Plancherel, rerun determinism)", 120.0, criterion7},
  };

  std::string which = argc > 1 ? argv[1] : "all";
  int failures = 0;
  for (const auto& c : criteria) {
    if (which != "all" && which != std::to_string(c.id)) continue;
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& e) {
      detail += std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = elapsed <= c.time_limit_s;
    pass = pass && in_budget;
    std::printf("[%s] criterion %d: %s  (%.1fs / limit %.0fs)  %s\n", pass ? "PASS" : "FAIL",
                c.id, c.title.c_str(), elapsed, c.time_limit_s, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
