#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "flocksim/experiments.hpp"

namespace flocksim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::uint64_t file_checksum(const fs::path& p, std::uintmax_t& bytes) {
  std::ifstream is(p, std::ios::binary);
  std::vector<char> buf(1 << 16);
  std::uint64_t h = 0xcbf29ce484222325ull;
  bytes = 0;
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = is.gcount();
    if (got <= 0) break;
    h = fnv1a(buf.data(), static_cast<std::size_t>(got), h);
    bytes += static_cast<std::uintmax_t>(got);
  }
  return h;
}

void write_trajectory_csv(const Trajectory& traj, const fs::path& path) {
  std::ofstream os(path);
  const int d = traj.snapshots.empty() ? 0 : traj.snapshots.front().dim;
  os << "snapshot_index,time,particle_id";
  for (int k = 1; k <= d; ++k) os << ",x_" << k;
  for (int k = 1; k <= d; ++k) os << ",v_" << k;
  os << "\n";
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const auto& ens = traj.snapshots[s];
    for (int i = 0; i < ens.n; ++i) {
      os << s << "," << fmt17(traj.times[s]) << "," << i;
      for (int k = 0; k < d; ++k) os << "," << fmt17(ens.position(i)[static_cast<std::size_t>(k)]);
      for (int k = 0; k < d; ++k) os << "," << fmt17(ens.velocity(i)[static_cast<std::size_t>(k)]);
      os << "\n";
    }
  }
}

void write_trajectory_binary(const Trajectory& traj, const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  auto put_u64 = [&](std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); };
  auto put_f64 = [&](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
  os.write("FLKTRAJ1", 8);
  const int d = traj.snapshots.empty() ? 0 : traj.snapshots.front().dim;
  const int n = traj.snapshots.empty() ? 0 : traj.snapshots.front().n;
  put_u64(static_cast<std::uint64_t>(traj.snapshots.size()));
  put_u64(static_cast<std::uint64_t>(n));
  put_u64(static_cast<std::uint64_t>(d));
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    put_u64(s);
    put_f64(traj.times[s]);
    const auto& ens = traj.snapshots[s];
    os.write(reinterpret_cast<const char*>(ens.pos.data()),
             static_cast<std::streamsize>(ens.pos.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(ens.vel.data()),
             static_cast<std::streamsize>(ens.vel.size() * sizeof(double)));
  }
}

void write_diagnostics_csv(const DiagnosticsRecord& diag, int dim, const fs::path& path) {
  std::ofstream os(path);
  os << "time,moment2_state,moment2_velocity,moment4_velocity,velocity_variance,kinetic_energy";
  for (int k = 1; k <= dim; ++k) os << ",mean_v_" << k;
  os << "\n";
  for (std::size_t t = 0; t < diag.size(); ++t) {
    os << fmt17(diag.times[t]) << "," << fmt17(diag.moment2_state[t]) << ","
       << fmt17(diag.moment2_velocity[t]) << "," << fmt17(diag.moment4_velocity[t]) << ","
       << fmt17(diag.velocity_variance[t]) << "," << fmt17(diag.kinetic_energy[t]);
    for (int k = 0; k < dim; ++k)
      os << "," << fmt17(diag.mean_velocity[t * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)]);
    os << "\n";
  }
}

void write_manifest(const fs::path& out_dir, const Config& cfg, const json& seeds,
                    const std::string& started, const std::vector<fs::path>& outputs) {
  json m;
  m["tool_version"] = kToolVersion;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                static_cast<unsigned long long>(cfg.hash()));
  m["config_hash"] = std::string("fnv1a:") + hash_hex;
  m["seeds"] = seeds;
  m["started_utc"] = started;
  m["finished_utc"] = iso_now();
  m["outputs"] = json::array();
  for (const auto& p : outputs) {
    std::uintmax_t bytes = 0;
    const std::uint64_t sum = file_checksum(p, bytes);
    char sum_hex[32];
    std::snprintf(sum_hex, sizeof sum_hex, "%016llx", static_cast<unsigned long long>(sum));
    m["outputs"].push_back({{"path", p.filename().string()},
                            {"bytes", bytes},
                            {"fnv1a64", std::string(sum_hex)}});
  }
  std::ofstream os(out_dir / "manifest.json");
  os << m.dump(2) << "\n";
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string seeds;
  std::string format = "csv";
  int threads = 1;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::uint64_t>(std::stoull(item)));
  }
  return out;
}

int cmd_simulate(const CommonFlags& flags) {
  Config cfg = Config::parse_file(flags.config_path);
  cfg.apply_env_overrides();
  SimConfig sim = sim_from_config(cfg);
  for (const char* s : {"kernel", "truncation", "sim"}) cfg.check_consumed(s);
  sim.threads = flags.threads;
  if (!flags.seeds.empty()) {
    const auto seeds = parse_seed_list(flags.seeds);
    if (!seeds.empty()) sim.noise_seed = seeds[0];
    if (seeds.size() > 1) sim.init_seed = seeds[1];
  }

  const std::string started = iso_now();
  const SimResult res = simulate(sim);

  fs::create_directories(flags.out_dir);
  const fs::path out(flags.out_dir);
  std::vector<fs::path> outputs;
  if (flags.format == "binary") {
    write_trajectory_binary(res.trajectory, out / "trajectory.bin");
    outputs.push_back(out / "trajectory.bin");
  } else {
    write_trajectory_csv(res.trajectory, out / "trajectory.csv");
    outputs.push_back(out / "trajectory.csv");
  }
  write_diagnostics_csv(res.diagnostics, sim.dim, out / "diagnostics.csv");
  outputs.push_back(out / "diagnostics.csv");

  write_manifest(out, cfg, {{"noise", sim.noise_seed}, {"init", sim.init_seed}}, started, outputs);
  std::cout << "simulate: wrote " << outputs.size() + 1 << " files to " << flags.out_dir << "\n";
  return kExitOk;
}

int cmd_study(const std::string& kind, const CommonFlags& flags) {
  Config cfg = Config::parse_file(flags.config_path);
  cfg.apply_env_overrides();
  if (!cfg.has_section("study")) throw ConfigError("study: missing section");
  const std::string cfg_kind = cfg.get_string("study", "kind");
  if (cfg_kind != kind)
    throw ConfigError("study.kind: config declares '" + cfg_kind + "' but command requested '" +
                      kind + "'");
  StudySpec spec = study_from_config(cfg, flags.out_dir);
  for (const char* s : {"kernel", "truncation", "sim", "study"}) cfg.check_consumed(s);
  spec.base.threads = flags.threads;
  if (!flags.seeds.empty()) spec.seeds = parse_seed_list(flags.seeds);

  const std::string started = iso_now();
  const StudyReport report = run_study(spec);
  std::cout << report.summary();

  fs::create_directories(flags.out_dir);
  std::vector<fs::path> outputs;
  for (const auto& p : report.write(flags.out_dir)) outputs.emplace_back(p);
  json seeds = json::array();
  for (auto s : spec.seeds) seeds.push_back(s);
  write_manifest(fs::path(flags.out_dir), cfg, {{"replicates", seeds}}, started, outputs);

  return report.all_pass() ? kExitOk : kExitVerdictFail;
}

int cmd_validate(const std::string& config_path) {
  Config cfg = Config::parse_file(config_path);
  cfg.apply_env_overrides();
  const KernelSpec spec = kernel_from_config(cfg);
  cfg.check_consumed("kernel");
  const ValidationReport rep = validate_assumptions(spec);
  std::cout << rep.summary();
  std::cout << (rep.all_pass() ? "validation: all checks passed\n"
                               : "validation: checks FAILED\n");
  return rep.all_pass() ? kExitOk : kExitVerdictFail;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"stochastic Cucker-Smale / Motsch-Tadmor flocking laboratory", "flocksim"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string study_kind;

  auto* sim = app.add_subcommand("simulate", "run one simulation and write its artifacts");
  sim->add_option("--config", flags.config_path, "config file")->required();
  sim->add_option("--out", flags.out_dir, "output directory")->required();
  sim->add_option("--seeds", flags.seeds, "noise[,init] seed override");
  sim->add_option("--threads", flags.threads, "worker threads (0 = auto)");
  sim->add_option("--format", flags.format, "trajectory format: csv|binary")
      ->check(CLI::IsMember({"csv", "binary"}));

  auto* study = app.add_subcommand("study", "run a reproducibility study");
  study->add_option("kind", study_kind, "strat-ito | meanfield | sweep-R | sweep-r | flock")
      ->required()
      ->check(CLI::IsMember({"strat-ito", "meanfield", "sweep-R", "sweep-r", "flock"}));
  study->add_option("--config", flags.config_path, "config file")->required();
  study->add_option("--out", flags.out_dir, "output directory")->required();
  study->add_option("--seeds", flags.seeds, "replicate seed list override");
  study->add_option("--threads", flags.threads, "worker threads (0 = auto)");

  auto* validate = app.add_subcommand("validate", "check the model assumptions of a config");
  validate->add_option("--config", flags.config_path, "config file")->required();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(flags);
    if (study->parsed()) return cmd_study(study_kind, flags);
    return cmd_validate(flags.config_path);
  } catch (const BlowupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace flocksim::cli
