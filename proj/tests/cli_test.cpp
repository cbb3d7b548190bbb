#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cli.hpp"
#include "config.hpp"

using namespace flocksim;
using namespace flocksim::cli;
namespace fs = std::filesystem;

namespace {

const char* kMinimalConfig = R"ini(
[kernel]
dim = 2
psi.kind = rational
psi.lambda = 1.0
psi.gamma = 1.0
psi_tilde.kind = constant
psi_tilde.c = 0.5
phi.r1 = 0.5
phi.r2 = 1.0
forcing.kind = zero

[truncation]
R = 50

[sim]
n = 8
dim = 2
t_final = 0.1
dt = 0.01
noise_seed = 3
init_seed = 4
init.kind = gaussian
)ini";

std::string write_temp_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream os(p);
  os << text;
  return p.string();
}

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  return text;
}

int run(std::initializer_list<std::string> args) { return run_cli(std::vector<std::string>(args)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  SUBCASE("sections, dotted keys, comments") {
    const Config cfg = Config::parse_text("[a]\nx = 1 # comment\ny.z = 2,3\n[b]\nw = hello\n");
    CHECK(cfg.get_int("a", "x") == 1);
    CHECK(cfg.get_doubles("a", "y.z") == std::vector<double>{2.0, 3.0});
    CHECK(cfg.get_string("b", "w") == "hello");
  }
  SUBCASE("errors carry the field path") {
    const Config cfg = Config::parse_text("[a]\nx = nope\n");
    CHECK_THROWS_WITH_AS(cfg.get_double("a", "x"), doctest::Contains("a.x"), ConfigError);
    CHECK_THROWS_WITH_AS(cfg.get_double("a", "missing"), doctest::Contains("a.missing"), ConfigError);
    CHECK_THROWS_WITH_AS(cfg.get_double("nosec", "x"), doctest::Contains("nosec"), ConfigError);
  }
  SUBCASE("malformed lines rejected with line numbers") {
    CHECK_THROWS_WITH_AS(Config::parse_text("[a]\nbroken line\n"), doctest::Contains(":2"),
                         ConfigError);
    CHECK_THROWS_AS(Config::parse_text("key = outside\n"), ConfigError);
  }
  SUBCASE("hash is stable under key and section reordering") {
    const Config a = Config::parse_text("[s]\nx = 1\ny = 2\n[t]\nz = 3\n");
    const Config b = Config::parse_text("[t]\nz = 3\n[s]\ny = 2\nx = 1\n");
    CHECK(a.hash() == b.hash());
    const Config c = Config::parse_text("[s]\nx = 1\ny = 9\n[t]\nz = 3\n");
    CHECK(a.hash() != c.hash());
  }
  SUBCASE("environment overrides") {
    ::setenv("FLOCKSIM_SIM_DT", "0.5", 1);
    ::setenv("FLOCKSIM_SIM_INIT__POS_STD", "2.5", 1);
    Config cfg = Config::parse_text(kMinimalConfig);
    cfg.apply_env_overrides();
    CHECK(cfg.get_double("sim", "dt") == 0.5);
    CHECK(cfg.get_double("sim", "init.pos_std") == 2.5);
    ::unsetenv("FLOCKSIM_SIM_DT");
    ::unsetenv("FLOCKSIM_SIM_INIT__POS_STD");
  }
  SUBCASE("domain builders reject unknown tags with the field path") {
    std::string bad(kMinimalConfig);
    const auto pos = bad.find("psi.kind = rational");
    bad.replace(pos, 19, "psi.kind = cubic   ");
    const Config cfg = Config::parse_text(bad);
    CHECK_THROWS_WITH_AS(kernel_from_config(cfg), doctest::Contains("psi.kind"), ConfigError);
  }
  SUBCASE("missing kernel section") {
    const Config cfg = Config::parse_text("[sim]\nn = 4\n");
    CHECK_THROWS_WITH_AS(kernel_from_config(cfg), doctest::Contains("kernel"), ConfigError);
  }
  SUBCASE("unconsumed keys are flagged as typos") {
    std::string text(kMinimalConfig);
    text += "\n[sim]\nrecord_evry = 3\n";  // misspelled key lands in [sim]
    const fs::path out = fs::temp_directory_path() / "flocksim_cli_typo_out";
    const std::string p = write_temp_config("flocksim_cli_typo.ini", text);
    CHECK(run({"simulate", "--config", p, "--out", out.string()}) == kExitConfigError);
    fs::remove_all(out);
  }
}

TEST_CASE("simulate command writes trajectory, diagnostics and manifest") {
  const std::string cfg_path = write_temp_config("flocksim_cli_min.ini", kMinimalConfig);
  const fs::path out = fs::temp_directory_path() / "flocksim_cli_sim_out";
  fs::remove_all(out);
  CHECK(run({"simulate", "--config", cfg_path, "--out", out.string()}) == kExitOk);
  CHECK(fs::exists(out / "trajectory.csv"));
  CHECK(fs::exists(out / "diagnostics.csv"));
  CHECK(fs::exists(out / "manifest.json"));

  SUBCASE("manifest lists every output with a checksum; reruns reproduce them") {
    const fs::path out2 = fs::temp_directory_path() / "flocksim_cli_sim_out2";
    fs::remove_all(out2);
    CHECK(run({"simulate", "--config", cfg_path, "--out", out2.string()}) == kExitOk);
    auto load = [](const fs::path& p) {
      std::ifstream is(p / "manifest.json");
      return nlohmann::json::parse(is);
    };
    const auto m1 = load(out), m2 = load(out2);
    REQUIRE(m1["outputs"].size() == 2);
    for (std::size_t k = 0; k < m1["outputs"].size(); ++k) {
      CHECK(m1["outputs"][k]["fnv1a64"] == m2["outputs"][k]["fnv1a64"]);
      CHECK(m1["outputs"][k]["bytes"] == m2["outputs"][k]["bytes"]);
    }
    CHECK(m1["config_hash"] == m2["config_hash"]);
    fs::remove_all(out2);
  }
  SUBCASE("binary trajectory format") {
    const fs::path out3 = fs::temp_directory_path() / "flocksim_cli_sim_out3";
    fs::remove_all(out3);
    CHECK(run({"simulate", "--config", cfg_path, "--out", out3.string(), "--format", "binary"}) ==
          kExitOk);
    CHECK(fs::exists(out3 / "trajectory.bin"));
    std::ifstream is(out3 / "trajectory.bin", std::ios::binary);
    char magic[8];
    is.read(magic, 8);
    CHECK(std::string(magic, 8) == "FLKTRAJ1");
    fs::remove_all(out3);
  }
  fs::remove_all(out);
}

TEST_CASE("exit codes") {
  const fs::path out = fs::temp_directory_path() / "flocksim_cli_exit_out";
  fs::remove_all(out);

  SUBCASE("missing kernel section: exit 2") {
    const std::string p = write_temp_config("flocksim_cli_nok.ini", "[sim]\nn = 4\ndim = 2\nt_final=0.1\ndt=0.01\n");
    CHECK(run({"simulate", "--config", p, "--out", out.string()}) == kExitConfigError);
    CHECK(run({"validate", "--config", p}) == kExitConfigError);
  }
  SUBCASE("unreadable config: exit 2") {
    CHECK(run({"validate", "--config", "/nonexistent/x.ini"}) == kExitConfigError);
  }
  SUBCASE("engineered blow-up: exit 3") {
    std::string text = replace_once(
        kMinimalConfig, "forcing.kind = zero",
        "forcing.kind = power_law\nforcing.amplitude = 1e6\nforcing.exponent = 3");
    text = replace_once(text, "t_final = 0.1", "t_final = 100");
    text = replace_once(text, "dt = 0.01", "dt = 10");
    const std::string p = write_temp_config("flocksim_cli_stiff.ini", text);
    CHECK(run({"simulate", "--config", p, "--out", out.string()}) == kExitBlowup);
  }
  SUBCASE("study with a single-point sweep: exit 2") {
    std::string text(kMinimalConfig);
    text += "\n[study]\nkind = meanfield\nn_list = 8\nseeds = 1\n";
    const std::string p = write_temp_config("flocksim_cli_mf1.ini", text);
    CHECK(run({"study", "meanfield", "--config", p, "--out", out.string()}) == kExitConfigError);
  }
  SUBCASE("flock study with noise on: exit 2") {
    std::string text(kMinimalConfig);
    text += "\n[study]\nkind = flock\nseeds = 1\n";
    const std::string p = write_temp_config("flocksim_cli_flock_noise.ini", text);
    CHECK(run({"study", "flock", "--config", p, "--out", out.string()}) == kExitConfigError);
  }
  SUBCASE("study kind mismatch: exit 2") {
    std::string text(kMinimalConfig);
    text += "\n[study]\nkind = flock\nseeds = 1\n";
    const std::string p = write_temp_config("flocksim_cli_kindmm.ini", text);
    CHECK(run({"study", "meanfield", "--config", p, "--out", out.string()}) == kExitConfigError);
  }
  SUBCASE("validate failures: exit 1") {
    const std::string bad_phi = replace_once(kMinimalConfig, "phi.r1 = 0.5", "phi.r1 = 2.5");
    const std::string p1 = write_temp_config("flocksim_cli_badphi.ini", bad_phi);
    CHECK(run({"validate", "--config", p1}) == kExitVerdictFail);

    const std::string bad_f = replace_once(
        kMinimalConfig, "forcing.kind = zero",
        "forcing.kind = power_law\nforcing.amplitude = 1\nforcing.exponent = 2");
    const std::string p2 = write_temp_config("flocksim_cli_badf.ini", bad_f);
    CHECK(run({"validate", "--config", p2}) == kExitVerdictFail);
  }
  SUBCASE("failing study verdict: exit 1 with reports still written") {
    // dt far too coarse for the 10% rate window
    std::string text = replace_once(kMinimalConfig,
                                    "psi.kind = rational\npsi.lambda = 1.0\npsi.gamma = 1.0",
                                    "psi.kind = constant\npsi.c = 1.0");
    text = replace_once(text, "psi_tilde.c = 0.5", "psi_tilde.c = 0.0");
    text = replace_once(text, "t_final = 0.1", "t_final = 1.0");
    text = replace_once(text, "dt = 0.01", "dt = 0.25");
    text += "\n[study]\nkind = flock\nseeds = 1\n";
    const std::string p = write_temp_config("flocksim_cli_flockfail.ini", text);
    CHECK(run({"study", "flock", "--config", p, "--out", out.string()}) == kExitVerdictFail);
    CHECK(fs::exists(out / "flock_verdicts.json"));
    CHECK(fs::exists(out / "manifest.json"));
  }
  fs::remove_all(out);
}

TEST_CASE("seed override changes the run") {
  const std::string cfg_path = write_temp_config("flocksim_cli_seed.ini", kMinimalConfig);
  const fs::path o1 = fs::temp_directory_path() / "flocksim_seed_a";
  const fs::path o2 = fs::temp_directory_path() / "flocksim_seed_b";
  fs::remove_all(o1);
  fs::remove_all(o2);
  CHECK(run({"simulate", "--config", cfg_path, "--out", o1.string(), "--seeds", "99,100"}) == kExitOk);
  CHECK(run({"simulate", "--config", cfg_path, "--out", o2.string(), "--seeds", "99,100"}) == kExitOk);
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  };
  CHECK(slurp(o1 / "trajectory.csv") == slurp(o2 / "trajectory.csv"));
  const fs::path o3 = fs::temp_directory_path() / "flocksim_seed_c";
  fs::remove_all(o3);
  CHECK(run({"simulate", "--config", cfg_path, "--out", o3.string(), "--seeds", "7"}) == kExitOk);
  CHECK(slurp(o1 / "trajectory.csv") != slurp(o3 / "trajectory.csv"));
  fs::remove_all(o1);
  fs::remove_all(o2);
  fs::remove_all(o3);
}

}  // TEST_SUITE
