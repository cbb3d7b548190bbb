#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace flocksim::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_text(buf.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      cfg.sections_[section];  // section may be empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

void Config::apply_env_overrides() {
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind("FLOCKSIM_", 0) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(9, eq - 9);
    const std::string value = entry.substr(eq + 1);
    const std::size_t us = name.find('_');
    if (us == std::string::npos) continue;
    const std::string section = lower(name.substr(0, us));
    std::string key = lower(name.substr(us + 1));
    // '__' encodes '.', single '_' stays a literal underscore.
    std::string decoded;
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (key[i] == '_' && i + 1 < key.size() && key[i + 1] == '_') {
        decoded += '.';
        ++i;
      } else {
        decoded += key[i];
      }
    }
    sections_[section][decoded] = value;
  }
}

bool Config::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

const std::string& Config::lookup(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  if (it == sections_.end()) throw ConfigError(section + ": missing section");
  const auto kt = it->second.find(key);
  if (kt == it->second.end()) throw ConfigError(section + "." + key + ": missing key");
  consumed_[section][key] = true;
  return kt->second;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  return lookup(section, key);
}

std::string Config::get_string_or(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  return has(section, key) ? lookup(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string& v = lookup(section, key);
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + ": not a number: '" + v + "'");
  }
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long long Config::get_int(const std::string& section, const std::string& key) const {
  const std::string& v = lookup(section, key);
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + ": not an integer: '" + v + "'");
  }
}

long long Config::get_int_or(const std::string& section, const std::string& key,
                             long long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key) const {
  const std::string v = lookup(section, key);
  std::vector<double> out;
  std::istringstream is(v);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(section + "." + key + ": not a number list: '" + v + "'");
    }
  }
  if (out.empty()) throw ConfigError(section + "." + key + ": empty list");
  return out;
}

std::vector<std::uint64_t> Config::get_seeds(const std::string& section,
                                             const std::string& key) const {
  const auto xs = get_doubles(section, key);
  std::vector<std::uint64_t> out;
  for (double x : xs) out.push_back(static_cast<std::uint64_t>(x));
  return out;
}

std::string Config::canonical() const {
  std::ostringstream os;
  for (const auto& [section, kv] : sections_)
    for (const auto& [key, value] : kv) os << section << "." << key << "=" << value << "\n";
  return os.str();
}

std::uint64_t Config::hash() const { return fnv1a(canonical()); }

void Config::check_consumed(const std::string& section) const {
  const auto st = sections_.find(section);
  if (st == sections_.end()) return;
  const auto ct = consumed_.find(section);
  for (const auto& [key, value] : st->second) {
    const bool used = ct != consumed_.end() && ct->second.count(key) > 0 && ct->second.at(key);
    if (!used) throw ConfigError(section + "." + key + ": unknown key");
  }
}

// ---------------------------------------------------------------------------
// Domain builders
// ---------------------------------------------------------------------------

namespace {

PairKernel pair_kernel_from(const Config& cfg, const std::string& prefix) {
  const std::string kind = cfg.get_string("kernel", prefix + ".kind");
  if (kind == "rational") {
    RationalKernel k;
    k.lambda = cfg.get_double("kernel", prefix + ".lambda");
    k.gamma = cfg.get_double("kernel", prefix + ".gamma");
    if (!(k.lambda >= 0.0)) throw ConfigError("kernel." + prefix + ".lambda: must be >= 0");
    if (!(k.gamma > 0.0)) throw ConfigError("kernel." + prefix + ".gamma: must be > 0");
    return k;
  }
  if (kind == "constant") {
    ConstantKernel k;
    k.c = cfg.get_double("kernel", prefix + ".c");
    if (!(k.c >= 0.0)) throw ConfigError("kernel." + prefix + ".c: must be >= 0");
    return k;
  }
  throw ConfigError("kernel." + prefix + ".kind: unknown kind '" + kind +
                    "' (expected rational or constant)");
}

ForcingSpec forcing_from(const Config& cfg) {
  const std::string kind = cfg.get_string_or("kernel", "forcing.kind", "zero");
  if (kind == "zero") return ZeroForcing{};
  if (kind == "constant") return ConstantForcing{cfg.get_doubles("kernel", "forcing.value")};
  if (kind == "smooth_linear") {
    SmoothLinearForcing f;
    f.amplitude = cfg.get_double("kernel", "forcing.amplitude");
    f.decay = cfg.get_double("kernel", "forcing.decay");
    return f;
  }
  if (kind == "power_law") {
    PowerLawForcing f;
    f.amplitude = cfg.get_double("kernel", "forcing.amplitude");
    f.exponent = cfg.get_double("kernel", "forcing.exponent");
    return f;
  }
  throw ConfigError("kernel.forcing.kind: unknown kind '" + kind + "'");
}

InitSpec init_from(const Config& cfg, int dim) {
  const std::string kind = cfg.get_string_or("sim", "init.kind", "gaussian");
  if (kind == "gaussian") {
    GaussianInit g;
    if (cfg.has("sim", "init.pos_mean")) g.pos_mean = cfg.get_doubles("sim", "init.pos_mean");
    if (cfg.has("sim", "init.vel_mean")) g.vel_mean = cfg.get_doubles("sim", "init.vel_mean");
    g.pos_std = cfg.get_double_or("sim", "init.pos_std", 1.0);
    g.vel_std = cfg.get_double_or("sim", "init.vel_std", 1.0);
    return g;
  }
  if (kind == "uniform_box") {
    UniformBoxInit u;
    u.pos_lo = cfg.get_doubles("sim", "init.pos_lo");
    u.pos_hi = cfg.get_doubles("sim", "init.pos_hi");
    u.vel_lo = cfg.get_doubles("sim", "init.vel_lo");
    u.vel_hi = cfg.get_doubles("sim", "init.vel_hi");
    return u;
  }
  if (kind == "two_cluster") {
    TwoClusterInit t;
    t.separation = cfg.get_double_or("sim", "init.separation", 4.0);
    t.speed = cfg.get_double_or("sim", "init.speed", 1.0);
    t.pos_std = cfg.get_double_or("sim", "init.pos_std", 0.5);
    t.vel_std = cfg.get_double_or("sim", "init.vel_std", 0.1);
    return t;
  }
  (void)dim;
  throw ConfigError("sim.init.kind: unknown kind '" + kind + "'");
}

VelocityWeight weight_from(const Config& cfg) {
  const std::string kind = cfg.get_string_or("study", "weight.kind", "bump");
  if (kind == "constant") return ConstantWeight{cfg.get_double_or("study", "weight.c", 1.0)};
  if (kind == "bump") {
    BumpKernel b;
    b.r1 = cfg.get_double_or("study", "weight.r1", 1.0);
    b.r2 = cfg.get_double_or("study", "weight.r2", 2.0);
    b.amplitude = cfg.get_double_or("study", "weight.amplitude", 1.0);
    return BumpWeight{b};
  }
  if (kind == "theta_component") {
    ThetaComponentWeight t;
    t.truncation.R = cfg.get_double_or("study", "weight.r", 1.0);
    t.axis = static_cast<int>(cfg.get_int_or("study", "weight.axis", 0));
    return t;
  }
  throw ConfigError("study.weight.kind: unknown kind '" + kind + "'");
}

}  // namespace

KernelSpec kernel_from_config(const Config& cfg) {
  if (!cfg.has_section("kernel")) throw ConfigError("kernel: missing section");
  KernelSpec spec;
  spec.dim = static_cast<int>(cfg.get_int("kernel", "dim"));
  spec.psi = pair_kernel_from(cfg, "psi");
  spec.psi_tilde = pair_kernel_from(cfg, "psi_tilde");
  spec.phi.r1 = cfg.get_double("kernel", "phi.r1");
  spec.phi.r2 = cfg.get_double("kernel", "phi.r2");
  spec.phi.amplitude = cfg.get_double_or("kernel", "phi.amplitude", 1.0);
  spec.forcing = forcing_from(cfg);
  return spec;
}

Truncation truncation_from_config(const Config& cfg) {
  if (!cfg.has_section("truncation")) throw ConfigError("truncation: missing section");
  Truncation tr;
  tr.R = cfg.get_double("truncation", "r");
  tr.smoothing_width = cfg.get_double_or("truncation", "smoothing_width", 0.5);
  return tr;
}

SimConfig sim_from_config(const Config& cfg) {
  if (!cfg.has_section("sim")) throw ConfigError("sim: missing section");
  SimConfig sim;
  sim.kernel = kernel_from_config(cfg);
  sim.truncation = truncation_from_config(cfg);
  sim.n = static_cast<int>(cfg.get_int("sim", "n"));
  sim.dim = static_cast<int>(cfg.get_int("sim", "dim"));
  sim.t_final = cfg.get_double("sim", "t_final");
  sim.dt = cfg.get_double("sim", "dt");
  sim.scheme = scheme_from_string(cfg.get_string_or("sim", "scheme", "ito_em"));
  sim.noise_seed = static_cast<std::uint64_t>(cfg.get_int_or("sim", "noise_seed", 1));
  sim.init_seed = static_cast<std::uint64_t>(cfg.get_int_or("sim", "init_seed", 1));
  sim.record_every = static_cast<int>(cfg.get_int_or("sim", "record_every", 1));
  sim.init = init_from(cfg, sim.dim);
  sim.validate();
  return sim;
}

StudySpec study_from_config(const Config& cfg, const std::string& out_dir) {
  if (!cfg.has_section("study")) throw ConfigError("study: missing section");
  StudySpec spec;
  spec.base = sim_from_config(cfg);
  spec.out_dir = out_dir;
  spec.seeds = cfg.has("study", "seeds") ? cfg.get_seeds("study", "seeds")
                                         : std::vector<std::uint64_t>{spec.base.noise_seed};

  const std::string kind = cfg.get_string("study", "kind");
  if (kind == "strat-ito") {
    DtHalvings s;
    s.count = static_cast<int>(cfg.get_int_or("study", "dt_halvings", 5));
    spec.sweep = s;
  } else if (kind == "meanfield") {
    NDoubling s;
    for (double n : cfg.get_doubles("study", "n_list")) s.n_list.push_back(static_cast<int>(n));
    spec.sweep = s;
  } else if (kind == "sweep-R") {
    RSweep s;
    s.r_values = cfg.get_doubles("study", "r_values");
    s.grid.origin = cfg.get_doubles("study", "grid.origin");
    s.grid.extent = cfg.get_doubles("study", "grid.extent");
    for (double r : cfg.get_doubles("study", "grid.resolution"))
      s.grid.resolution.push_back(static_cast<int>(r));
    s.bandwidth = cfg.get_double_or("study", "bandwidth", 0.25);
    s.eta = cfg.get_double_or("study", "eta", 1.0 / 6.0);
    s.weight = weight_from(cfg);
    spec.sweep = s;
  } else if (kind == "sweep-r") {
    PhiRSweep s;
    s.r_values = cfg.get_doubles("study", "phi_r_values");
    s.n_projections = static_cast<int>(cfg.get_int_or("study", "n_projections", 64));
    s.knn_k = static_cast<int>(cfg.get_int_or("study", "knn_k", 0));
    spec.sweep = s;
  } else if (kind == "flock") {
    spec.sweep = FlockStudy{};
  } else {
    throw ConfigError("study.kind: unknown kind '" + kind +
                      "' (expected strat-ito, meanfield, sweep-R, sweep-r or flock)");
  }
  return spec;
}

}  // namespace flocksim::cli
