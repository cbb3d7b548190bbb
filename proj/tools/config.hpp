#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flocksim/experiments.hpp"
#include "flocksim/integrator.hpp"

namespace flocksim::cli {

/// Parsed structured-text config: `[section]` headers over `key = value`
/// lines, `#`/`;` comments. Keys may carry dots (tagged-union fields, e.g.
/// `psi.kind`). Values are scalars, names, or comma-separated lists.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text, const std::string& origin = "<string>");

  /// Environment overrides: FLOCKSIM_<SECTION>_<KEY>, uppercase, with `.`
  /// spelled as a double underscore (FLOCKSIM_SIM_INIT__POS_STD).
  void apply_env_overrides();

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key) const;
  long long get_int_or(const std::string& section, const std::string& key, long long fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  std::vector<std::uint64_t> get_seeds(const std::string& section, const std::string& key) const;

  /// Canonical sorted "section.key=value" dump; hashing it makes the config
  /// hash stable under key reordering.
  std::string canonical() const;
  std::uint64_t hash() const;

  /// Throws if the section holds keys nobody consumed (typo guard); call
  /// after the relevant builders ran.
  void check_consumed(const std::string& section) const;

 private:
  const std::string& lookup(const std::string& section, const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> sections_;
  mutable std::map<std::string, std::map<std::string, bool>> consumed_;
};

KernelSpec kernel_from_config(const Config& cfg);
Truncation truncation_from_config(const Config& cfg);
SimConfig sim_from_config(const Config& cfg);

/// Builds the study specification ([study] section; `kind` selects the sweep).
StudySpec study_from_config(const Config& cfg, const std::string& out_dir);

}  // namespace flocksim::cli
