#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flocksim/integrator.hpp"
#include "flocksim/measures.hpp"

namespace flocksim {

// ---------------------------------------------------------------------------
// Reproducible desk-scale studies. Each study is a pure function of its
// StudySpec: re-running produces byte-identical tables and verdicts.
//
// Coupling discipline: whenever two runs are compared, they share the noise
// path and the (nested) initial sample stream; both seeds are recorded in the
// report.
// ---------------------------------------------------------------------------

/// Scheme-consistency ladder: both time-stepping forms on a shared refined
/// noise path across `count` halvings of the base dt.
struct DtHalvings {
  int count = 5;
};

/// Mean-field Cauchy sweep over a doubling chain of particle counts.
struct NDoubling {
  std::vector<int> n_list;
};

/// Truncation-radius sweep with fixed N, dt, seeds: moment and averaging-norm
/// uniformity across R.
struct RSweep {
  std::vector<double> r_values;  // truncation radii
  GridSpec grid;                 // fixed geometry across the sweep
  double bandwidth = 0.25;       // fixed KDE bandwidth across the sweep
  VelocityWeight weight = BumpWeight{BumpKernel{1.0, 2.0, 1.0}};
  double eta = 1.0 / 6.0;
};

/// Mollifier-radius sweep (phi_r) toward the local-alignment limit.
struct PhiRSweep {
  std::vector<double> r_values;  // decreasing mollifier scales
  int n_projections = 64;
  int knn_k = 0;  // 0 = round(sqrt(N))
};

/// Noise-free variance-decay study (no sweep parameter).
struct FlockStudy {};

using SweepSpec = std::variant<DtHalvings, NDoubling, RSweep, PhiRSweep, FlockStudy>;

struct StudySpec {
  SimConfig base;
  SweepSpec sweep;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir;  // empty = no artifacts written
};

struct Verdict {
  std::string criterion;  // e.g. "C1.slope"
  std::string description;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct StudyReport {
  std::string kind;
  std::vector<std::uint64_t> noise_seeds;
  std::vector<std::uint64_t> init_seeds;
  std::vector<Table> tables;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;

  bool all_pass() const;
  std::string summary() const;
  /// One CSV per table plus a verdict summary JSON-line file; returns the
  /// paths written.
  std::vector<std::string> write(const std::string& dir) const;
};

StudyReport study_strat_ito(const StudySpec& spec);
StudyReport study_meanfield(const StudySpec& spec);
StudyReport study_r_uniformity(const StudySpec& spec);
StudyReport study_sla_limit(const StudySpec& spec);
StudyReport study_flocking(const StudySpec& spec);

/// Dispatch on the sweep alternative.
StudyReport run_study(const StudySpec& spec);

/// Init-stream seed used for replicate `seed` (shared across all runs of one
/// replicate so couplings stay nested).
std::uint64_t replicate_init_seed(std::uint64_t seed);

}  // namespace flocksim
