#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "flocksim/common.hpp"

namespace flocksim {

// ---------------------------------------------------------------------------
// Weight functions of the model and their truncations.
//
// Only tagged parametric families are supported, so that every run is fully
// described by a serializable config.
// ---------------------------------------------------------------------------

/// psi(x) = lambda / (1 + |x|^2)^gamma
struct RationalKernel {
  double lambda = 1.0;
  double gamma = 1.0;
};

struct ConstantKernel {
  double c = 0.0;
};

using PairKernel = std::variant<RationalKernel, ConstantKernel>;

/// Smooth radial bump: `amplitude` on [0, r1], quintic smoothstep decay on
/// [r1, r2], exactly zero beyond r2.
struct BumpKernel {
  double r1 = 1.0;
  double r2 = 2.0;
  double amplitude = 1.0;
};

struct ZeroForcing {};

struct ConstantForcing {
  std::vector<double> value;  // length = dim
};

/// F(x) = amplitude * x / sqrt(1 + |x|^2 / decay^2): linear near the origin,
/// saturating at |F| = amplitude * decay.
struct SmoothLinearForcing {
  double amplitude = 1.0;
  double decay = 1.0;
};

/// F(x) = amplitude * |x|^(exponent-1) * x. exponent = 1 is a plain linear
/// map; exponent > 1 grows superlinearly and fails the sublinearity check
/// (negative control for the validator).
struct PowerLawForcing {
  double amplitude = 1.0;
  double exponent = 2.0;
};

using ForcingSpec = std::variant<ZeroForcing, ConstantForcing, SmoothLinearForcing, PowerLawForcing>;

struct KernelSpec {
  PairKernel psi;        // long-range alignment weight
  PairKernel psi_tilde;  // noise-coupling weight
  BumpKernel phi;        // short-range (local averaging) weight
  ForcingSpec forcing;
  int dim = 2;
};

/// Radial truncation pair: chi (scalar cutoff) and theta (vector clamp), both
/// identity inside radius R and tapering to zero over [R, R*(1+width)].
struct Truncation {
  double R = 1.0;
  double smoothing_width = 0.5;  // band width as a fraction of R

  double outer_radius() const { return R * (1.0 + smoothing_width); }
};

/// C^2 quintic smoothstep: 0 for u<=0, 6u^5-15u^4+10u^3 on [0,1], 1 for u>=1.
double smoothstep(double u);

double eval_psi(const KernelSpec& spec, std::span<const double> x);
double eval_psi_tilde(const KernelSpec& spec, std::span<const double> x);
double eval_phi(const KernelSpec& spec, std::span<const double> x);

// Radial profiles (used by the coefficient loops, which only have |x|^2).
double eval_pair_kernel_r2(const PairKernel& k, double r_sq);
double eval_bump_radius(const BumpKernel& b, double radius);

double chi(const Truncation& tr, std::span<const double> x);
double chi_radius(const Truncation& tr, double radius);

/// theta(v) written into out (same length as v). |theta(v)| <= min(|v|, B(R))
/// with hard cap B(R) = R*(1+width); theta(v) = v exactly for |v| <= R.
void theta(const Truncation& tr, std::span<const double> v, std::span<double> out);

/// Scalar taper factor g(|v|) with theta(v) = g(|v|) * v.
double theta_factor(const Truncation& tr, double radius);

void eval_forcing(const KernelSpec& spec, std::span<const double> x, std::span<double> out);

bool pair_kernel_is_zero(const PairKernel& k);

/// phi_r(x) = r^-d phi_1(x/r): support radii scale by r, amplitude by r^-d,
/// mass is preserved.
KernelSpec rescale_phi(const KernelSpec& spec, double r);

// ---------------------------------------------------------------------------
// Assumption validation
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  double constant = 0.0;  // the relevant sup / reported constant
  std::string message;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  std::string summary() const;
};

/// Samples psi, psi_tilde, phi, F on a deterministic grid and reports sup
/// bounds, finite-difference derivative bounds, bump support behavior and the
/// sublinearity constant of F. Never throws; failures are returned as items.
ValidationReport validate_assumptions(const KernelSpec& spec);

}  // namespace flocksim
