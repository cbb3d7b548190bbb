#include "flocksim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace flocksim {

double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double eval_pair_kernel_r2(const PairKernel& k, double r_sq) {
  if (const auto* rk = std::get_if<RationalKernel>(&k)) {
    if (rk->gamma == 1.0) return rk->lambda / (1.0 + r_sq);
    return rk->lambda / std::pow(1.0 + r_sq, rk->gamma);
  }
  return std::get<ConstantKernel>(k).c;
}

bool pair_kernel_is_zero(const PairKernel& k) {
  if (const auto* ck = std::get_if<ConstantKernel>(&k)) return ck->c == 0.0;
  if (const auto* rk = std::get_if<RationalKernel>(&k)) return rk->lambda == 0.0;
  return false;
}

double eval_psi(const KernelSpec& spec, std::span<const double> x) {
  return eval_pair_kernel_r2(spec.psi, norm_sq(x));
}

double eval_psi_tilde(const KernelSpec& spec, std::span<const double> x) {
  return eval_pair_kernel_r2(spec.psi_tilde, norm_sq(x));
}

double eval_bump_radius(const BumpKernel& b, double radius) {
  if (radius >= b.r2) return 0.0;
  if (radius <= b.r1) return b.amplitude;
  return b.amplitude * (1.0 - smoothstep((radius - b.r1) / (b.r2 - b.r1)));
}

double eval_phi(const KernelSpec& spec, std::span<const double> x) {
  return eval_bump_radius(spec.phi, norm(x));
}

double chi_radius(const Truncation& tr, double radius) {
  if (radius <= tr.R) return 1.0;
  const double outer = tr.outer_radius();
  if (radius >= outer) return 0.0;
  return 1.0 - smoothstep((radius - tr.R) / (outer - tr.R));
}

double chi(const Truncation& tr, std::span<const double> x) {
  return chi_radius(tr, norm(x));
}

double theta_factor(const Truncation& tr, double radius) {
  return chi_radius(tr, radius);  // same radial taper
}

void theta(const Truncation& tr, std::span<const double> v, std::span<double> out) {
  const double r = norm(v);
  const double g = theta_factor(tr, r);
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = g * v[k];
}

void eval_forcing(const KernelSpec& spec, std::span<const double> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (std::holds_alternative<ZeroForcing>(spec.forcing)) return;
  if (const auto* cf = std::get_if<ConstantForcing>(&spec.forcing)) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = cf->value[k];
    return;
  }
  if (const auto* sl = std::get_if<SmoothLinearForcing>(&spec.forcing)) {
    const double scale = sl->amplitude / std::sqrt(1.0 + norm_sq(x) / sq(sl->decay));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = scale * x[k];
    return;
  }
  const auto& pl = std::get<PowerLawForcing>(spec.forcing);
  const double r = norm(x);
  const double scale = (r == 0.0) ? 0.0 : pl.amplitude * std::pow(r, pl.exponent - 1.0);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = scale * x[k];
}

KernelSpec rescale_phi(const KernelSpec& spec, double r) {
  if (!(r > 0.0)) throw InvalidInput("rescale_phi: scale r must be positive");
  KernelSpec out = spec;
  out.phi.r1 = spec.phi.r1 * r;
  out.phi.r2 = spec.phi.r2 * r;
  out.phi.amplitude = spec.phi.amplitude * std::pow(r, -static_cast<double>(spec.dim));
  return out;
}

bool ValidationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "  [ok]   " : "  [FAIL] ") << c.name << "  (constant=" << c.constant << ")";
    if (!c.message.empty()) os << "  " << c.message;
    os << "\n";
  }
  return os.str();
}

namespace {

constexpr int kRadialSamples = 1000;

// Directional derivative of order `order` along axis `axis`, central stencil.
double fd_derivative(const PairKernel& k, int axis, int order, std::span<const double> x0,
                     double h) {
  std::vector<double> x(x0.begin(), x0.end());
  auto f = [&](double offset) {
    x[static_cast<std::size_t>(axis)] = x0[static_cast<std::size_t>(axis)] + offset;
    return eval_pair_kernel_r2(k, norm_sq(x));
  };
  switch (order) {
    case 1: return (f(h) - f(-h)) / (2 * h);
    case 2: return (f(h) - 2 * f(0) + f(-h)) / (h * h);
    case 3: return (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h * h * h);
    default: return (f(2 * h) - 4 * f(h) + 6 * f(0) - 4 * f(-h) + f(-2 * h)) / (h * h * h * h);
  }
}

void check_pair_kernel(std::vector<CheckResult>& out, const KernelSpec& spec,
                       const PairKernel& k, const std::string& label) {
  const int d = spec.dim;
  const double L = 20.0 * std::max(1.0, spec.phi.r2);

  // Bounds and sign, sampled radially along each axis (plus the origin).
  double sup = std::abs(eval_pair_kernel_r2(k, 0.0));
  bool nonneg = eval_pair_kernel_r2(k, 0.0) >= 0.0;
  for (int axis = 0; axis < d; ++axis) {
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < kRadialSamples; ++i) {
      x[static_cast<std::size_t>(axis)] = -L + 2.0 * L * i / (kRadialSamples - 1);
      const double v = eval_pair_kernel_r2(k, norm_sq(x));
      sup = std::max(sup, std::abs(v));
      if (v < 0.0) nonneg = false;
    }
  }
  out.push_back({label + ": nonnegative and bounded", nonneg && std::isfinite(sup), sup,
                 nonneg ? "" : "negative values sampled"});

  // Derivative bounds, orders 1..4. Central differences lose all digits at
  // order >= 3 with a 1e-4 step in double precision, so a wider step is used
  // there; this is a boundedness diagnostic, not a proof.
  double dsup = 0.0;
  bool finite = true;
  std::vector<double> x0(static_cast<std::size_t>(d), 0.0);
  for (int order = 1; order <= 4; ++order) {
    const double h = order <= 2 ? 1e-4 : 1e-2;
    for (int axis = 0; axis < d; ++axis) {
      for (int i = 0; i < 64; ++i) {
        x0.assign(static_cast<std::size_t>(d), 0.0);
        x0[static_cast<std::size_t>(axis)] = -L + 2.0 * L * i / 63.0;
        const double v = fd_derivative(k, axis, order, x0, h);
        if (!std::isfinite(v)) finite = false;
        dsup = std::max(dsup, std::abs(v));
      }
    }
  }
  out.push_back({label + ": derivative bounds (orders 1-4)", finite && dsup < 1e6, dsup, ""});
}

}  // namespace

ValidationReport validate_assumptions(const KernelSpec& spec) {
  ValidationReport rep;
  if (spec.dim < 1) {
    rep.checks.push_back({"dim: positive spatial dimension", false, static_cast<double>(spec.dim),
                          "dim must be >= 1"});
    return rep;
  }

  check_pair_kernel(rep.checks, spec, spec.psi, "psi");
  check_pair_kernel(rep.checks, spec, spec.psi_tilde, "psi_tilde");

  // phi: 0 < r1 < r2, positive on the inner ball, zero outside the support.
  const auto& b = spec.phi;
  const bool ordered = b.r1 > 0.0 && b.r2 > b.r1 && b.amplitude > 0.0;
  rep.checks.push_back({"phi: support radii (requires 0 < r1 < r2, amplitude > 0)", ordered,
                        ordered ? b.r2 : -1.0,
                        ordered ? "" : "bump parameters violate the support assumption on phi"});
  if (ordered) {
    double inner_min = b.amplitude;
    double outer_max = 0.0;
    for (int i = 0; i < kRadialSamples; ++i) {
      const double ri = b.r1 * i / (kRadialSamples - 1);
      inner_min = std::min(inner_min, eval_bump_radius(b, ri));
      const double ro = b.r2 * (1.0 + 2.0 * i / (kRadialSamples - 1.0));
      outer_max = std::max(outer_max, std::abs(eval_bump_radius(b, ro)));
    }
    rep.checks.push_back({"phi: positive on the inner ball", inner_min > 0.0, inner_min, ""});
    rep.checks.push_back({"phi: vanishes outside the support radius", outer_max == 0.0, outer_max, ""});
  }

  // F sublinearity: sampled ratio |F(x)| / (1 + |x|) along each axis, out to a
  // large radius. The ratio must stay bounded; a growing tail fails the check.
  {
    const int d = spec.dim;
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    std::vector<double> f(static_cast<std::size_t>(d), 0.0);
    double c_sup = 0.0;
    double ratio_mid = 0.0, ratio_end = 0.0;
    const double L = 1e3;
    for (int axis = 0; axis < d; ++axis) {
      for (int i = 1; i <= kRadialSamples; ++i) {
        x.assign(static_cast<std::size_t>(d), 0.0);
        const double r = L * i / kRadialSamples;
        x[static_cast<std::size_t>(axis)] = r;
        eval_forcing(spec, x, f);
        const double ratio = norm(f) / (1.0 + r);
        c_sup = std::max(c_sup, ratio);
        if (i == kRadialSamples / 2) ratio_mid = std::max(ratio_mid, ratio);
        if (i == kRadialSamples) ratio_end = std::max(ratio_end, ratio);
      }
    }
    const bool growing_tail = ratio_end > ratio_mid * 1.05 + 1e-12;
    rep.checks.push_back({"forcing: sublinear growth |F(x)| <= C(1+|x|)",
                          !growing_tail && std::isfinite(c_sup), c_sup,
                          growing_tail ? "sampled ratio |F|/(1+|x|) grows with |x|" : ""});
  }

  if (const auto* cf = std::get_if<ConstantForcing>(&spec.forcing)) {
    const bool ok = static_cast<int>(cf->value.size()) == spec.dim;
    if (!ok)
      rep.checks.push_back({"forcing: constant vector length matches dim", false,
                            static_cast<double>(cf->value.size()), ""});
  }

  return rep;
}

}  // namespace flocksim
