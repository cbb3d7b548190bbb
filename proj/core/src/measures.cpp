#include "flocksim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

namespace flocksim {

double moment(const ParticleEnsemble& ens, double p, MomentPart part) {
  if (ens.n == 0) return 0.0;
  Kahan acc;
  for (int i = 0; i < ens.n; ++i) {
    double r_sq = 0.0;
    if (part != MomentPart::Velocity) r_sq += norm_sq(ens.position(i));
    if (part != MomentPart::Position) r_sq += norm_sq(ens.velocity(i));
    acc.add(p == 2.0 ? r_sq : std::pow(r_sq, 0.5 * p));
  }
  return acc.value() / ens.n;
}

// ---------------------------------------------------------------------------
// Exact assignment (shortest augmenting paths with potentials, O(n^3)).
// ---------------------------------------------------------------------------

double solve_assignment(const std::vector<double>& cost, int n, std::vector<int>* row_to_col) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);    // row matched to column j (1-based)
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  std::vector<double> minv(static_cast<std::size_t>(n) + 1);
  std::vector<char> used(static_cast<std::size_t>(n) + 1);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  if (row_to_col != nullptr) {
    row_to_col->assign(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
      if (p[static_cast<std::size_t>(j)] > 0) (*row_to_col)[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j)
    total += cost[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1) * n + (j - 1)];
  return total;
}

namespace {

double state_dist_sq(const ParticleEnsemble& a, int i, const ParticleEnsemble& b, int j) {
  double s = 0.0;
  const auto xa = a.position(i), xb = b.position(j);
  const auto va = a.velocity(i), vb = b.velocity(j);
  for (int k = 0; k < a.dim; ++k) {
    s += sq(xa[static_cast<std::size_t>(k)] - xb[static_cast<std::size_t>(k)]);
    s += sq(va[static_cast<std::size_t>(k)] - vb[static_cast<std::size_t>(k)]);
  }
  return s;
}

}  // namespace

ParticleEnsemble replicate_atoms(const ParticleEnsemble& ens, int m) {
  if (m < 1) throw InvalidInput("replicate_atoms: multiplicity must be >= 1");
  ParticleEnsemble out(ens.n * m, ens.dim);
  for (int i = 0; i < ens.n; ++i) {
    for (int c = 0; c < m; ++c) {
      const int t = i * m + c;
      std::copy(ens.position(i).begin(), ens.position(i).end(), out.position(t).begin());
      std::copy(ens.velocity(i).begin(), ens.velocity(i).end(), out.velocity(t).begin());
    }
  }
  return out;
}

TransportResult wasserstein_exact(const ParticleEnsemble& a, const ParticleEnsemble& b, double p,
                                  int cap) {
  if (a.dim != b.dim) throw InvalidInput("wasserstein_exact: dimension mismatch");
  if (a.n != b.n)
    throw InvalidInput("wasserstein_exact: unequal cloud sizes are unsupported (use the sliced distance)");
  if (a.n > cap)
    throw InvalidInput("wasserstein_exact: cloud size exceeds the exact-assignment cap of " +
                       std::to_string(cap));
  const int n = a.n;
  std::vector<double> cost(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d_sq = state_dist_sq(a, i, b, j);
      cost[static_cast<std::size_t>(i) * n + j] = p == 2.0 ? d_sq : std::pow(d_sq, 0.5 * p);
    }
  const double total = solve_assignment(cost, n);
  TransportResult r;
  r.p = p;
  r.method = ExactMethod{};
  r.distance = std::pow(std::max(total / n, 0.0), 1.0 / p);
  return r;
}

namespace {

constexpr std::uint64_t kSliceStreamTag = 0x536c696365ull;

// 1-d W_p^p between sorted samples with uniform weights 1/n and 1/m, by
// quantile matching. Breakpoint comparisons are done in exact integer
// arithmetic.
double w_p_p_sorted_1d(const std::vector<double>& a, const std::vector<double>& b, double p) {
  const auto n = static_cast<long long>(a.size());
  const auto m = static_cast<long long>(b.size());
  if (n == m) {
    Kahan acc;
    for (std::size_t k = 0; k < a.size(); ++k) acc.add(std::pow(std::abs(a[k] - b[k]), p));
    return acc.value() / static_cast<double>(n);
  }
  Kahan acc;
  long long i = 0, j = 0;
  double q = 0.0;  // current quantile level
  while (i < n && j < m) {
    const double qa = static_cast<double>(i + 1) / static_cast<double>(n);
    const double qb = static_cast<double>(j + 1) / static_cast<double>(m);
    const long long lhs = (i + 1) * m, rhs = (j + 1) * n;
    const double q_next = lhs <= rhs ? qa : qb;
    acc.add((q_next - q) * std::pow(std::abs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)]), p));
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
    q = q_next;
  }
  return acc.value();
}

}  // namespace

TransportResult wasserstein_sliced(const ParticleEnsemble& a, const ParticleEnsemble& b, double p,
                                   int n_projections, std::uint64_t seed) {
  if (a.dim != b.dim) throw InvalidInput("wasserstein_sliced: dimension mismatch");
  if (n_projections < 1) throw InvalidInput("wasserstein_sliced: need at least one projection");
  const int sd = 2 * a.dim;  // direction lives in state space (x, v)

  // Directions come in orthonormal groups (random bases): with the sd-scaling
  // below, each complete basis measures a rigid translation exactly at p = 2,
  // and the estimator stays a lower bound of the full distance.
  const int n_groups = (n_projections + sd - 1) / sd;
  const int n_eff = n_groups * sd;

  std::vector<double> basis(static_cast<std::size_t>(sd) * static_cast<std::size_t>(sd));
  std::vector<double> pa(static_cast<std::size_t>(a.n));
  std::vector<double> pb(static_cast<std::size_t>(b.n));
  Kahan total;
  for (int g = 0; g < n_groups; ++g) {
    // Gram-Schmidt over Gaussian draws.
    for (int row = 0; row < sd; ++row) {
      double* u = basis.data() + static_cast<std::size_t>(row) * sd;
      for (int k = 0; k < sd; ++k)
        u[k] = normal01(seed, hash_combine(kSliceStreamTag, static_cast<std::uint64_t>(g)),
                        static_cast<std::uint64_t>(row * sd + k));
      for (int prev = 0; prev < row; ++prev) {
        const double* q = basis.data() + static_cast<std::size_t>(prev) * sd;
        double dot = 0.0;
        for (int k = 0; k < sd; ++k) dot += u[k] * q[k];
        for (int k = 0; k < sd; ++k) u[k] -= dot * q[k];
      }
      double nrm_sq = 0.0;
      for (int k = 0; k < sd; ++k) nrm_sq += sq(u[k]);
      if (nrm_sq < 1e-24) {  // essentially impossible; fall back to an axis
        std::fill(u, u + sd, 0.0);
        u[row] = 1.0;
        nrm_sq = 1.0;
      }
      const double inv = 1.0 / std::sqrt(nrm_sq);
      for (int k = 0; k < sd; ++k) u[k] *= inv;
    }

    for (int row = 0; row < sd; ++row) {
      const double* dir = basis.data() + static_cast<std::size_t>(row) * sd;
      auto project = [&](const ParticleEnsemble& e, std::vector<double>& out) {
        for (int i = 0; i < e.n; ++i) {
          double s = 0.0;
          const auto x = e.position(i);
          const auto v = e.velocity(i);
          for (int k = 0; k < e.dim; ++k) {
            s += dir[k] * x[static_cast<std::size_t>(k)];
            s += dir[e.dim + k] * v[static_cast<std::size_t>(k)];
          }
          out[static_cast<std::size_t>(i)] = s;
        }
        std::sort(out.begin(), out.end());
      };
      project(a, pa);
      project(b, pb);
      total.add(w_p_p_sorted_1d(pa, pb, p));
    }
  }

  TransportResult r;
  r.p = p;
  r.method = SlicedMethod{n_eff, seed};
  const double mean_wp = std::max(total.value() / n_eff, 0.0);
  r.distance = std::pow(static_cast<double>(sd), 0.5) * std::pow(mean_wp, 1.0 / p);
  return r;
}

// ---------------------------------------------------------------------------
// Grid densities
// ---------------------------------------------------------------------------

double eval_velocity_weight(const VelocityWeight& w, std::span<const double> v) {
  if (const auto* c = std::get_if<ConstantWeight>(&w)) return c->c;
  if (const auto* bw = std::get_if<BumpWeight>(&w)) return eval_bump_radius(bw->bump, norm(v));
  const auto& tc = std::get<ThetaComponentWeight>(w);
  return theta_factor(tc.truncation, norm(v)) * v[static_cast<std::size_t>(tc.axis)];
}

std::size_t GridSpec::cell_count() const {
  std::size_t c = 1;
  for (int r : resolution) c *= static_cast<std::size_t>(r);
  return c;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < dim(); ++k) v *= extent[static_cast<std::size_t>(k)] / resolution[static_cast<std::size_t>(k)];
  return v;
}

void GridSpec::validate() const {
  if (origin.empty() || origin.size() != extent.size() || origin.size() != resolution.size())
    throw InvalidInput("GridSpec: origin/extent/resolution lengths disagree");
  for (int r : resolution)
    if (r < 1) throw InvalidInput("GridSpec: resolution must be >= 1 per axis");
  for (double e : extent)
    if (!(e > 0.0)) throw InvalidInput("GridSpec: extent must be positive per axis");
}

GridSpec cover_ensemble(const ParticleEnsemble& ens, int resolution, double pad) {
  if (ens.n == 0) throw InvalidInput("cover_ensemble: empty ensemble");
  const int d = ens.dim;
  GridSpec g;
  g.origin.assign(static_cast<std::size_t>(d), 0.0);
  g.extent.assign(static_cast<std::size_t>(d), 0.0);
  g.resolution.assign(static_cast<std::size_t>(d), resolution);
  g.padding = pad;
  for (int k = 0; k < d; ++k) {
    double lo = ens.position(0)[static_cast<std::size_t>(k)], hi = lo;
    for (int i = 1; i < ens.n; ++i) {
      lo = std::min(lo, ens.position(i)[static_cast<std::size_t>(k)]);
      hi = std::max(hi, ens.position(i)[static_cast<std::size_t>(k)]);
    }
    g.origin[static_cast<std::size_t>(k)] = lo - pad;
    g.extent[static_cast<std::size_t>(k)] = std::max(hi - lo + 2 * pad, 1e-12);
  }
  return g;
}

GridSpec cover_ensemble_for_fourier(const ParticleEnsemble& ens, int resolution,
                                    double bandwidth) {
  return cover_ensemble(ens, resolution, 4.0 * bandwidth);
}

double GridDensity::integral() const {
  Kahan acc;
  for (double v : values) acc.add(v);
  return acc.value() * grid.cell_volume();
}

double silverman_bandwidth(const ParticleEnsemble& ens) {
  const int d = ens.dim;
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < ens.n; ++i)
    for (int k = 0; k < d; ++k) mean[static_cast<std::size_t>(k)] += ens.position(i)[static_cast<std::size_t>(k)];
  for (auto& c : mean) c /= ens.n;
  double var = 0.0;
  for (int i = 0; i < ens.n; ++i)
    for (int k = 0; k < d; ++k) var += sq(ens.position(i)[static_cast<std::size_t>(k)] - mean[static_cast<std::size_t>(k)]);
  var /= std::max(1, ens.n * d - 1);
  const double sd = std::sqrt(std::max(var, 1e-24));
  return sd * std::pow(static_cast<double>(ens.n), -1.0 / (d + 4));
}

GridDensity rho_weights(const ParticleEnsemble& ens, const std::vector<double>& weights,
                        double bandwidth, const GridSpec& grid, std::string descriptor) {
  if (!(bandwidth > 0.0)) throw InvalidInput("rho_phi: bandwidth must be positive");
  grid.validate();
  if (grid.dim() != ens.dim) throw InvalidInput("rho_phi: grid dimension mismatch");
  if (static_cast<int>(weights.size()) != ens.n)
    throw InvalidInput("rho_phi: weight count mismatch");

  const int d = ens.dim;
  GridDensity out;
  out.grid = grid;
  out.bandwidth = bandwidth;
  out.weight_descriptor = std::move(descriptor);
  out.values.assign(grid.cell_count(), 0.0);

  std::vector<double> h(static_cast<std::size_t>(d));
  std::vector<std::size_t> stride(static_cast<std::size_t>(d), 1);
  for (int k = 0; k < d; ++k) h[static_cast<std::size_t>(k)] = grid.extent[static_cast<std::size_t>(k)] / grid.resolution[static_cast<std::size_t>(k)];
  for (int k = d - 2; k >= 0; --k)
    stride[static_cast<std::size_t>(k)] = stride[static_cast<std::size_t>(k) + 1] * static_cast<std::size_t>(grid.resolution[static_cast<std::size_t>(k) + 1]);

  const double cutoff = 4.0 * bandwidth;
  const double cutoff_sq = sq(cutoff);
  const double norm_c = std::pow(2.0 * M_PI * sq(bandwidth), -0.5 * d);
  const double inv_two_sq = 1.0 / (2.0 * sq(bandwidth));
  const double inv_n = 1.0 / ens.n;

  Kahan deposited;
  std::vector<int> lo(static_cast<std::size_t>(d)), hi_range(static_cast<std::size_t>(d)), it(static_cast<std::size_t>(d));
  for (int i = 0; i < ens.n; ++i) {
    const double w = weights[static_cast<std::size_t>(i)] * inv_n;
    deposited.add(w);
    if (w == 0.0) continue;
    const auto xi = ens.position(i);
    bool empty = false;
    for (int k = 0; k < d; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const double rel_lo = (xi[ks] - cutoff - grid.origin[ks]) / h[ks];
      const double rel_hi = (xi[ks] + cutoff - grid.origin[ks]) / h[ks];
      lo[ks] = std::max(0, static_cast<int>(std::floor(rel_lo)));
      hi_range[ks] = std::min(grid.resolution[ks] - 1, static_cast<int>(std::floor(rel_hi)));
      if (lo[ks] > hi_range[ks]) empty = true;
    }
    if (empty) continue;
    it = lo;
    while (true) {
      double r_sq = 0.0;
      std::size_t flat = 0;
      for (int k = 0; k < d; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double xc = grid.origin[ks] + (it[ks] + 0.5) * h[ks];
        r_sq += sq(xc - xi[ks]);
        flat += static_cast<std::size_t>(it[ks]) * stride[ks];
      }
      if (r_sq <= cutoff_sq) out.values[flat] += w * norm_c * std::exp(-r_sq * inv_two_sq);
      int axis = d - 1;
      while (axis >= 0) {
        if (++it[static_cast<std::size_t>(axis)] <= hi_range[static_cast<std::size_t>(axis)]) break;
        it[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
        --axis;
      }
      if (axis < 0) break;
    }
  }

  out.mass_leak = deposited.value() - out.integral();
  return out;
}

GridDensity rho_phi(const ParticleEnsemble& ens, const VelocityWeight& weight, double bandwidth,
                    const GridSpec& grid) {
  std::vector<double> w(static_cast<std::size_t>(ens.n));
  for (int i = 0; i < ens.n; ++i) w[static_cast<std::size_t>(i)] = eval_velocity_weight(weight, ens.velocity(i));
  std::string desc = "constant";
  if (std::holds_alternative<BumpWeight>(weight)) desc = "bump";
  if (std::holds_alternative<ThetaComponentWeight>(weight)) desc = "theta_component";
  return rho_weights(ens, w, bandwidth, grid, std::move(desc));
}

void GridDensity::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw InvalidInput("GridDensity::write_csv: cannot open " + path);
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto join = [&](const auto& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k) s += " ";
      s += fmt(static_cast<double>(v[k]));
    }
    return s;
  };
  os << "# origin " << join(grid.origin) << "\n";
  os << "# extent " << join(grid.extent) << "\n";
  os << "# resolution " << join(grid.resolution) << "\n";
  os << "# padding " << fmt(grid.padding) << "\n";
  os << "# bandwidth " << fmt(bandwidth) << "\n";
  os << "# mass_leak " << fmt(mass_leak) << "\n";
  os << "# weight " << weight_descriptor << "\n";
  os << "cell_index,value\n";
  for (std::size_t c = 0; c < values.size(); ++c) os << c << "," << fmt(values[c]) << "\n";
}

// ---------------------------------------------------------------------------
// Fourier norms
// ---------------------------------------------------------------------------

void dft_1d(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  const double sign = inverse ? 1.0 : -1.0;
  if ((n & (n - 1)) == 0) {
    // radix-2 iterative FFT
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
      const std::complex<double> wl(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        std::complex<double> w(1.0, 0.0);
        for (std::size_t k = 0; k < len / 2; ++k) {
          const auto u = data[i + k];
          const auto v = data[i + k + len / 2] * w;
          data[i + k] = u + v;
          data[i + k + len / 2] = u - v;
          w *= wl;
        }
      }
    }
  } else {
    std::vector<std::complex<double>> out(n, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        const double ang = sign * 2.0 * M_PI * static_cast<double>(k) * static_cast<double>(j) / static_cast<double>(n);
        out[k] += data[j] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
    }
    data = std::move(out);
  }
  if (inverse)
    for (auto& c : data) c /= static_cast<double>(n);
}

namespace {

void dft_along_axis(std::vector<std::complex<double>>& data, const std::vector<int>& dims, int axis) {
  const int d = static_cast<int>(dims.size());
  std::size_t stride = 1;
  for (int k = axis + 1; k < d; ++k) stride *= static_cast<std::size_t>(dims[static_cast<std::size_t>(k)]);
  const auto len = static_cast<std::size_t>(dims[static_cast<std::size_t>(axis)]);
  const std::size_t total = data.size();
  const std::size_t block = stride * len;
  std::vector<std::complex<double>> line(len);
  for (std::size_t base = 0; base < total; base += block) {
    for (std::size_t off = 0; off < stride; ++off) {
      for (std::size_t k = 0; k < len; ++k) line[k] = data[base + off + k * stride];
      dft_1d(line, false);
      for (std::size_t k = 0; k < len; ++k) data[base + off + k * stride] = line[k];
    }
  }
}

}  // namespace

double sobolev_norm_time_series(const std::vector<GridDensity>& densities, double eta, double dt) {
  if (densities.empty()) return 0.0;
  if (eta < 0.0) throw InvalidInput("sobolev_norm_time_series: eta must be >= 0");
  if (!(dt > 0.0)) throw InvalidInput("sobolev_norm_time_series: dt must be positive");
  const GridSpec& g0 = densities.front().grid;
  for (const auto& D : densities) {
    if (D.grid.origin != g0.origin || D.grid.extent != g0.extent || D.grid.resolution != g0.resolution)
      throw InvalidInput("sobolev_norm_time_series: grid geometries differ across snapshots");
  }
  const int d = g0.dim();
  const std::size_t total = g0.cell_count();
  const double scale = g0.cell_volume() / static_cast<double>(total);

  // Precompute (1 + |xi|^2)^eta over folded wavenumbers.
  std::vector<double> weight(total);
  {
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (std::size_t c = 0; c < total; ++c) {
      double xi_sq = 0.0;
      for (int k = 0; k < d; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const int m = g0.resolution[ks];
        int f = idx[ks];
        if (f > m / 2) f -= m;
        xi_sq += sq(2.0 * M_PI * static_cast<double>(f) / g0.extent[ks]);
      }
      weight[c] = eta == 0.0 ? 1.0 : std::pow(1.0 + xi_sq, eta);
      for (int k = d - 1; k >= 0; --k) {
        const auto ks = static_cast<std::size_t>(k);
        if (++idx[ks] < g0.resolution[ks]) break;
        idx[ks] = 0;
      }
    }
  }

  Kahan norm_acc;
  std::vector<std::complex<double>> buf(total);
  for (const auto& D : densities) {
    for (std::size_t c = 0; c < total; ++c) buf[c] = {D.values[c], 0.0};
    for (int axis = 0; axis < d; ++axis) dft_along_axis(buf, g0.resolution, axis);
    Kahan snap;
    for (std::size_t c = 0; c < total; ++c) snap.add(weight[c] * std::norm(buf[c]));
    norm_acc.add(snap.value() * scale);
  }
  return norm_acc.value() * dt;
}

std::vector<double> local_velocity_knn(const ParticleEnsemble& ens, std::span<const double> x,
                                       int k) {
  if (ens.n == 0) throw InvalidInput("local_velocity_knn: empty ensemble");
  if (k < 1 || k > ens.n) throw InvalidInput("local_velocity_knn: k must be in [1, N]");
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(ens.n));
  for (int i = 0; i < ens.n; ++i) {
    double s = 0.0;
    const auto xi = ens.position(i);
    for (int c = 0; c < ens.dim; ++c) s += sq(xi[static_cast<std::size_t>(c)] - x[static_cast<std::size_t>(c)]);
    dist[static_cast<std::size_t>(i)] = {s, i};
  }
  std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
  std::sort(dist.begin(), dist.begin() + k,
            [](const auto& a, const auto& b) { return a.second < b.second; });
  std::vector<double> mean(static_cast<std::size_t>(ens.dim), 0.0);
  for (int c = 0; c < k; ++c) {
    const auto v = ens.velocity(dist[static_cast<std::size_t>(c)].second);
    for (int q = 0; q < ens.dim; ++q) mean[static_cast<std::size_t>(q)] += v[static_cast<std::size_t>(q)];
  }
  for (auto& m : mean) m /= k;
  return mean;
}

}  // namespace flocksim
