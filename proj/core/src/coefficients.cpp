#include "flocksim/coefficients.hpp"

#include <algorithm>
#include <cmath>

namespace flocksim {

namespace {

// Accumulates chi*w(|dx|) * theta(v_other - v_self) over the given particles.
// Shared by the Cucker-Smale term (w = psi) and the diffusion pair term
// (w = psi_tilde).
void pair_sum_row(const ParticleEnsemble& ens, const PairKernel& kernel, const Truncation& tr,
                  std::span<const double> xi, std::span<const double> vi,
                  std::span<double> out) {
  const int d = ens.dim;
  const double outer_sq = sq(tr.outer_radius());
  std::vector<Kahan> acc(static_cast<std::size_t>(d));
  std::vector<double> dv(static_cast<std::size_t>(d));
  for (int j = 0; j < ens.n; ++j) {
    const auto xj = ens.position(j);
    double r_sq = 0.0;
    for (int k = 0; k < d; ++k) r_sq += sq(xi[static_cast<std::size_t>(k)] - xj[static_cast<std::size_t>(k)]);
    if (r_sq >= outer_sq) continue;  // chi == 0 exactly
    const double w = chi_radius(tr, std::sqrt(r_sq)) * eval_pair_kernel_r2(kernel, r_sq);
    if (w == 0.0) continue;
    const auto vj = ens.velocity(j);
    double dv_sq = 0.0;
    for (int k = 0; k < d; ++k) {
      dv[static_cast<std::size_t>(k)] = vj[static_cast<std::size_t>(k)] - vi[static_cast<std::size_t>(k)];
      dv_sq += sq(dv[static_cast<std::size_t>(k)]);
    }
    const double g = theta_factor(tr, std::sqrt(dv_sq));
    if (g == 0.0) continue;
    for (int k = 0; k < d; ++k) acc[static_cast<std::size_t>(k)].add(w * g * dv[static_cast<std::size_t>(k)]);
  }
  const double inv_n = 1.0 / ens.n;
  for (int k = 0; k < d; ++k) out[static_cast<std::size_t>(k)] = acc[static_cast<std::size_t>(k)].value() * inv_n;
}

// u_R numerator/denominator sums at x over the listed candidates (ascending).
// Zero phi-weights are skipped, which keeps the indexed and brute-force
// routes bit-identical: they accumulate exactly the same terms in the same
// order.
void u_sums(const ParticleEnsemble& ens, const KernelSpec& spec, const Truncation& tr,
            std::span<const double> x, const int* cand, int n_cand, bool contiguous,
            std::span<double> num, double& den) {
  const int d = ens.dim;
  const double r2_sq = sq(spec.phi.r2);
  std::vector<Kahan> num_acc(static_cast<std::size_t>(d));
  Kahan den_acc;
  std::vector<double> th(static_cast<std::size_t>(d));
  for (int c = 0; c < n_cand; ++c) {
    const int j = contiguous ? c : cand[c];
    const auto xj = ens.position(j);
    double r_sq = 0.0;
    for (int k = 0; k < d; ++k) r_sq += sq(x[static_cast<std::size_t>(k)] - xj[static_cast<std::size_t>(k)]);
    if (r_sq >= r2_sq) continue;
    const double w = eval_bump_radius(spec.phi, std::sqrt(r_sq));
    if (w == 0.0) continue;
    theta(tr, ens.velocity(j), th);
    for (int k = 0; k < d; ++k) num_acc[static_cast<std::size_t>(k)].add(w * th[static_cast<std::size_t>(k)]);
    den_acc.add(w);
  }
  const double inv_n = 1.0 / ens.n;
  for (int k = 0; k < d; ++k) num[static_cast<std::size_t>(k)] = num_acc[static_cast<std::size_t>(k)].value() * inv_n;
  den = den_acc.value() * inv_n;
}

void u_row(const ParticleEnsemble& ens, const KernelSpec& spec, const Truncation& tr,
           std::span<const double> x, const CellIndex* index, std::vector<int>& scratch,
           std::span<double> out) {
  const int d = ens.dim;
  std::vector<double> num(static_cast<std::size_t>(d));
  double den = 0.0;
  if (index != nullptr && !index->degenerate()) {
    bool cached = false;
    const std::span<const int> hood = index->cached_neighborhood(x, cached);
    if (cached) {
      u_sums(ens, spec, tr, x, hood.data(), static_cast<int>(hood.size()), false, num, den);
    } else {
      index->gather(x, scratch);
      u_sums(ens, spec, tr, x, scratch.data(), static_cast<int>(scratch.size()), false, num, den);
    }
  } else {
    u_sums(ens, spec, tr, x, nullptr, ens.n, true, num, den);
  }
  const double inv_r = 1.0 / tr.R;
  for (int k = 0; k < d; ++k) out[static_cast<std::size_t>(k)] = num[static_cast<std::size_t>(k)] / (inv_r + den);
}

void k_row(const ParticleEnsemble& ens, const KernelSpec& spec, const Truncation& tr, int i,
           std::span<double> out) {
  const int d = ens.dim;
  const auto xi = ens.position(i);
  if (!pair_kernel_is_zero(spec.psi_tilde)) {
    pair_sum_row(ens, spec.psi_tilde, tr, xi, ens.velocity(i), out);
  } else {
    std::fill(out.begin(), out.end(), 0.0);
  }
  if (!std::holds_alternative<ZeroForcing>(spec.forcing)) {
    std::vector<double> f(static_cast<std::size_t>(d));
    eval_forcing(spec, xi, f);
    const double cx = chi(tr, xi);
    for (int k = 0; k < d; ++k) out[static_cast<std::size_t>(k)] += cx * f[static_cast<std::size_t>(k)];
  }
}

// s[i] given k at all particles.
void s_row(const ParticleEnsemble& ens, const KernelSpec& spec, int i,
           const std::vector<double>& k_all, std::span<double> out) {
  const int d = ens.dim;
  if (pair_kernel_is_zero(spec.psi_tilde)) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const auto xi = ens.position(i);
  const double* ki = k_all.data() + static_cast<std::size_t>(i) * d;
  std::vector<Kahan> acc(static_cast<std::size_t>(d));
  for (int j = 0; j < ens.n; ++j) {
    const auto xj = ens.position(j);
    double r_sq = 0.0;
    for (int k = 0; k < d; ++k) r_sq += sq(xi[static_cast<std::size_t>(k)] - xj[static_cast<std::size_t>(k)]);
    const double w = eval_pair_kernel_r2(spec.psi_tilde, r_sq);  // no chi here
    if (w == 0.0) continue;
    const double* kj = k_all.data() + static_cast<std::size_t>(j) * d;
    for (int k = 0; k < d; ++k) acc[static_cast<std::size_t>(k)].add(w * (kj[k] - ki[k]));
  }
  const double half_inv_n = 0.5 / ens.n;
  for (int k = 0; k < d; ++k) out[static_cast<std::size_t>(k)] = acc[static_cast<std::size_t>(k)].value() * half_inv_n;
}

std::vector<double> k_all_particles(const ParticleEnsemble& ens, const KernelSpec& spec,
                                    const Truncation& tr) {
  std::vector<double> k_all(static_cast<std::size_t>(ens.n) * ens.dim);
  for (int j = 0; j < ens.n; ++j)
    k_row(ens, spec, tr, j, {k_all.data() + static_cast<std::size_t>(j) * ens.dim,
                             static_cast<std::size_t>(ens.dim)});
  return k_all;
}

}  // namespace

CellIndex::CellIndex(const ParticleEnsemble& ens, double cell_size)
    : cell_(cell_size), dim_(ens.dim), origin_(static_cast<std::size_t>(ens.dim), 0.0),
      checksum_(ens.position_checksum()) {
  if (!(cell_size > 0.0)) throw InvalidInput("CellIndex: cell size must be positive");
  if (ens.n == 0) return;
  std::vector<double> hi(static_cast<std::size_t>(dim_), 0.0);
  for (int k = 0; k < dim_; ++k) {
    origin_[static_cast<std::size_t>(k)] = ens.position(0)[static_cast<std::size_t>(k)];
    hi[static_cast<std::size_t>(k)] = origin_[static_cast<std::size_t>(k)];
  }
  for (int i = 1; i < ens.n; ++i) {
    const auto x = ens.position(i);
    for (int k = 0; k < dim_; ++k) {
      origin_[static_cast<std::size_t>(k)] = std::min(origin_[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(k)]);
      hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(k)]);
    }
  }
  degenerate_ = true;
  for (int k = 0; k < dim_; ++k)
    if (hi[static_cast<std::size_t>(k)] - origin_[static_cast<std::size_t>(k)] > 3.0 * cell_) degenerate_ = false;
  for (int i = 0; i < ens.n; ++i) buckets_[key_of(ens.position(i))].push_back(i);
  if (degenerate_) return;

  // Precompute sorted neighborhoods of the occupied cells; every query at a
  // particle position becomes a lookup.
  std::vector<std::int64_t> base(static_cast<std::size_t>(dim_));
  for (const auto& [key, members] : buckets_) {
    const int anchor = members.front();
    const auto x = ens.position(anchor);
    for (int k = 0; k < dim_; ++k)
      base[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(
          std::floor((x[static_cast<std::size_t>(k)] - origin_[static_cast<std::size_t>(k)]) / cell_));
    gather_cells(base, neighborhoods_[key]);
  }
}

void CellIndex::gather_cells(const std::vector<std::int64_t>& base, std::vector<int>& out) const {
  out.clear();
  std::vector<double> probe(static_cast<std::size_t>(dim_));
  int total = 1;
  for (int k = 0; k < dim_; ++k) total *= 3;
  for (int c = 0; c < total; ++c) {
    int rem = c;
    for (int k = 0; k < dim_; ++k) {
      const int off = rem % 3 - 1;
      rem /= 3;
      probe[static_cast<std::size_t>(k)] =
          origin_[static_cast<std::size_t>(k)] + (static_cast<double>(base[static_cast<std::size_t>(k)] + off) + 0.5) * cell_;
    }
    const auto it = buckets_.find(key_of(probe));
    if (it != buckets_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

std::span<const int> CellIndex::cached_neighborhood(std::span<const double> x, bool& found) const {
  const auto it = neighborhoods_.find(key_of(x));
  if (it == neighborhoods_.end()) {
    found = false;
    return {};
  }
  found = true;
  return it->second;
}

std::uint64_t CellIndex::key_of(std::span<const double> x) const {
  // Exact packed key for d <= 3 (21 bits per axis); hashed key otherwise.
  // Hash collisions merely enlarge the candidate set; gather() deduplicates.
  if (dim_ <= 3) {
    std::uint64_t key = 0;
    for (int k = 0; k < dim_; ++k) {
      const auto c = static_cast<std::int64_t>(
          std::floor((x[static_cast<std::size_t>(k)] - origin_[static_cast<std::size_t>(k)]) / cell_));
      key = (key << 21) | (static_cast<std::uint64_t>(c + (1 << 19)) & 0x1fffffull);
    }
    return key;
  }
  std::uint64_t h = 0;
  for (int k = 0; k < dim_; ++k) {
    const auto c = static_cast<std::int64_t>(
        std::floor((x[static_cast<std::size_t>(k)] - origin_[static_cast<std::size_t>(k)]) / cell_));
    h = hash_combine(h, static_cast<std::uint64_t>(c + (1ll << 31)));
  }
  return h;
}

void CellIndex::gather(std::span<const double> x, std::vector<int>& out) const {
  std::vector<std::int64_t> base(static_cast<std::size_t>(dim_));
  for (int k = 0; k < dim_; ++k)
    base[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(
        std::floor((x[static_cast<std::size_t>(k)] - origin_[static_cast<std::size_t>(k)]) / cell_));
  gather_cells(base, out);
}

std::vector<double> eval_l_cs(const ParticleEnsemble& ens, const KernelSpec& spec,
                              const Truncation& tr, int i) {
  std::vector<double> out(static_cast<std::size_t>(ens.dim), 0.0);
  if (!pair_kernel_is_zero(spec.psi))
    pair_sum_row(ens, spec.psi, tr, ens.position(i), ens.velocity(i), out);
  return out;
}

std::vector<double> eval_u_r(const ParticleEnsemble& ens, const KernelSpec& spec,
                             const Truncation& tr, std::span<const double> x,
                             const CellIndex* index) {
  if (index != nullptr && index->source_checksum() != ens.position_checksum())
    throw InvalidInput("eval_u_r: cell index is stale (position checksum mismatch)");
  std::vector<double> out(static_cast<std::size_t>(ens.dim), 0.0);
  std::vector<int> scratch;
  u_row(ens, spec, tr, x, index, scratch, out);
  return out;
}

std::vector<double> eval_l_mt(const ParticleEnsemble& ens, const KernelSpec& spec,
                              const Truncation& tr, int i) {
  std::vector<double> out = eval_u_r(ens, spec, tr, ens.position(i));
  const auto vi = ens.velocity(i);
  for (int k = 0; k < ens.dim; ++k) out[static_cast<std::size_t>(k)] -= vi[static_cast<std::size_t>(k)];
  return out;
}

std::vector<double> eval_k_r(const ParticleEnsemble& ens, const KernelSpec& spec,
                             const Truncation& tr, int i) {
  std::vector<double> out(static_cast<std::size_t>(ens.dim), 0.0);
  k_row(ens, spec, tr, i, out);
  return out;
}

std::vector<double> eval_s_r(const ParticleEnsemble& ens, const KernelSpec& spec,
                             const Truncation& tr, int i) {
  std::vector<double> out(static_cast<std::size_t>(ens.dim), 0.0);
  if (pair_kernel_is_zero(spec.psi_tilde)) return out;
  const std::vector<double> k_all = k_all_particles(ens, spec, tr);
  s_row(ens, spec, i, k_all, out);
  return out;
}

CoefficientBundle eval_bundle(const ParticleEnsemble& ens, const KernelSpec& spec,
                              const Truncation& tr, const CellIndex* index, int threads) {
  if (index != nullptr && index->source_checksum() != ens.position_checksum())
    throw InvalidInput("eval_bundle: cell index is stale (position checksum mismatch)");
  const int d = ens.dim;
  const std::size_t total = static_cast<std::size_t>(ens.n) * static_cast<std::size_t>(d);
  CoefficientBundle b;
  b.n = ens.n;
  b.dim = d;
  b.l_cs.assign(total, 0.0);
  b.u.assign(total, 0.0);
  b.l_mt.assign(total, 0.0);
  b.k.assign(total, 0.0);
  b.s.assign(total, 0.0);
  b.drift.assign(total, 0.0);

  const bool psi_zero = pair_kernel_is_zero(spec.psi);
  const bool psit_zero = pair_kernel_is_zero(spec.psi_tilde);

  parallel_for_rows(static_cast<std::size_t>(ens.n), threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<int> scratch;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = static_cast<std::size_t>(i) * d;
      auto span_of = [&](std::vector<double>& v) {
        return std::span<double>{v.data() + row, static_cast<std::size_t>(d)};
      };
      const int ii = static_cast<int>(i);
      if (!psi_zero)
        pair_sum_row(ens, spec.psi, tr, ens.position(ii), ens.velocity(ii), span_of(b.l_cs));
      u_row(ens, spec, tr, ens.position(ii), index, scratch, span_of(b.u));
      const auto vi = ens.velocity(ii);
      for (int k = 0; k < d; ++k)
        b.l_mt[row + static_cast<std::size_t>(k)] = b.u[row + static_cast<std::size_t>(k)] - vi[static_cast<std::size_t>(k)];
      k_row(ens, spec, tr, ii, span_of(b.k));
    }
  });

  parallel_for_rows(static_cast<std::size_t>(ens.n), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = i * static_cast<std::size_t>(d);
      if (!psit_zero)
        s_row(ens, spec, static_cast<int>(i), b.k,
              {b.s.data() + row, static_cast<std::size_t>(d)});
      for (int k = 0; k < d; ++k) {
        const auto idx = row + static_cast<std::size_t>(k);
        b.drift[idx] = b.l_cs[idx] + b.l_mt[idx] + b.s[idx];
      }
    }
  });

  return b;
}

}  // namespace flocksim
