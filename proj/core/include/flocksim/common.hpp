#pragma once

#include <cstdint>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace flocksim {

/// Configuration / input errors (bad tags, inconsistent dimensions, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid runtime input to an operation (stale index, geometry mismatch, ...).
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

/// Compensated (Kahan) accumulator. Used for all pairwise interaction sums so
/// that the cell-list and brute-force evaluation routes stay bit-identical.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

inline double sq(double x) { return x * x; }

inline double norm_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(norm_sq(v)); }

// ---------------------------------------------------------------------------
// Deterministic counter-based randomness.
//
// Every random quantity in the project is a pure function of (seed, stream,
// index): no generator state is carried between draws. This is what makes
// nested initial samples, shared noise paths and bit-identical study reruns
// cheap to guarantee.
// ---------------------------------------------------------------------------

inline std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a + 0x9e3779b97f4a7c15ull * (b + 1));
}

/// Uniform in (0,1), exclusive of both endpoints.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h = mix64(hash_combine(hash_combine(seed, stream), index));
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two independent uniforms.
inline double normal01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = uniform01(seed, stream, 2 * index);
  const double u2 = uniform01(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// FNV-1a, used for config hashes, output checksums and index staleness checks.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), h);
}

/// Runs fn(begin, end) over fixed contiguous chunks of [0, n). Results must be
/// written to disjoint output rows; chunk boundaries depend only on (n,
/// threads), so any thread count produces identical output.
template <typename Fn>
void parallel_for_rows(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  const std::size_t chunk = (n + k - 1) / k;
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t lo = c * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace flocksim
