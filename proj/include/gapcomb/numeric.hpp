#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace gapcomb {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Pairwise (binary-tree) accumulation.  Used everywhere a float sum feeds a
// certificate, so that summation order is reproducible and error growth is
// O(log n) instead of O(n).

template <typename T, typename F>
T pairwise_sum(std::size_t lo, std::size_t hi, F&& term) {
  const std::size_t n = hi - lo;
  if (n == 0) return T{};
  if (n <= 16) {
    T acc = term(lo);
    for (std::size_t i = lo + 1; i < hi; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = lo + n / 2;
  return pairwise_sum<T>(lo, mid, term) + pairwise_sum<T>(mid, hi, term);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum<double>(0, v.size(), [&](std::size_t i) { return v[i]; });
}

inline Complex pairwise_sum(const std::vector<Complex>& v) {
  return pairwise_sum<Complex>(0, v.size(), [&](std::size_t i) { return v[i]; });
}

// ---------------------------------------------------------------------------
// Deterministic RNG.  std::normal_distribution is implementation-defined, so
// seeds would not reproduce across standard libraries; splitmix64 + Box-Muller
// keeps outputs a pure function of the seed.

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller (one value per call, no cached spare).
  double normal() {
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }
};

// ---------------------------------------------------------------------------
// Thread cap.  QF_THREADS limits worker threads for the few coarse-grained
// parallel loops; results are always merged in index order so output bytes do
// not depend on the cap.

inline unsigned thread_cap() {
  static const unsigned cap = [] {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("QF_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1) return std::min(hw, static_cast<unsigned>(v));
    }
    return hw;
  }();
  return cap;
}

// Runs fn(i) for i in [0, n).  Each index writes only its own output slot.
template <typename F>
void parallel_for_index(std::size_t n, F&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(thread_cap(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace gapcomb
