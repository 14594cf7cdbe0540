#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "gapcomb/numeric.hpp"

namespace gapcomb {
namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::vector<Complex> twiddles_half(std::size_t n) {
  std::vector<Complex> w(n / 2);
  const double step = -6.283185307179586477 / static_cast<double>(n);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = step * static_cast<double>(k);
    w[k] = {std::cos(a), std::sin(a)};
  }
  return w;
}

// Iterative radix-2 Cooley-Tukey, forward sign e^{-2 pi i jk/n}.
inline void fft_pow2(std::vector<Complex>& a) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const std::vector<Complex> w = twiddles_half(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex t = a[i + k + len / 2] * w[k * stride];
        a[i + k + len / 2] = a[i + k] - t;
        a[i + k] += t;
      }
    }
  }
}

inline std::size_t smallest_prime_factor(std::size_t n) {
  if (n % 2 == 0) return 2;
  for (std::size_t p = 3; p * p <= n; p += 2)
    if (n % p == 0) return p;
  return n;
}

// Direct O(n^2) transform; the fallback for prime lengths.
inline std::vector<Complex> dft_direct(const std::vector<Complex>& a) {
  const std::size_t n = a.size();
  std::vector<Complex> out(n);
  const double step = -6.283185307179586477 / static_cast<double>(n);
  for (std::size_t m = 0; m < n; ++m) {
    Complex acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = step * static_cast<double>((m * j) % n);
      acc += a[j] * Complex{std::cos(ang), std::sin(ang)};
    }
    out[m] = acc;
  }
  return out;
}

// Recursive mixed-radix Cooley-Tukey for composite non-power-of-two lengths.
inline std::vector<Complex> fft_mixed(const std::vector<Complex>& a) {
  const std::size_t n = a.size();
  if (n <= 1) return a;
  if (is_pow2(n)) {
    std::vector<Complex> c = a;
    fft_pow2(c);
    return c;
  }
  const std::size_t p = smallest_prime_factor(n);
  if (p == n) return dft_direct(a);
  const std::size_t m = n / p;
  // decimate in time: sub-sequence s has entries a[s], a[s+p], ...
  std::vector<std::vector<Complex>> sub(p);
  for (std::size_t s = 0; s < p; ++s) {
    sub[s].resize(m);
    for (std::size_t j = 0; j < m; ++j) sub[s][j] = a[s + j * p];
    sub[s] = fft_mixed(sub[s]);
  }
  std::vector<Complex> out(n);
  const double step = -6.283185307179586477 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0;
    for (std::size_t s = 0; s < p; ++s) {
      const double ang = step * static_cast<double>((k * s) % n);
      acc += sub[s][k % m] * Complex{std::cos(ang), std::sin(ang)};
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace detail

// Unnormalized forward DFT: out[m] = sum_j a[j] e^{-2 pi i jm/L}.
// O(L log L) for powers of two and highly composite L, O(L^2) for primes.
inline std::vector<Complex> dft(std::vector<Complex> a) {
  if (detail::is_pow2(a.size()) || a.size() <= 1) {
    detail::fft_pow2(a);
    return a;
  }
  return detail::fft_mixed(a);
}

// Inverse of dft(): out[j] = (1/L) sum_m a[m] e^{+2 pi i jm/L}.
inline std::vector<Complex> idft(std::vector<Complex> a) {
  const std::size_t n = a.size();
  for (auto& z : a) z = std::conj(z);
  a = dft(std::move(a));
  const double inv = n ? 1.0 / static_cast<double>(n) : 1.0;
  for (auto& z : a) z = std::conj(z) * inv;
  return a;
}

}  // namespace gapcomb
