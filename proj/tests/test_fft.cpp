#include <catch2/catch_amalgamated.hpp>

#include "gapcomb/fft.hpp"
#include "gapcomb/numeric.hpp"
#include "oracles.hpp"

using gapcomb::Complex;
using gapcomb::dft;
using gapcomb::idft;

namespace {

std::vector<Complex> random_vec(std::size_t n, std::uint64_t seed) {
  gapcomb::SplitMix64 rng(seed);
  std::vector<Complex> v(n);
  for (auto& z : v) z = rng.complex_normal();
  return v;
}

double max_err(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("dft of trivial inputs") {
  CHECK(dft({Complex{1.0, 0.0}}) == std::vector<Complex>{Complex{1.0, 0.0}});
  std::vector<Complex> e0(8, Complex{0.0, 0.0});
  e0[0] = {1.0, 0.0};
  const auto out = dft(e0);
  for (const auto& z : out) CHECK(std::abs(z - Complex{1.0, 0.0}) < 1e-15);
}

TEST_CASE("power-of-two lengths match the direct definition") {
  for (std::size_t n : {2u, 8u, 64u, 1024u}) {
    const auto v = random_vec(n, 10 + n);
    CHECK(max_err(dft(v), oracles::dft_reference(v)) < 1e-9 * std::sqrt(double(n)));
  }
}

TEST_CASE("composite and prime lengths match the direct definition") {
  for (std::size_t n : {6u, 12u, 15u, 30u, 81u, 100u, 7u, 13u, 31u}) {
    const auto v = random_vec(n, 100 + n);
    CHECK(max_err(dft(v), oracles::dft_reference(v)) < 1e-10 * double(n));
  }
}

TEST_CASE("idft inverts dft") {
  for (std::size_t n : {16u, 24u, 1000u}) {
    const auto v = random_vec(n, 7 * n);
    CHECK(max_err(idft(dft(v)), v) < 1e-12);
  }
}

TEST_CASE("Parseval holds for 50 random vectors of length 1024") {
  for (int trial = 0; trial < 50; ++trial) {
    const auto v = random_vec(1024, 1000 + trial);
    const auto vh = dft(v);
    double lhs = 0, rhs = 0;
    for (const auto& z : v) lhs += std::norm(z);
    for (const auto& z : vh) rhs += std::norm(z);
    rhs /= 1024.0;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * lhs);
  }
}
