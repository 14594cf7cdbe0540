#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "gapcomb/measure.hpp"
#include "gapcomb/meyer.hpp"
#include "oracles.hpp"

using namespace gapcomb;

namespace {

MeasureExpr sigma32_measure(const Rational& h = Rational(0), Complex s = {1.0, 0.0}) {
  return MeasureExpr::from_term(lattice_measure(fixtures::sigma32(), h, s));
}

bool atoms_equal(const std::vector<Atom>& a, const std::vector<Atom>& b, double tol = 0.0) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].position == b[i].position)) return false;
    if (std::abs(a[i].weight - b[i].weight) > tol) return false;
  }
  return true;
}

Rational random_rational(SplitMix64& rng, long max_num = 200, long max_den = 64) {
  const long num = static_cast<long>(rng.uniform_index(2 * max_num + 1)) - max_num;
  const long den = 1 + static_cast<long>(rng.uniform_index(max_den));
  return {num, den};
}

}  // namespace

TEST_CASE("atoms_in: single dirac") {
  const auto m = MeasureExpr::dirac(Rational(0), {1.0, 0.0});
  const auto atoms = atoms_in(m, Interval::open(Rational(-1), Rational(1)));
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].position == Rational(0));
  CHECK(atoms[0].weight == Complex{1.0, 0.0});
}

TEST_CASE("atoms_in: M=2 all-ones lattice on [0,1]") {
  std::vector<Complex> c(4, Complex{1.0, 0.0});
  const auto m = MeasureExpr::from_term(
      PeriodicLatticeMeasure(2, make_coeffs(c), Rational(0), Complex{1.0, 0.0}));
  const auto atoms = atoms_in(m, Interval::closed(Rational(0), Rational(1)));
  REQUIRE(atoms.size() == 3);
  CHECK(atoms[0].position == Rational(0));
  CHECK(atoms[1].position == Rational(1, 2));
  CHECK(atoms[2].position == Rational(1));
}

TEST_CASE("atoms_in: constructed sigma_4 vanishes on the forbidden window") {
  const auto mc = build_meyer(WindowSpec(4, Rational(1, 8)), MeyerMethod::nullspace, 1, 1e-9);
  const auto m = MeasureExpr::from_term(lattice_measure(mc, Rational(0), Complex{1.0, 0.0}));
  CHECK(atoms_in(m, Interval::closed(Rational(-1, 2), Rational(1, 2))).empty());
}

TEST_CASE("shift: identity, dirac, covariance against independent routes") {
  const auto m = sigma32_measure();
  CHECK(atoms_equal(atoms_in(shift(m, Rational(0)), Interval::closed(Rational(0), Rational(2))),
                    atoms_in(m, Interval::closed(Rational(0), Rational(2)))));
  const auto d = shift(MeasureExpr::dirac(Rational(0), {1.0, 0.0}), Rational(3, 2));
  const auto atoms = atoms_in(d, Interval::closed(Rational(1), Rational(2)));
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].position == Rational(3, 2));

  // shifted query equals query of the shifted window, translated back
  const Rational h(5, 64);
  const Interval w = Interval::closed(Rational(32), Rational(33));
  const auto lhs = atoms_in(shift(m, h), w);
  auto rhs = atoms_in(m, Interval::closed(w.lo - h, w.hi - h));
  for (auto& a : rhs) a.position += h;
  CHECK(atoms_equal(lhs, rhs));
}

TEST_CASE("scale: identity, zero, variation scaling") {
  const auto m = sigma32_measure();
  CHECK(atoms_equal(atoms_in(scale(m, {1.0, 0.0}), Interval::closed(Rational(4), Rational(6))),
                    atoms_in(m, Interval::closed(Rational(4), Rational(6)))));
  CHECK(scale(MeasureExpr::dirac(Rational(0), {1.0, 0.0}), {0.0, 0.0}).trivially_zero());

  const auto diff = subtract(MeasureExpr::dirac(Rational(1), {1.0, 0.0}),
                             MeasureExpr::dirac(Rational(2), {1.0, 0.0}));
  const double s = std::exp2(16.0 / 3.0);
  CHECK(variation(scale(diff, {s, 0.0}), Interval::open(Rational(0), Rational(3))) ==
        Catch::Approx(2.0 * s).epsilon(1e-15));
}

TEST_CASE("subtract: cancellation and shifted-difference structure") {
  const auto m = sigma32_measure();
  CHECK(atoms_in(subtract(m, m), Interval::closed(Rational(-40), Rational(40))).empty());

  const Rational tau = Rational::pow2(-8);
  const auto two = subtract(MeasureExpr::dirac(Rational(1) + tau, {1.0, 0.0}),
                            MeasureExpr::dirac(Rational(1), {1.0, 0.0}));
  const auto atoms = atoms_in(two, Interval::closed(Rational(0), Rational(2)));
  REQUIRE(atoms.size() == 2);
  CHECK(atoms[0].weight == Complex{-1.0, 0.0});
  CHECK(atoms[1].weight == Complex{1.0, 0.0});

  // one full period of sigma^{h+tau} - sigma^h carries 2 * nnz atoms
  const Rational h(5, 64);
  const auto diff = subtract(sigma32_measure(h + tau), sigma32_measure(h));
  const auto period_atoms = atoms_in(diff, Interval::half_open(h, h + Rational(32)));
  const std::size_t nnz = fixtures::sigma32().c.size() -
                          static_cast<std::size_t>(
                              std::count(fixtures::sigma32().c.begin(),
                                         fixtures::sigma32().c.end(), Complex{0.0, 0.0}));
  CHECK(period_atoms.size() == 2 * nnz);
}

TEST_CASE("restrict_to agrees with atoms_in") {
  const auto m = sigma32_measure();
  const Interval w = Interval::open(Rational(10), Rational(12));
  CHECK(atoms_equal(restrict_to(m, w), atoms_in(m, w)));
}

TEST_CASE("variation: examples and the periodicity oracle") {
  const auto diff = subtract(MeasureExpr::dirac(Rational(1), {1.0, 0.0}),
                             MeasureExpr::dirac(Rational(2), {1.0, 0.0}));
  CHECK(variation(diff, Interval::open(Rational(0), Rational(3))) == 2.0);
  CHECK(variation(MeasureExpr{}, Interval::closed(Rational(-5), Rational(5))) == 0.0);

  const auto m = sigma32_measure();
  const double v1 = variation(m, Interval::half_open(Rational(0), Rational(32)));
  const double v2 = variation(m, Interval::half_open(Rational(0), Rational(64)));
  CHECK(v2 == 2.0 * v1);  // whole periods, closed form is exact
  // closed form vs brute force over a full period: identical summation order
  CHECK(v1 == oracles::variation_brute(m, Interval::half_open(Rational(0), Rational(32))));
}

TEST_CASE("variation falls back to merged enumeration when lattices collide") {
  const auto m = sigma32_measure();
  CHECK(variation(subtract(m, m), Interval::closed(Rational(-50), Rational(50))) == 0.0);
}

TEST_CASE("pair: dirac against a Gaussian, exact cancellation") {
  const Gaussian g(1.0);
  const auto d = MeasureExpr::dirac(Rational(0), {1.0, 0.0});
  const auto pr = pair(d, g, Rational(1));
  CHECK(std::abs(pr.value - Complex{1.0, 0.0}) < 1e-15);
  const auto z = subtract(MeasureExpr::dirac(Rational(1), {1.0, 0.0}),
                          MeasureExpr::dirac(Rational(1), {1.0, 0.0}));
  CHECK(pair(z, g, Rational(8)).value == Complex{0.0, 0.0});
}

TEST_CASE("pair refuses functions without a decay certificate") {
  struct Bare : SmoothFunction {
    Complex eval(double, int) const override { return {1.0, 0.0}; }
  } bare;
  const auto d = MeasureExpr::dirac(Rational(0), {1.0, 0.0});
  CHECK_THROWS_AS(pair(d, bare, Rational(1)), NoDecayCertificate);
}

TEST_CASE("property: disjoint-window exactness and additivity (seeded)") {
  SplitMix64 rng(42);
  const auto m = sigma32_measure(Rational(5, 64));
  for (int trial = 0; trial < 100; ++trial) {
    Rational a = random_rational(rng, 70, 32);
    Rational b = a + Rational(1 + static_cast<long>(rng.uniform_index(40)),
                              1 + static_cast<long>(rng.uniform_index(8)));
    Rational c = b + Rational(1 + static_cast<long>(rng.uniform_index(40)),
                              1 + static_cast<long>(rng.uniform_index(8)));
    const Interval w1 = Interval::half_open(a, b);
    const Interval w2 = Interval::half_open(b, c);
    const Interval wu = Interval::half_open(a, c);
    const auto a1 = atoms_in(m, w1);
    const auto a2 = atoms_in(m, w2);
    auto au = a1;
    au.insert(au.end(), a2.begin(), a2.end());
    CHECK(atoms_equal(atoms_in(m, wu), au));
    const double v = variation(m, w1) + variation(m, w2);
    const double vu = variation(m, wu);
    CHECK(std::abs(v - vu) <= 1e-12 * std::max(1.0, vu));
  }
}

TEST_CASE("property: shift covariance for 100 random shifts and windows") {
  SplitMix64 rng(4242);
  const auto m = sigma32_measure();
  for (int trial = 0; trial < 100; ++trial) {
    const Rational h = random_rational(rng);
    const Rational a = random_rational(rng, 80, 16);
    const Interval w = Interval::closed(a, a + Rational(1 + (long)rng.uniform_index(30),
                                                        1 + (long)rng.uniform_index(4)));
    const auto lhs = atoms_in(shift(m, h), w);
    auto rhs = atoms_in(m, Interval::closed(w.lo - h, w.hi - h));
    for (auto& at : rhs) at.position += h;
    CHECK(atoms_equal(lhs, rhs));
  }
}

TEST_CASE("property: closed-form variation matches brute force on 1..5 periods") {
  SplitMix64 rng(7);
  const auto m = sigma32_measure(Rational(-3, 32));
  for (int periods = 1; periods <= 5; ++periods) {
    const Rational a = random_rational(rng, 40, 8);
    const Interval w = Interval::half_open(a, a + Rational(32 * periods) + random_rational(rng, 10, 4));
    const double cf = variation(m, w);
    const double bf = oracles::variation_brute(m, w);
    CHECK(std::abs(cf - bf) <= 1e-12 * std::max(1.0, bf));
  }
}

TEST_CASE("property: scale linearity of variation") {
  SplitMix64 rng(99);
  const auto m = sigma32_measure();
  const Interval w = Interval::closed(Rational(3), Rational(77));
  const double base = variation(m, w);
  for (int trial = 0; trial < 20; ++trial) {
    const Complex s = rng.complex_normal();
    const double v = variation(scale(m, s), w);
    CHECK(std::abs(v - std::abs(s) * base) <= 1e-12 * std::max(1.0, std::abs(s) * base));
  }
}

TEST_CASE("ramped measures keep unit-modulus period factors") {
  // theta = 1/2 alternates signs period over period
  std::vector<Complex> c(4, Complex{0.0, 0.0});
  c[1] = {1.0, 0.0};
  const PeriodicLatticeMeasure t(2, make_coeffs(c), Rational(0), Complex{1.0, 0.0}, Rational(1, 2));
  const auto m = MeasureExpr::from_term(t);
  const auto atoms = atoms_in(m, Interval::closed(Rational(0), Rational(5)));
  REQUIRE(atoms.size() == 3);  // k = 0, 1, 2 at positions 1/2, 5/2, 9/2
  CHECK(atoms[0].weight == Complex{1.0, 0.0});
  CHECK(atoms[1].weight == Complex{-1.0, 0.0});
  CHECK(atoms[2].weight == Complex{1.0, 0.0});
  CHECK(variation(m, Interval::closed(Rational(0), Rational(5))) == Catch::Approx(3.0));
}
