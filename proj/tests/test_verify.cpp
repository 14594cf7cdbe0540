#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "gapcomb/verify.hpp"

using namespace gapcomb;

TEST_CASE("hat convolution: exact cancellation at t = 0") {
  const auto& fm = fixtures::default_build();
  const PsiFunction psi = fm.psi();
  CHECK(hat_convolution_at(fm, psi, Rational(0)) == Complex{0.0, 0.0});
}

TEST_CASE("hat convolution: the level-1 factor has modulus exactly 2 at t_1") {
  const auto& fm = fixtures::default_build();
  const PsiFunction psi = fm.psi();
  const Rational t1 = Rational(1) / (Rational(2) * fm.levels[0].params.tau);
  CHECK(t1 == Rational(128));
  // tau_1 * t_1 = 1/2: the phase difference factor is e^{-pi i} - 1 = -2
  const Complex f = hat_convolution_at(fm, psi, t1);
  const double m13 = fm.levels[0].params.tau_pow_m13();
  CHECK(std::abs(f) >= 2.0 * m13 - 0.001);
  CHECK(std::abs(f) <= 2.0 * m13 + 0.001);
}

TEST_CASE("hat convolution: mismatched psi is rejected") {
  const auto& fm = fixtures::default_build();
  const PsiFunction wrong({{Rational(1, 256), Rational(40)}});
  CHECK_THROWS_AS(hat_convolution_at(fm, wrong, Rational(1)), MismatchedLevels);
}

TEST_CASE("two-path evaluation agrees to 1e-12 for 10 seeded probe times") {
  const auto& fm = fixtures::default_build();
  const PsiFunction psi = fm.psi();
  SplitMix64 rng(77);
  for (int i = 0; i < 10; ++i) {
    const Rational t = Rational::from_double(rng.uniform(0.0, 2000.0));
    const Complex a = hat_convolution_at(fm, psi, t);
    const Complex b = hat_convolution_enumerated(fm, psi, t);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("blow-up series: levels certify the triangle bound and the 2/3 threshold") {
  const auto& fm = fixtures::default_build();
  const auto rep = blowup_series(fm);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].t == Rational(128));
  CHECK(rep.rows[0].F_abs >= 4.2331);
  CHECK(rep.rows[0].F_abs >= rep.rows[0].lower_bound);
  CHECK(rep.rows[0].lower_bound >= rep.rows[0].threshold);
  CHECK(rep.rows[1].t == Rational::pow2(31));
  CHECK(rep.rows[1].F_abs >= 1083.0);
  CHECK(rep.rows[1].F_abs >= 4.0 * rep.rows[0].F_abs);
  for (const auto& r : rep.rows) CHECK(r.two_path_rel <= 1e-12);
}

TEST_CASE("blow-up series: single level has the exact empty-sum bound") {
  const auto& fm = fixtures::single_level_build();
  const auto rep = blowup_series(fm);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].lower_bound == 2.0 * fm.levels[0].params.tau_pow_m13());
}

TEST_CASE("shift-difference bound: base case and 20 seeded Gaussians") {
  const auto& mc = fixtures::sigma32();
  CHECK_NOTHROW(shift_difference_bound_check(mc, Gaussian(1.0), Rational(1, 256), Rational(0)));
  // tau -> 0: the bound shrinks linearly and still holds
  CHECK_NOTHROW(shift_difference_bound_check(mc, Gaussian(1.0), Rational::pow2(-20), Rational(0)));
  SplitMix64 rng(2024);
  for (int i = 0; i < 20; ++i) {
    const Gaussian phi(rng.uniform(0.25, 4.0), rng.uniform(-16.0, 16.0), rng.uniform(-2.0, 2.0));
    const Rational tau(1, 200 + static_cast<long>(rng.uniform_index(2000)));
    const Rational h(static_cast<long>(rng.uniform_index(21)) - 10, 2);
    CHECK_NOTHROW(shift_difference_bound_check(mc, phi, tau, h));
  }
}

TEST_CASE("shift-difference bound: hypothesis violations are rejected") {
  const auto& mc = fixtures::sigma32();
  CHECK_THROWS(shift_difference_bound_check(mc, Gaussian(1.0), Rational(2), Rational(0)));   // tau >= 1
  CHECK_THROWS(shift_difference_bound_check(mc, Gaussian(1.0), Rational(1, 4), Rational(20)));  // |h| >= M/3
}

TEST_CASE("temperedness certificate: default build, series trend, zero measure") {
  const auto& fm = fixtures::default_build();
  for (const auto& g : default_gaussian_suite()) {
    const auto rep = temperedness_certificate(fm, g);
    CHECK(rep.direct_upper <= rep.bound);
    REQUIRE(rep.series.size() == 2);
    // tau_1^{1/3} M_1^2 = 2^{-8/3} * 1024 ~ 161.27
    CHECK(rep.series[0].second == Catch::Approx(161.269).epsilon(1e-3));
    // terms increase 1 -> 2 at q = 8 and decrease afterwards
    CHECK(rep.series[1].second > rep.series[0].second);
    CHECK(rep.crossover_level == 2);
  }
  AssembledMeasure zero;
  const auto rep0 = temperedness_certificate(zero, Gaussian(1.0));
  CHECK(rep0.direct_upper == 0.0);
  CHECK(rep0.bound == 0.0);
}

TEST_CASE("variation growth: flagged rows, escalation, single atom") {
  const auto& fm = fixtures::default_build();
  // radius below every support: mass 0, exponent undefined
  auto rep = variation_growth(fm, {Rational(1)});
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].mass == 0.0);
  CHECK(!rep.rows[0].exponent.has_value());
  // default radii escalate by at least 1
  rep = variation_growth(fm, default_growth_radii(fm));
  REQUIRE(rep.level_exponents.size() == 2);
  CHECK(rep.escalation_pass);
  CHECK(rep.level_exponents[1] >= rep.level_exponents[0] + 1.0);
  // single-atom measure: M(r) = 1, exponent tends to 0
  AssembledMeasure single;
  single.mu = MeasureExpr::dirac(Rational(1), {1.0, 0.0});
  const auto srep = variation_growth(single, {Rational(2), Rational(1024)});
  CHECK(srep.rows[0].mass == 1.0);
  REQUIRE(srep.rows[1].exponent.has_value());
  CHECK(*srep.rows[1].exponent == 0.0);
  CHECK(!srep.escalation_pass);  // no levels to escalate over
}

TEST_CASE("poisson check: unit comb, sigma_32, and a forced failure") {
  std::vector<Complex> one{Complex{1.0, 0.0}};
  const auto comb = MeasureExpr::from_term(
      PeriodicLatticeMeasure(1, make_coeffs(one), Rational(0), Complex{1.0, 0.0}));
  const auto rec = poisson_check(comb, comb, Gaussian(2.0, 0.3), 1e-12);
  CHECK(rec.residual <= 1e-12 * (1.0 + std::abs(rec.rhs)));

  const auto& mc = fixtures::sigma32();
  const auto sigma = MeasureExpr::from_term(lattice_measure(mc, Rational(0), {1.0, 0.0}));
  const auto sigma_hat = MeasureExpr::from_term(fourier_side_measure(mc, Rational(0), {1.0, 0.0}));
  for (const auto& g : default_gaussian_suite())
    CHECK_NOTHROW(poisson_check(sigma, sigma_hat, g, 1e-8));

  // a mis-scaled transform fails where the pairings are O(1)
  const auto bad_hat = scale(comb, {2.0, 0.0});
  CHECK_THROWS_AS(poisson_check(comb, bad_hat, Gaussian(1.0), 1e-8), CertificateFailure);
}

TEST_CASE("pair at radius 1000 matches across the transform (self-dual Gaussian)") {
  const auto& mc = fixtures::sigma32();
  const auto sigma = MeasureExpr::from_term(lattice_measure(mc, Rational(0), {1.0, 0.0}));
  const auto sigma_hat = MeasureExpr::from_term(fourier_side_measure(mc, Rational(0), {1.0, 0.0}));
  const Gaussian g(1.0);
  const auto lhs = pair(sigma, g.fourier_transform(), Rational(1000));
  const auto rhs = pair(sigma_hat, g, Rational(1000));
  CHECK(std::abs(lhs.value - rhs.value) <= 1e-8 * (1.0 + std::abs(rhs.value)));
}

TEST_CASE("boundedness contrast: pieces bounded, multi-level escapes") {
  const auto& fm = fixtures::default_build();
  std::vector<double> grid;
  for (int i = 0; i <= 32; ++i) grid.push_back(4.0 * i);  // includes t_1 = 128
  const auto rep = boundedness_contrast(fm, Gaussian(1.0), grid);
  REQUIRE(rep.single_level.size() == 2);
  for (const auto& row : rep.single_level) {
    INFO("level " << row.n << " sup=" << row.sup_grid << " bound=" << row.bound);
    CHECK(row.pass);
  }
  CHECK(rep.multi_max >= 4.2331);  // the grid contains t_1
}

TEST_CASE("boundedness contrast: zero measure is identically zero") {
  AssembledMeasure zero;
  const auto rep = boundedness_contrast(zero, Gaussian(1.0), {0.0, 1.0, 128.0});
  CHECK(rep.single_level.empty());
  CHECK(rep.multi_max == 0.0);
  for (const auto& [t, v] : rep.multi_grid) CHECK(v == 0.0);
}

TEST_CASE("phase exactness: the probe factor has modulus exactly 2") {
  const auto& fm = fixtures::default_build();
  for (const auto& lv : fm.levels) {
    const Rational t = Rational(1) / (Rational(2) * lv.params.tau);
    const Complex a = cis_neg2pi((lv.placement.lambda + lv.params.tau) * t);
    const Complex b = cis_neg2pi(lv.placement.lambda * t);
    CHECK(std::abs(std::abs(a - b) - 2.0) <= 1e-14);
  }
}

TEST_CASE("psi decay proxy: reported magnitudes and the analytic crossover") {
  const auto& fm = fixtures::default_build();
  const auto rep = psi_decay_report(fm);
  REQUIRE(rep.rows.size() == 2 * 9);
  for (const auto& r : rep.rows) {
    const Level* lv = fm.find_level(r.n);
    REQUIRE(lv != nullptr);
    const double t13 = lv->params.tau_cbrt();
    const double lam = lv->placement.lambda.to_double();
    CHECK(r.lhs == Catch::Approx(t13 * std::pow(lam, r.k)));
    CHECK(r.rhs == Catch::Approx(std::pow(lam, -r.N)));
    CHECK(std::isfinite(r.weighted));
    // at level 2 the (N=1, k=0) combination already holds
    if (r.n == 2 && r.N == 1 && r.k == 0) CHECK(r.pass);
  }
  // with q = 8, B = 32 the worst combination (N = k = 2) first holds at n = 8
  CHECK(rep.crossover_level == 8);
}

TEST_CASE("headline verdict") {
  const auto& fm = fixtures::default_build();
  const auto v = headline_report(fm);
  for (const auto& s : v.sub) {
    INFO(s.name << ": " << s.detail);
    CHECK(s.pass);
  }
  CHECK(v.crystalline_pass);
  CHECK(v.quasicrystal_fail_certified);
  CHECK(v.verdict_line == "crystalline: pass; quasicrystal: fail (blow-up certified)");
}
