#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gapcomb/numeric.hpp"
#include "gapcomb/schwartz.hpp"
#include "oracles.hpp"

using namespace gapcomb;

TEST_CASE("eta: plateau, support, midpoint, evenness") {
  CHECK(eta_eval(0.0) == 1.0);
  CHECK(eta_eval(1.0 / 3.0) == 1.0);
  CHECK(eta_eval(0.7) == 0.0);
  CHECK(eta_eval(0.5) == 0.0);
  CHECK(eta_eval(5.0 / 12.0) == 0.5);  // g(1/2) by symmetry of the profile
  SplitMix64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-0.6, 0.6);
    CHECK(eta_eval(-x) == eta_eval(x));
    const double v = eta_eval(x);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("eta: dense plateau/support sweep") {
  for (int i = 0; i <= 3000; ++i) {
    const double x = -0.7 + i * (1.4 / 3000.0);
    const double v = eta_eval(x);
    if (std::fabs(x) <= 1.0 / 3.0) CHECK(v == 1.0);
    if (std::fabs(x) >= 0.5) CHECK(v == 0.0);
    CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("eta derivatives: finite differences converge at second order") {
  // Richardson-style check: halving h divides the error against the closed
  // form by ~4; that the error shrinks TOWARD the closed-form value is what
  // certifies the jet arithmetic.
  auto f0 = [](double x) { return eta_eval(x, 0); };
  auto f1 = [](double x) { return eta_eval(x, 1); };
  auto f2 = [](double x) { return eta_eval(x, 2); };
  struct Probe {
    std::function<double(double)> base;
    int fd_order;   // order of finite difference applied to base
    int jet_order;  // which eta derivative it estimates
    double h;
    double floor;   // roundoff floor below which rate checks are meaningless
  };
  const std::vector<Probe> probes = {{f0, 1, 1, 1e-3, 1e-9},
                                     {f0, 2, 2, 1e-3, 1e-6},
                                     {f1, 2, 3, 2e-3, 1e-4},
                                     {f2, 2, 4, 4e-3, 1e-2}};
  for (const auto& p : probes) {
    for (int i = 0; i < 20; ++i) {
      const double x = 1.0 / 3.0 + (i + 0.5) * (0.5 - 1.0 / 3.0) / 20.0;
      const double exact = eta_eval(x, p.jet_order);
      const double e1 = std::fabs(oracles::finite_difference(p.base, x, p.fd_order, p.h) - exact);
      const double e2 =
          std::fabs(oracles::finite_difference(p.base, x, p.fd_order, p.h / 2) - exact);
      if (e1 > p.floor * std::max(1.0, std::fabs(exact))) {
        INFO("order " << p.jet_order << " at x=" << x << ": e(h)=" << e1 << " e(h/2)=" << e2);
        CHECK(e2 < 0.4 * e1);
      }
    }
  }
}

TEST_CASE("psi: plateau values and disjoint supports") {
  const Rational tau1 = Rational::pow2(-8);
  const Rational tau2 = Rational::pow2(-32);
  const Rational lam1(2713, 64);
  const Rational lam2(2749605, 2048);
  const PsiFunction psi({{tau1, lam1}, {tau2, lam2}});
  const double t13 = std::cbrt(tau1.to_double());
  CHECK(psi.eval_real(lam1.to_double()) == t13);                         // eta(0) = 1 exactly
  CHECK(psi.eval_real((lam1 + tau1).to_double()) == t13);                // plateau: eta(tau lam) = 1
  CHECK(psi.eval_real(0.0) == 0.0);
  CHECK(psi.eval_real(500.0) == 0.0);
  // k-th derivative picks up lambda^k
  const double x = lam1.to_double() + 0.4 / lam1.to_double();
  const double u = lam1.to_double() * (x - lam1.to_double());
  CHECK(psi.eval_real(x, 2) ==
        Catch::Approx(t13 * lam1.to_double() * lam1.to_double() * eta_eval(u, 2)));
  // overlapping bumps are rejected
  CHECK_THROWS(PsiFunction({{tau1, Rational(40)}, {tau1, Rational(40)}}));
}

TEST_CASE("psi seminorm (0,0) is the largest tau^{1/3}") {
  const Rational tau1 = Rational::pow2(-8);
  const Rational tau2 = Rational::pow2(-32);
  const PsiFunction psi({{tau1, Rational(2713, 64)}, {tau2, Rational(2749605, 2048)}});
  const auto sv = seminorm(psi, SeminormSpec{0, 0, 40001, 64.0, 60});
  CHECK(sv.lower == Catch::Approx(std::cbrt(tau1.to_double())).epsilon(1e-9));
  REQUIRE(sv.upper.has_value());
  CHECK(*sv.upper >= sv.lower);
}

TEST_CASE("gaussian: self-duality under the stated transform convention") {
  const Gaussian g(1.0);
  const Gaussian gh = g.fourier_transform();
  for (int i = 0; i <= 20; ++i) {
    const double x = -3.0 + 0.3 * i;
    CHECK(std::abs(g.eval(x) - gh.eval(x)) < 1e-14);
  }
}

TEST_CASE("gaussian: transform against the quadrature oracle") {
  const Gaussian g(2.0, 0.3, -1.2);
  const Gaussian gh = g.fourier_transform();
  for (double t : {-2.5, -1.0, -0.3, 0.0, 0.7, 1.9}) {
    const Complex direct = oracles::integrate(
        [&](double x) {
          return g.eval(x) * Complex{std::cos(-2 * M_PI * x * t), std::sin(-2 * M_PI * x * t)};
        },
        -14.0, 14.0, 1e-13);
    CHECK(std::abs(direct - gh.eval(t)) < 1e-10);
  }
}

TEST_CASE("gaussian: shift law checked numerically") {
  // transform of g(x - x0) carries the factor e^{-2 pi i x0 t}
  const double x0 = 1.7;
  const Gaussian base(1.0);
  const Gaussian moved(1.0, x0);
  const Gaussian base_hat = base.fourier_transform();
  const Gaussian moved_hat = moved.fourier_transform();
  for (int i = 0; i < 20; ++i) {
    const double t = -2.0 + 0.21 * i;
    const Complex factor{std::cos(-2 * M_PI * x0 * t), std::sin(-2 * M_PI * x0 * t)};
    CHECK(std::abs(moved_hat.eval(t) - factor * base_hat.eval(t)) < 1e-13);
  }
}

TEST_CASE("gaussian: inverse transform and derivatives") {
  const Gaussian g(0.7, -0.4, 0.9);
  const Gaussian gc = g.inverse_transform();
  // gcheck(x) = ghat(-x)
  const Gaussian gh = g.fourier_transform();
  for (double x : {-1.3, 0.0, 0.8}) CHECK(std::abs(gc.eval(x) - gh.eval(-x)) < 1e-14);
  // derivatives against finite differences
  for (int k = 1; k <= 3; ++k) {
    for (double x : {-0.9, 0.2, 1.4}) {
      auto fre = [&](double y) { return g.eval(y).real(); };
      auto fim = [&](double y) { return g.eval(y).imag(); };
      const Complex fd{oracles::finite_difference(fre, x, k, k <= 2 ? 1e-5 : 1e-4),
                       oracles::finite_difference(fim, x, k, k <= 2 ? 1e-5 : 1e-4)};
      CHECK(std::abs(fd - g.eval(x, k)) < 1e-4 * std::max(1.0, std::abs(g.eval(x, k))));
    }
  }
}

TEST_CASE("gaussian: seminorms") {
  const Gaussian g(1.0);
  const auto n00 = seminorm(g, SeminormSpec{0, 0});
  CHECK(n00.lower == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(n00.upper.has_value());
  CHECK(*n00.upper >= 1.0);
  // (1+x^2) e^{-pi x^2} is maximized at x = 0: the critical-point equation
  // 2x(1 - pi(1+x^2)) = 0 has no real root besides 0
  const auto n20 = seminorm(g, SeminormSpec{2, 0});
  CHECK(n20.lower == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(*n20.upper >= n20.lower);
  // certified upper bounds dominate dense grid maxima for N_{2,1}
  const auto n21 = seminorm(g, SeminormSpec{2, 1});
  REQUIRE(n21.upper.has_value());
  CHECK(n21.lower <= *n21.upper);
}

TEST_CASE("gaussian: tail bounds are sound") {
  const Gaussian g(0.5, 1.0, 0.3);
  for (double r : {2.0, 3.5, 6.0}) {
    const auto tb = g.tail_sup_bound(r, 2);
    REQUIRE(tb.has_value());
    double actual = 0;
    for (int i = 0; i <= 4000; ++i) {
      const double x = r + i * 0.01;
      actual = std::max(actual, (1 + x * x) * std::abs(g.eval(x)));
      actual = std::max(actual, (1 + x * x) * std::abs(g.eval(-x)));
    }
    CHECK(actual <= *tb * (1 + 1e-12));
  }
}

TEST_CASE("convention lock: ghat(0) = integral of g = a^{-1/2}") {
  for (double a : {1.0, 2.0, 5.0}) {
    const Gaussian g(a);
    const Complex quad = oracles::integrate([&](double x) { return g.eval(x); }, -30.0, 30.0, 1e-13);
    CHECK(std::abs(quad - Complex{1.0 / std::sqrt(a), 0.0}) < 1e-11);
    CHECK(std::abs(g.fourier_transform().eval(0.0) - quad) < 1e-11);
  }
}
