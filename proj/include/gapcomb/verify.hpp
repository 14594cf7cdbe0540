#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gapcomb/construction.hpp"
#include "gapcomb/errors.hpp"
#include "gapcomb/measure.hpp"
#include "gapcomb/meyer.hpp"
#include "gapcomb/numeric.hpp"
#include "gapcomb/rational.hpp"
#include "gapcomb/schwartz.hpp"

namespace gapcomb {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// mu_hat * psi_hat at a probe time.  With phi = psi_hat the convolution
// reduces to sum_lambda c_lambda psi(lambda) e^{-2 pi i lambda t}; by the
// disjointness identity only the two atoms per level contribute, giving
//   sum_n tau_n^{-1/3} [eta(tau_n lambda_n) e^{-2 pi i (lambda_n+tau_n) t}
//                       - e^{-2 pi i lambda_n t}].
// Phases are reduced exactly mod 1 before any float enters.

namespace detail {

inline void require_matching_levels(const AssembledMeasure& fm, const PsiFunction& psi) {
  const auto& pl = psi.levels();
  if (pl.size() != fm.levels.size())
    throw MismatchedLevels("hat_convolution_at: psi has " + std::to_string(pl.size()) +
                           " bumps, build has " + std::to_string(fm.levels.size()) + " levels");
  for (const auto& lv : fm.levels) {
    const bool found = std::any_of(pl.begin(), pl.end(), [&](const PsiLevel& p) {
      return p.tau == lv.params.tau && p.lambda == lv.placement.lambda;
    });
    if (!found)
      throw MismatchedLevels("hat_convolution_at: no psi bump for level " +
                             std::to_string(lv.params.n));
  }
}

}  // namespace detail

inline Complex hat_convolution_at(const AssembledMeasure& fm, const PsiFunction& psi,
                                  const Rational& t) {
  detail::require_matching_levels(fm, psi);
  Complex acc{0.0, 0.0};
  for (const auto& lv : fm.levels) {
    const double m13 = lv.params.tau_pow_m13();
    const double eta_plateau =
        eta_eval((lv.params.tau * lv.placement.lambda).to_double(), 0);
    const Complex ph_shift = cis_neg2pi((lv.placement.lambda + lv.params.tau) * t);
    const Complex ph_base = cis_neg2pi(lv.placement.lambda * t);
    acc += m13 * (eta_plateau * ph_shift - ph_base);
  }
  return acc;
}

// Independent route for the same value: enumerate the atoms of mu inside the
// bump windows and pair them with psi(x) e^{-2 pi i x t} directly.
inline Complex hat_convolution_enumerated(const AssembledMeasure& fm, const PsiFunction& psi,
                                          const Rational& t) {
  detail::require_matching_levels(fm, psi);
  Complex acc{0.0, 0.0};
  for (const auto& lv : fm.levels) {
    const auto atoms = atoms_in(fm.mu, fm.level_window(lv));
    acc += pairwise_sum<Complex>(0, atoms.size(), [&](std::size_t i) {
      const double psival = psi.eval_real(atoms[i].position.to_double(), 0);
      return atoms[i].weight * psival * cis_neg2pi(atoms[i].position * t);
    });
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Blow-up series at t_n = 1/(2 tau_n).

struct BlowupRow {
  int n = 0;
  Rational t;            // 1/(2 tau_n), exact dyadic
  Complex F;             // hat convolution value
  double F_abs = 0.0;
  double lower_bound = 0.0;  // finite-level triangle lower bound
  double threshold = 0.0;    // (2/3) tau_n^{-1/3}
  double two_path_rel = 0.0;
};

struct BlowupReport {
  std::vector<BlowupRow> rows;
};

inline BlowupReport blowup_series(const AssembledMeasure& fm) {
  if (fm.levels.empty()) throw Error("blowup_series: build has no levels");
  const PsiFunction psi = fm.psi();
  BlowupReport rep;
  for (std::size_t i = 0; i < fm.levels.size(); ++i) {
    const auto& lv = fm.levels[i];
    BlowupRow row;
    row.n = lv.params.n;
    row.t = Rational(1) / (Rational(2) * lv.params.tau);
    row.F = hat_convolution_at(fm, psi, row.t);
    row.F_abs = std::abs(row.F);
    const Complex two_path = hat_convolution_enumerated(fm, psi, row.t);
    row.two_path_rel = std::abs(row.F - two_path) / std::max(1e-300, row.F_abs);
    // triangle bound with the finite-level sums: foreign levels below n cost at most
    // 2 tau_p^{-1/3} each; above n, |e^{-2 pi i tau_p t} - 1| <= pi tau_p / tau_n.
    double lower = 2.0 * lv.params.tau_pow_m13();
    for (std::size_t p = 0; p < fm.levels.size(); ++p) {
      if (p == i) continue;
      const auto& other = fm.levels[p];
      if (other.params.tau > lv.params.tau) {
        lower -= 2.0 * other.params.tau_pow_m13();
      } else {
        const double small = kPi * (other.params.tau / lv.params.tau).to_double();
        lower -= other.params.tau_pow_m13() * std::min(2.0, small);
      }
    }
    row.lower_bound = lower;
    row.threshold = (2.0 / 3.0) * lv.params.tau_pow_m13();
    if (row.two_path_rel > 1e-12)
      throw CertificateFailure("blowup_series: two-path disagreement " +
                               std::to_string(row.two_path_rel) + " at level " +
                               std::to_string(row.n));
    if (!(row.F_abs >= row.lower_bound))
      throw CertificateFailure("blowup_series: |F(t_" + std::to_string(row.n) + ")| = " +
                               std::to_string(row.F_abs) + " below the triangle lower bound " +
                               std::to_string(row.lower_bound));
    if (!(row.lower_bound >= row.threshold))
      throw CertificateFailure("blowup_series: triangle lower bound below (2/3) tau^{-1/3} at level " +
                               std::to_string(row.n));
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Shift-difference pairing bound:  |(sigma^{h+tau} - sigma^h, phi)| <=
// (5 M^2 + pi^2/3) max_j |c_j| N_{2,1}(phi) tau.   LHS is certified from
// above (value + tail bound), RHS consumes the certified seminorm upper bound.

struct ShiftDifferenceBound {
  double lhs_upper = 0.0;
  double rhs = 0.0;
  double tail = 0.0;
  double radius = 0.0;
};

inline ShiftDifferenceBound shift_difference_bound_check(const MeyerCoefficients& mc, const Gaussian& phi,
                                       const Rational& tau, const Rational& h) {
  if (!(tau > Rational(0)) || !(tau < Rational(1)))
    throw Error("shift_difference_bound_check: tau must lie in (0,1)");
  if (!(h.abs() < Rational(mc.M) / Rational(3)))
    throw Error("shift_difference_bound_check: |h| must be below M/3");
  if (!(mc.M > 2)) throw Error("shift_difference_bound_check: M must exceed 2");
  const auto n21 = phi.seminorm_upper(2, 1);
  if (!n21) throw NoDecayCertificate("shift_difference_bound_check: no certified N_{2,1} bound");
  double maxc = 0.0;
  for (const Complex& z : mc.c) maxc = std::max(maxc, std::abs(z));
  const double M2 = static_cast<double>(mc.M) * static_cast<double>(mc.M);
  const double rhs = (5.0 * M2 + kPi * kPi / 3.0) * maxc * *n21 * tau.to_double();

  const MeasureExpr diff = subtract(
      MeasureExpr::from_term(lattice_measure(mc, h + tau, Complex{1.0, 0.0})),
      MeasureExpr::from_term(lattice_measure(mc, h, Complex{1.0, 0.0})));
  double radius = phi.suggested_radius(std::max(1e-300, rhs * 1e-9), 2);
  PairResult pr{};
  for (int attempt = 0; attempt < 6; ++attempt) {
    pr = pair(diff, phi, Rational::from_double(radius));
    if (pr.tail_bound <= rhs * 1e-6) break;
    radius *= 2;
  }
  ShiftDifferenceBound rec;
  rec.lhs_upper = std::abs(pr.value) + pr.tail_bound;
  rec.rhs = rhs;
  rec.tail = pr.tail_bound;
  rec.radius = radius;
  if (!(rec.lhs_upper <= rec.rhs))
    throw CertificateFailure("shift_difference_bound_check: pairing " + std::to_string(rec.lhs_upper) +
                             " above the bound " + std::to_string(rec.rhs));
  return rec;
}

// ---------------------------------------------------------------------------
// Temperedness: direct pairing against the per-level bound sum
// sum_n (5 M_n^2 + pi^2/3) tau_n^{1/3} N_{2,1}(phi).

struct TemperednessReport {
  double direct_upper = 0.0;
  double bound = 0.0;
  std::vector<std::pair<int, double>> series;  // (n, tau^{1/3} M^2)
  int crossover_level = -1;  // first n with decreasing series terms
};

inline TemperednessReport temperedness_certificate(const AssembledMeasure& fm,
                                                   const Gaussian& phi) {
  const auto n21 = phi.seminorm_upper(2, 1);
  if (!n21) throw NoDecayCertificate("temperedness_certificate: no certified N_{2,1} bound");
  TemperednessReport rep;
  for (const auto& lv : fm.levels) {
    const double M2 = static_cast<double>(lv.params.M) * static_cast<double>(lv.params.M);
    rep.bound += (5.0 * M2 + kPi * kPi / 3.0) * lv.params.tau_cbrt() * *n21;
    rep.series.emplace_back(lv.params.n, lv.params.tau_cbrt() * M2);
  }
  // analytic crossover of tau_n^{1/3} M_n^2 = B^{2n} 2^{-q n^2 / 3}:
  // terms decrease from n to n+1 once q(2n+1)/3 > 2 log2 B.
  {
    const double l2B = std::log2(static_cast<double>(fm.config.base));
    for (int n = 1; n <= 512; ++n) {
      if (static_cast<double>(fm.config.q) * (2 * n + 1) / 3.0 > 2.0 * l2B) {
        rep.crossover_level = n;
        break;
      }
    }
  }
  if (fm.levels.empty()) return rep;
  double radius = phi.suggested_radius(std::max(1e-300, rep.bound * 1e-9), 2);
  PairResult pr{};
  for (int attempt = 0; attempt < 6; ++attempt) {
    pr = pair(fm.mu, phi, Rational::from_double(radius));
    if (pr.tail_bound <= rep.bound * 1e-6) break;
    radius *= 2;
  }
  rep.direct_upper = std::abs(pr.value) + pr.tail_bound;
  if (!(rep.direct_upper <= rep.bound))
    throw CertificateFailure("temperedness_certificate: direct pairing " +
                             std::to_string(rep.direct_upper) + " above the bound " +
                             std::to_string(rep.bound));
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-level decay proxy for psi: each bump contributes derivative values
// ~ tau_n^{1/3} lambda_n^k, and rapid decay asks tau_n^{1/3} lambda_n^k <=
// lambda_n^{-N}.  With tau_n = 2^{-q n^2} and lambda_n ~ B^n that inequality
// first holds at level ceil(3 (k+N) log2(B) / q); the report carries the
// weighted magnitudes, per-combination pass flags, and that crossover.

struct PsiDecayRow {
  int n = 0;
  int N = 0;
  int k = 0;
  double weighted = 0.0;  // tau^{1/3} (1 + (2 lambda)^N), the reported magnitude
  double lhs = 0.0;       // tau^{1/3} lambda^k
  double rhs = 0.0;       // lambda^{-N}
  bool pass = false;
};

struct PsiDecayReport {
  std::vector<PsiDecayRow> rows;       // k, N <= 2
  std::vector<double> finiteness;      // tau^{1/3} (1 + (2 lambda)^N), N <= 4, by level
  int crossover_level = -1;            // first n where the worst combination holds
};

inline PsiDecayReport psi_decay_report(const AssembledMeasure& fm) {
  PsiDecayReport rep;
  for (const auto& lv : fm.levels) {
    const double t13 = lv.params.tau_cbrt();
    const double lam = lv.placement.lambda.to_double();
    for (int N = 0; N <= 4; ++N)
      rep.finiteness.push_back(t13 * (1.0 + std::pow(2.0 * lam, N)));
    for (int N = 0; N <= 2; ++N)
      for (int k = 0; k <= 2; ++k) {
        PsiDecayRow row;
        row.n = lv.params.n;
        row.N = N;
        row.k = k;
        row.weighted = t13 * (1.0 + std::pow(2.0 * lam, N));
        row.lhs = t13 * std::pow(lam, k);
        row.rhs = std::pow(lam, -N);
        row.pass = row.lhs <= row.rhs;
        rep.rows.push_back(row);
      }
  }
  const double l2B = std::log2(static_cast<double>(fm.config.base));
  for (int n = 1; n <= 4096; ++n) {
    if (static_cast<double>(fm.config.q) * n >= 3.0 * (2 + 2) * l2B) {
      rep.crossover_level = n;
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Variation growth M(r) = |mu|(-r, r) and its exponent log M(r) / log r.
// The artifact exhibits the failure of any fixed growth order: the exponent
// at r = 2 lambda_n escalates by at least 1 per level.

struct GrowthRow {
  Rational r;
  double mass = 0.0;
  std::optional<double> exponent;
};

struct GrowthReport {
  std::vector<GrowthRow> rows;
  bool escalation_pass = false;
  std::vector<double> level_exponents;  // at r = 2 lambda_n, ascending n
};

inline std::vector<Rational> default_growth_radii(const AssembledMeasure& fm) {
  std::vector<Rational> radii;
  for (const auto& lv : fm.levels) radii.push_back(Rational(2) * lv.placement.lambda);
  std::sort(radii.begin(), radii.end());
  return radii;
}

inline GrowthReport variation_growth(const AssembledMeasure& fm, std::vector<Rational> radii) {
  std::sort(radii.begin(), radii.end());
  GrowthReport rep;
  for (const auto& r : radii) {
    GrowthRow row;
    row.r = r;
    row.mass = variation(fm.mu, Interval::open(-r, r));
    if (row.mass > 0 && r > Rational(1))
      row.exponent = std::log(row.mass) / std::log(r.to_double());
    rep.rows.push_back(std::move(row));
  }
  // escalation across the built levels' own radii
  rep.escalation_pass = true;
  for (const auto& lv : fm.levels) {
    const Rational r = Rational(2) * lv.placement.lambda;
    const double mass = variation(fm.mu, Interval::open(-r, r));
    rep.level_exponents.push_back(mass > 0 ? std::log(mass) / std::log(r.to_double()) : 0.0);
  }
  for (std::size_t i = 0; i + 1 < rep.level_exponents.size(); ++i)
    if (!(rep.level_exponents[i + 1] >= rep.level_exponents[i] + 1.0)) rep.escalation_pass = false;
  if (rep.level_exponents.empty()) rep.escalation_pass = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Poisson-summation consistency: |(m, ghat) - (m_hat, g)| <= tol (1 + |(m_hat, g)|),
// truncation tails certified below tol/10.

struct PoissonRecord {
  Complex lhs, rhs;
  double residual = 0.0;
  double lhs_tail = 0.0, rhs_tail = 0.0;
  double lhs_radius = 0.0, rhs_radius = 0.0;
};

inline PoissonRecord poisson_check(const MeasureExpr& m, const MeasureExpr& m_hat,
                                   const Gaussian& g, double tol) {
  const Gaussian ghat = g.fourier_transform();
  PoissonRecord rec;
  double r_lhs = ghat.suggested_radius(1e-30, 2);
  double r_rhs = g.suggested_radius(1e-30, 2);
  PairResult lhs{}, rhs{};
  for (int attempt = 0; attempt < 8; ++attempt) {
    lhs = pair(m, ghat, Rational::from_double(r_lhs));
    rhs = pair(m_hat, g, Rational::from_double(r_rhs));
    const double allowance = tol / 10.0 * (1.0 + std::abs(rhs.value));
    if (lhs.tail_bound <= allowance && rhs.tail_bound <= allowance) break;
    if (lhs.tail_bound > allowance) r_lhs *= 2;
    if (rhs.tail_bound > allowance) r_rhs *= 2;
  }
  rec.lhs = lhs.value;
  rec.rhs = rhs.value;
  rec.lhs_tail = lhs.tail_bound;
  rec.rhs_tail = rhs.tail_bound;
  rec.lhs_radius = r_lhs;
  rec.rhs_radius = r_rhs;
  rec.residual = std::abs(rec.lhs - rec.rhs);
  const double allowance = tol / 10.0 * (1.0 + std::abs(rec.rhs));
  if (rec.lhs_tail > allowance || rec.rhs_tail > allowance)
    throw CertificateFailure("poisson_check: could not certify truncation tails below tol/10");
  if (!(rec.residual <= tol * (1.0 + std::abs(rec.rhs))))
    throw CertificateFailure("poisson_check: residual " + std::to_string(rec.residual) +
                             " above tolerance");
  return rec;
}

// ---------------------------------------------------------------------------
// Boundedness contrast: single-level pieces stay below the polynomial-growth
// bound while the multi-level convolution escapes along t_n.

struct ContrastLevelRow {
  int n = 0;
  double sup_grid = 0.0;
  double bound = 0.0;  // C0 + C1 * Stieltjes sum, all upper-certified
  bool pass = false;
};

struct ContrastReport {
  std::vector<ContrastLevelRow> single_level;
  std::vector<std::pair<double, double>> multi_grid;  // (t, |F(t)|)
  double multi_max = 0.0;
};

inline ContrastReport boundedness_contrast(const AssembledMeasure& fm, const Gaussian& g,
                                           const std::vector<double>& t_grid) {
  ContrastReport rep;
  const Gaussian gcheck = g.inverse_transform();
  const int T = 2;  // a single periodic level has M(r) = O(r)
  const auto n_t1 = gcheck.seminorm_upper(T + 1, 0);
  const auto n_00 = gcheck.seminorm_upper(0, 0);
  if (!n_t1 || !n_00)
    throw NoDecayCertificate("boundedness_contrast: missing seminorm certificates");
  for (const auto& lv : fm.levels) {
    const MeasureExpr piece = level_difference(lv);
    const double R = gcheck.suggested_radius(1e-30, T + 1);
    const auto atoms = atoms_in(piece, Interval::closed(Rational::from_double(-R),
                                                        Rational::from_double(R)));
    ContrastLevelRow row;
    row.n = lv.params.n;
    for (double t : t_grid) {
      const Complex v = pairwise_sum<Complex>(0, atoms.size(), [&](std::size_t i) {
        const double x = atoms[i].position.to_double();
        const double ang = -2.0 * kPi * x * t;
        return atoms[i].weight * gcheck.eval(x, 0) * Complex{std::cos(ang), std::sin(ang)};
      });
      row.sup_grid = std::max(row.sup_grid, std::abs(v));
    }
    // C0: atoms inside [-1,1] (none, by the support gap) * sup |gcheck|
    const double c0 = *n_00 * variation(piece, Interval::closed(Rational(-1), Rational(1)));
    // Stieltjes sum over 1 < |lambda| <= R plus the analytic tail beyond R
    double stieltjes = 0.0;
    for (const auto& a : atoms) {
      const double x = std::fabs(a.position.to_double());
      if (x <= 1.0) continue;
      stieltjes += std::abs(a.weight) / (x * x * x);
    }
    for (const auto& term : piece.terms()) {
      const double S1 = std::abs(term.scale()) * term.block()->abs_sum();
      const double Md = static_cast<double>(term.period());
      const double d0 = R;
      stieltjes += 2.0 * S1 * (1.0 / (d0 * d0 * d0) + 1.0 / (2.0 * Md * d0 * d0));
    }
    row.bound = c0 + *n_t1 * stieltjes;
    row.pass = row.sup_grid <= row.bound;
    rep.single_level.push_back(row);
  }
  const PsiFunction psi = fm.psi();
  for (double t : t_grid) {
    const double v = std::abs(hat_convolution_at(fm, psi, Rational::from_double(t)));
    rep.multi_grid.emplace_back(t, v);
    rep.multi_max = std::max(rep.multi_max, v);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Headline aggregation.

struct HeadlineVerdict {
  bool crystalline_pass = false;
  bool quasicrystal_fail_certified = false;
  std::string verdict_line;
  std::vector<CertificateRecord> sub;
  BlowupReport blowup;
  GrowthReport growth;
  std::vector<PoissonRecord> poisson;
  std::vector<TemperednessReport> tempered;
};

inline std::vector<Gaussian> default_gaussian_suite() {
  return {Gaussian(1.0), Gaussian(2.0, 0.3), Gaussian(0.5, -1.0, 1.0), Gaussian(4.0, 2.0, -2.0),
          Gaussian(1.0, 0.0, 0.5)};
}

inline HeadlineVerdict headline_report(const AssembledMeasure& fm) {
  HeadlineVerdict v;
  auto run = [&](const std::string& name, auto&& fn) {
    try {
      fn();
      v.sub.push_back({name, true, ""});
      return true;
    } catch (const std::exception& e) {
      v.sub.push_back({name, false, e.what()});
      return false;
    }
  };

  bool crystalline = true;
  crystalline &= run("meyer window certificates", [&] {
    for (const auto& lv : fm.levels)
      verify_meyer(lv.coeffs, WindowSpec(lv.params.M, fm.config.alpha), fm.config.tol);
  });
  crystalline &= run("two-atom restriction identity", [&] {
    for (const auto& lv : fm.levels) check_restriction_identity(fm, lv.params.n);
  });
  crystalline &= run("window disjointness", [&] {
    for (const auto& lv : fm.levels) check_disjointness(fm, lv.params.n);
  });
  crystalline &= run("discrete support on sample windows", [&] {
    if (fm.levels.empty()) return;
    const Rational M_lo(fm.levels.front().params.M);
    // structural: every bounded query returns a finite list; exercise a few
    const auto a1 = atoms_in(fm.mu, Interval::closed(-(M_lo * 4), M_lo * 4));
    const auto a2 = atoms_in(fm.mu_hat, Interval::closed(-(M_lo * 2), M_lo * 2));
    (void)a1;
    (void)a2;
  });
  crystalline &= run("support gap", [&] {
    if (fm.levels.empty()) return;
    const Rational M_lo(fm.levels.front().params.M);
    const auto atoms = atoms_in(fm.mu, Interval::closed(-(M_lo / Rational(16)), M_lo / Rational(16)));
    if (!atoms.empty()) throw CertificateFailure("atom inside the support gap");
  });
  crystalline &= run("temperedness certificates", [&] {
    for (const auto& g : default_gaussian_suite()) v.tempered.push_back(temperedness_certificate(fm, g));
  });
  crystalline &= run("poisson checks (sigma levels + mu)", [&] {
    for (const auto& lv : fm.levels) {
      const MeasureExpr sigma =
          MeasureExpr::from_term(lattice_measure(lv.coeffs, Rational(0), Complex{1.0, 0.0}));
      const MeasureExpr sigma_hat = MeasureExpr::from_term(
          fourier_side_measure(lv.coeffs, Rational(0), Complex{1.0, 0.0}));
      v.poisson.push_back(poisson_check(sigma, sigma_hat, Gaussian(1.0, 0.37), 1e-8));
    }
    if (!fm.levels.empty())
      v.poisson.push_back(poisson_check(fm.mu, fm.mu_hat, Gaussian(1.0, 0.11, 0.23), 1e-8));
  });

  bool not_qc = true;
  not_qc &= run("blow-up series", [&] { v.blowup = blowup_series(fm); });
  not_qc &= run("variation growth escalation", [&] {
    v.growth = variation_growth(fm, default_growth_radii(fm));
    if (!v.growth.escalation_pass)
      throw CertificateFailure("growth exponents do not escalate by >= 1 per level");
  });

  v.crystalline_pass = crystalline;
  v.quasicrystal_fail_certified = not_qc;
  v.verdict_line = std::string("crystalline: ") + (crystalline ? "pass" : "FAIL") +
                   "; quasicrystal: " + (not_qc ? "fail (blow-up certified)" : "UNDECIDED");
  return v;
}

}  // namespace gapcomb
