#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gapcomb/errors.hpp"
#include "gapcomb/measure.hpp"
#include "gapcomb/meyer.hpp"
#include "gapcomb/numeric.hpp"
#include "gapcomb/rational.hpp"
#include "gapcomb/schwartz.hpp"

namespace gapcomb {

// ---------------------------------------------------------------------------
// Configuration of the assembled measure
//   mu = sum_n tau_n^{-2/3} (sigma_{M_n}^{h_n + tau_n} - sigma_{M_n}^{h_n}),
// with M_n = base^n and tau_n = 2^{-q n^2}.  Defaults reproduce the desk-scale
// two-level build; non-default bases are allowed but every structural
// inequality is re-checked at runtime per level.

struct BuildConfig {
  long base = 32;
  Rational alpha{1, 8};
  int n_lo = 1;
  int n_hi = 2;
  int q = 8;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  long max_rounds = 100000;
  std::optional<MeyerMethod> method;  // unset: nullspace for M^2 <= 4096, else projections
};

struct LevelParams {
  int n = 0;
  long M = 0;
  Rational tau;

  double tau_cbrt() const { return std::cbrt(tau.to_double()); }
  double tau_pow_m13() const { return 1.0 / tau_cbrt(); }
  double tau_pow_m23() const {
    const double c = tau_cbrt();
    return 1.0 / (c * c);
  }
};

struct LevelPlacement {
  int n = 0;
  long j_star = -1;  // the j' of the level's coefficient vector
  long j_dd = -1;    // the j'' selected by the greedy scan
  Rational h;        // j''/M - j'/M + 1/(2M)
  Rational lambda;   // M + j''/M + 1/(2M)
};

struct Level {
  LevelParams params;
  MeyerCoefficients coeffs;
  LevelPlacement placement;
  double weight = 0.0;  // tau^{-2/3}
  CoeffPtr block;       // shared coefficient payload, filled on first use

  const CoeffPtr& shared_block() const {
    if (!block) const_cast<Level*>(this)->block = make_coeffs(coeffs.c);
    return block;
  }
};

struct HypothesisEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  bool exact = false;  // decided by rational comparison, no tolerance
};

// ---------------------------------------------------------------------------

inline long power_long(long base, int n) {
  long v = 1;
  for (int i = 0; i < n; ++i) {
    if (v > (1L << 62) / base) throw Error("power_long: overflow");
    v *= base;
  }
  return v;
}

// Exact dyadic schedule tau_n = 2^{-q n^2}; every requested level must satisfy
// tau_n < 1/(4 M_n).
inline std::vector<LevelParams> default_taus(const BuildConfig& cfg) {
  std::vector<LevelParams> out;
  for (int n = cfg.n_lo; n <= cfg.n_hi; ++n) {
    LevelParams lp;
    lp.n = n;
    lp.M = power_long(cfg.base, n);
    lp.tau = Rational::pow2(-static_cast<long>(cfg.q) * n * n);
    const Rational bound = Rational(1) / (Rational(4) * Rational(lp.M));
    if (!(lp.tau < bound)) {
      int first_ok = -1;
      for (int k = 1; k <= 512; ++k) {
        const Rational t = Rational::pow2(-static_cast<long>(cfg.q) * k * k);
        const Rational b = Rational(1) / (Rational(4) * Rational(power_long(cfg.base, k)));
        if (t < b) {
          first_ok = k;
          break;
        }
      }
      throw ScheduleInfeasible("default_taus: tau_" + std::to_string(n) + " = " + lp.tau.str() +
                               " >= 1/(4 M_" + std::to_string(n) + "); smallest valid level for q=" +
                               std::to_string(cfg.q) + ", B=" + std::to_string(cfg.base) + " is n=" +
                               std::to_string(first_ok));
    }
    out.push_back(std::move(lp));
  }
  return out;
}

// Greedy thinning to a subsequence on which both
//   sum_{p<n} tau_p^{-1/3} < (1/3) tau_n^{-1/3}
//   sum_{p>n} tau_p^{2/3}  < (2/(3 pi)) tau_n^{2/3}
// hold, with a 1-1e-9 safety factor on the right-hand sides.
inline std::vector<LevelParams> thin_taus(const std::vector<LevelParams>& taus) {
  constexpr double kSafety = 1.0 - 1e-9;
  constexpr double kTwoOver3Pi = 2.0 / (3.0 * 3.14159265358979323846);
  std::vector<LevelParams> kept;
  auto satisfied = [&](const std::vector<LevelParams>& seq) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      double s1 = 0;
      for (std::size_t p = 0; p < i; ++p) s1 += seq[p].tau_pow_m13();
      if (!(s1 < (1.0 / 3.0) * seq[i].tau_pow_m13() * kSafety)) return false;
      double s2 = 0;
      for (std::size_t p = i + 1; p < seq.size(); ++p) {
        const double c = seq[p].tau_cbrt();
        s2 += c * c;
      }
      const double c = seq[i].tau_cbrt();
      if (!(s2 < kTwoOver3Pi * c * c * kSafety)) return false;
    }
    return true;
  };
  for (const auto& lp : taus) {
    if (!kept.empty() && !(lp.tau < kept.back().tau))
      throw Error("thin_taus: input must be strictly decreasing");
    kept.push_back(lp);
    if (!satisfied(kept)) kept.pop_back();
  }
  return kept;
}

// I_n = [M, 2M) intersected with (M + j'/M - M/32, M + j'/M + M/32).
inline Interval candidate_interval(const LevelParams& lp, long j_star) {
  const Rational M(lp.M);
  const Rational center = M + Rational(j_star, lp.M);
  const Rational radius = M / Rational(32);
  const auto inter = intersect(Interval::half_open(M, Rational(2) * M),
                               Interval::open(center - radius, center + radius));
  if (!inter) throw gapcomb::EmptyInterval("candidate_interval: empty intersection");
  return *inter;
}

namespace detail {

// Range of j with I_{n,j} = [M + j/M, M + (j+1)/M) fully inside I_n.
inline std::pair<long, long> full_subinterval_range(const Interval& In, long M) {
  const Rational Mr(M);
  Rational zlo = (In.lo - Mr) * Mr;
  BigInt jmin = zlo.ceil();
  if (In.lo_open && zlo.is_integer()) ++jmin;
  Rational zhi = (In.hi - Mr) * Mr;  // need j + 1 <= zhi
  BigInt jmax = zhi.floor() - 1;
  if (!zhi.is_integer()) jmax = (zhi - Rational(1)).floor();
  if (jmin < 0) jmin = 0;
  const BigInt M2 = BigInt(M) * M;
  if (jmax > M2 - 1) jmax = M2 - 1;
  return {static_cast<long>(jmin), static_cast<long>(jmax)};
}

}  // namespace detail

// The level-n space-side difference tau^{-2/3} (sigma^{h+tau} - sigma^h).
inline MeasureExpr level_difference(const Level& lv) {
  const auto& coeffs = lv.shared_block();
  MeasureExpr plus = MeasureExpr::from_term(PeriodicLatticeMeasure(
      lv.params.M, coeffs, lv.placement.h + lv.params.tau, Complex{lv.weight, 0.0}));
  MeasureExpr minus = MeasureExpr::from_term(PeriodicLatticeMeasure(
      lv.params.M, coeffs, lv.placement.h, Complex{-lv.weight, 0.0}));
  return add(plus, minus);
}

// Greedy selection of j'': the smallest full subinterval of I_n whose closure
// is disjoint (by exact query) from every prior level's support.
inline LevelPlacement choose_placement(const LevelParams& lp, long j_star,
                                       const std::vector<Level>& prior) {
  const Interval In = candidate_interval(lp, j_star);
  const auto [jmin, jmax] = detail::full_subinterval_range(In, lp.M);
  const Rational Mr(lp.M);
  // counting guarantee on the number of candidate subintervals
  const Rational available(BigInt(jmax) - BigInt(jmin) + 1);
  const Rational count_bound = Mr * Mr / Rational(32) - Rational(1);
  if (available < count_bound)
    throw CertificateFailure("choose_placement: only " + available.str() +
                             " full subintervals, below the counting bound " + count_bound.str());
  std::vector<MeasureExpr> prior_diffs;
  prior_diffs.reserve(prior.size());
  for (const auto& lv : prior) prior_diffs.push_back(level_difference(lv));
  for (long j = jmin; j <= jmax; ++j) {
    const Interval Inj = Interval::half_open(Mr + Rational(j, lp.M), Mr + Rational(j + 1, lp.M));
    if (!In.contains_interval(Inj)) continue;
    bool occupied = false;
    for (const auto& diff : prior_diffs) {
      if (!atoms_in(diff, Inj).empty()) {
        occupied = true;
        break;
      }
    }
    if (occupied) continue;
    LevelPlacement pl;
    pl.n = lp.n;
    pl.j_star = j_star;
    pl.j_dd = j;
    pl.h = Rational(j, lp.M) - Rational(j_star, lp.M) + Rational(1, 2 * lp.M);
    pl.lambda = Mr + Rational(j, lp.M) + Rational(1, 2 * lp.M);
    // exact placement invariants from the proof
    if (!(pl.h.abs() < Mr / Rational(32)))
      throw CertificateFailure("choose_placement: |h_n| >= M_n/32 at level " + std::to_string(lp.n));
    const Rational jdiff = (Rational(j_star, lp.M) - Rational(j, lp.M)).abs();
    if (!(jdiff <= Mr / Rational(32) - Rational(1, lp.M)))
      throw CertificateFailure("choose_placement: |j'/M - j''/M| > M/32 - 1/M at level " +
                               std::to_string(lp.n));
    if (!Inj.contains(pl.lambda))
      throw CertificateFailure("choose_placement: lambda_n outside I_{n,j''}");
    const Rational half_w = Rational(1) / (Rational(2) * pl.lambda);
    if (!Inj.contains_interval(Interval::open(pl.lambda - half_w, pl.lambda + half_w)))
      throw CertificateFailure("choose_placement: (lambda - 1/(2 lambda), lambda + 1/(2 lambda)) "
                               "not inside I_{n,j''}");
    return pl;
  }
  throw NoAdmissibleSubinterval("choose_placement: no admissible subinterval at level " +
                                std::to_string(lp.n) +
                                " (violates the counting guarantee)");
}

// ---------------------------------------------------------------------------

struct CertificateRecord {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct AssembledMeasure {
  BuildConfig config;
  std::vector<Level> levels;
  MeasureExpr mu;
  MeasureExpr mu_hat;
  std::vector<CertificateRecord> certificates;

  const Level* find_level(int n) const {
    for (const auto& lv : levels)
      if (lv.params.n == n) return &lv;
    return nullptr;
  }

  // (lambda_n - 1/(2 lambda_n), lambda_n + 1/(2 lambda_n))
  Interval level_window(const Level& lv) const {
    const Rational hw = Rational(1) / (Rational(2) * lv.placement.lambda);
    return Interval::open(lv.placement.lambda - hw, lv.placement.lambda + hw);
  }

  PsiFunction psi() const {
    std::vector<std::pair<Rational, Rational>> tl;
    tl.reserve(levels.size());
    for (const auto& lv : levels) tl.emplace_back(lv.params.tau, lv.placement.lambda);
    return PsiFunction(std::move(tl));
  }
};

// Two-atom restriction certificate: the restriction of mu to the level window is
// exactly two atoms, at lambda_n and lambda_n + tau_n, with weights
// -tau^{-2/3} and +tau^{-2/3}.
struct RestrictionCertificate {
  int n = 0;
  Rational at_lambda_pos, at_shifted_pos;
  Complex w_lambda, w_shifted;
  double weight_rel_err = 0.0;
};

inline RestrictionCertificate check_restriction_identity(const AssembledMeasure& fm, int n) {
  const Level* lv = fm.find_level(n);
  if (!lv) throw MismatchedLevels("check_restriction_identity: level not built");
  const Interval w = fm.level_window(*lv);
  const auto atoms = restrict_to(fm.mu, w);
  if (atoms.size() != 2) {
    std::string detail = "check_restriction_identity: expected 2 atoms in " + w.str() + ", got " +
                         std::to_string(atoms.size());
    for (const auto& a : atoms) detail += " @" + a.position.str();
    throw CertificateFailure(detail);
  }
  const Rational& lam = lv->placement.lambda;
  const Rational lam_tau = lam + lv->params.tau;
  if (!(atoms[0].position == lam))
    throw CertificateFailure("check_restriction_identity: first atom at " + atoms[0].position.str() +
                             ", expected lambda = " + lam.str());
  if (!(atoms[1].position == lam_tau))
    throw CertificateFailure("check_restriction_identity: second atom at " +
                             atoms[1].position.str() + ", expected lambda + tau = " + lam_tau.str());
  const double wgt = lv->weight;
  const double err = std::max(std::abs(atoms[0].weight - Complex{-wgt, 0.0}),
                              std::abs(atoms[1].weight - Complex{wgt, 0.0})) /
                     wgt;
  if (err > 1e-12)
    throw CertificateFailure("check_restriction_identity: weight error " + std::to_string(err));
  RestrictionCertificate cert;
  cert.n = n;
  cert.at_lambda_pos = atoms[0].position;
  cert.at_shifted_pos = atoms[1].position;
  cert.w_lambda = atoms[0].weight;
  cert.w_shifted = atoms[1].weight;
  cert.weight_rel_err = err;
  return cert;
}

// Disjointness certificate: no foreign level places atoms inside the
// level-n window.  Exact emptiness query per foreign level.
inline void check_disjointness(const AssembledMeasure& fm, int n) {
  const Level* lv = fm.find_level(n);
  if (!lv) throw MismatchedLevels("check_disjointness: level not built");
  const Interval w = fm.level_window(*lv);
  for (const auto& other : fm.levels) {
    if (other.params.n == n) continue;
    const auto atoms = atoms_in(level_difference(other), w);
    if (!atoms.empty())
      throw CertificateFailure("check_disjointness: level " + std::to_string(other.params.n) +
                               " atom at " + atoms[0].position.str() + " inside the level-" +
                               std::to_string(n) + " window " + w.str());
  }
}

// ---------------------------------------------------------------------------
// Runtime hypothesis report.  Report-only: failures are flagged, not thrown;
// finite truncation changes which levels are "large enough", so every
// inequality the lemmas need is checked for the actually-built levels.

inline std::vector<HypothesisEntry> check_hypotheses(const AssembledMeasure& fm) {
  std::vector<HypothesisEntry> out;
  auto push_exact = [&](std::string name, const Rational& lhs, const Rational& rhs, bool pass) {
    out.push_back({std::move(name), lhs.to_double(), rhs.to_double(), pass, true});
  };
  auto push_float = [&](std::string name, double lhs, double rhs, bool pass) {
    out.push_back({std::move(name), lhs, rhs, pass, false});
  };
  const auto& ls = fm.levels;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto& lv = ls[i];
    const std::string tag = "n=" + std::to_string(lv.params.n) + ": ";
    const Rational M(lv.params.M);
    push_exact(tag + "tau_n < 1/(4 M_n)", lv.params.tau, Rational(1) / (Rational(4) * M),
               lv.params.tau < Rational(1) / (Rational(4) * M));
    push_exact(tag + "M_n > 2 (shift-difference bound hypothesis)", M, Rational(2), M > Rational(2));
    push_exact(tag + "tau_n < 1/(3 lambda_n) (plateau)", lv.params.tau,
               Rational(1) / (Rational(3) * lv.placement.lambda),
               lv.params.tau < Rational(1) / (Rational(3) * lv.placement.lambda));
    push_exact(tag + "tau_n < 1/(2 lambda_n) (window)", lv.params.tau,
               Rational(1) / (Rational(2) * lv.placement.lambda),
               lv.params.tau < Rational(1) / (Rational(2) * lv.placement.lambda));
    push_exact(tag + "|h_n| < M_n/32", lv.placement.h.abs(), M / Rational(32),
               lv.placement.h.abs() < M / Rational(32));
    push_exact(tag + "|h_n + tau_n| < M_n/16", (lv.placement.h + lv.params.tau).abs(),
               M / Rational(16), (lv.placement.h + lv.params.tau).abs() < M / Rational(16));
    // spacing against higher levels
    for (std::size_t p = i + 1; p < ls.size(); ++p) {
      const Rational Mp(ls[p].params.M);
      push_exact(tag + "2 M_n <= M_" + std::to_string(ls[p].params.n) + "/16", Rational(2) * M,
                 Mp / Rational(16), Rational(2) * M <= Mp / Rational(16));
    }
    // counting facts inside I_n
    const Interval In = candidate_interval(lv.params, lv.placement.j_star);
    const auto [jmin, jmax] = detail::full_subinterval_range(In, lv.params.M);
    push_exact(tag + "#full subintervals >= M_n^2/32 - 1",
               Rational(BigInt(jmax) - BigInt(jmin) + 1), M * M / Rational(32) - Rational(1),
               Rational(BigInt(jmax) - BigInt(jmin) + 1) >= M * M / Rational(32) - Rational(1));
    long occupied_subintervals = 0;
    for (std::size_t p = 0; p < i; ++p) {
      const auto atoms = atoms_in(level_difference(ls[p]), In);
      std::vector<long> js;
      for (const auto& a : atoms)
        js.push_back(static_cast<long>(((a.position - M) * M).floor()));
      std::sort(js.begin(), js.end());
      js.erase(std::unique(js.begin(), js.end()), js.end());
      occupied_subintervals += static_cast<long>(js.size());
      // per-shift support counts against the lattice bound M_p M_n / 8
      const Rational bound = Rational(ls[p].params.M) * M / Rational(8);
      push_exact(tag + "#supp(level " + std::to_string(ls[p].params.n) + " diff) cap I_n <= 2 M_p M_n/8",
                 Rational(static_cast<long long>(atoms.size())), Rational(2) * bound,
                 Rational(static_cast<long long>(atoms.size())) <= Rational(2) * bound);
    }
    if (i > 0)
      push_exact(tag + "#occupied subintervals < M_n^2/124",
                 Rational(occupied_subintervals), M * M / Rational(124),
                 Rational(occupied_subintervals) < M * M / Rational(124));
  }
  // decay proxies across levels
  for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
    const auto& a = ls[i];
    const auto& b = ls[i + 1];
    const double ta = -std::log2(a.params.tau.to_double()) / a.params.n;
    const double tb = -std::log2(b.params.tau.to_double()) / b.params.n;
    push_float("(t) proxy: -log2(tau_n)/n increasing (n=" + std::to_string(a.params.n) + "->" +
                   std::to_string(b.params.n) + ")",
               ta, tb, ta < tb);
    const double ga = std::log(a.params.tau.to_double()) / std::log(a.placement.lambda.to_double());
    const double gb = std::log(b.params.tau.to_double()) / std::log(b.placement.lambda.to_double());
    push_float("(g) proxy: log(tau_n)/log(lambda_n) decreasing (n=" + std::to_string(a.params.n) +
                   "->" + std::to_string(b.params.n) + ")",
               ga, gb, gb < ga);
  }
  // thinning inequalities on the retained schedule
  for (std::size_t i = 0; i < ls.size(); ++i) {
    double s1 = 0;
    for (std::size_t p = 0; p < i; ++p) s1 += ls[p].params.tau_pow_m13();
    push_float("prior-mass sum bound at n=" + std::to_string(ls[i].params.n), s1,
               ls[i].params.tau_pow_m13() / 3.0, s1 < ls[i].params.tau_pow_m13() / 3.0);
    double s2 = 0;
    for (std::size_t p = i + 1; p < ls.size(); ++p) {
      const double c = ls[p].params.tau_cbrt();
      s2 += c * c;
    }
    const double c = ls[i].params.tau_cbrt();
    const double rhs = 2.0 * c * c / (3.0 * 3.14159265358979323846);
    push_float("later-mass sum bound at n=" + std::to_string(ls[i].params.n), s2, rhs, s2 < rhs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full assembly: schedule, thinning, per-level construction + placement,
// measure expressions, and the hard certificates.

inline AssembledMeasure assemble(const BuildConfig& cfg) {
  AssembledMeasure fm;
  fm.config = cfg;
  if (cfg.n_lo > cfg.n_hi) {
    fm.certificates.push_back({"empty level range", true, "zero measure, vacuous certificates"});
    return fm;
  }
  const std::vector<LevelParams> schedule = thin_taus(default_taus(cfg));
  // coefficient vectors are independent across levels; placements are not
  std::vector<MeyerCoefficients> built(schedule.size());
  std::vector<std::string> build_errors(schedule.size());
  parallel_for_index(schedule.size(), [&](std::size_t i) {
    try {
      const auto& lp = schedule[i];
      const WindowSpec w(lp.M, cfg.alpha);
      const MeyerMethod method =
          cfg.method ? *cfg.method
                     : (w.N() <= 4096 ? MeyerMethod::nullspace : MeyerMethod::alternating_projection);
      built[i] = build_meyer(w, method, cfg.seed + static_cast<std::uint64_t>(lp.n), cfg.tol,
                             cfg.max_rounds);
    } catch (const std::exception& e) {
      build_errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < schedule.size(); ++i)
    if (!build_errors[i].empty())
      throw Error("assemble: level " + std::to_string(schedule[i].n) + ": " + build_errors[i]);

  for (std::size_t i = 0; i < schedule.size(); ++i) {
    Level lv;
    lv.params = schedule[i];
    lv.coeffs = std::move(built[i]);
    lv.block = make_coeffs(lv.coeffs.c);
    lv.placement = choose_placement(lv.params, lv.coeffs.j_star, fm.levels);
    lv.weight = lv.params.tau_pow_m23();
    fm.levels.push_back(std::move(lv));
  }

  std::vector<MeasureExpr> hat_diffs;
  for (const auto& lv : fm.levels) {
    fm.mu = add(fm.mu, level_difference(lv));
    const Complex w{lv.weight, 0.0};
    MeasureExpr hat_n = MeasureExpr::from_term(
        fourier_side_measure(lv.coeffs, lv.placement.h + lv.params.tau, w));
    hat_n = add(hat_n, MeasureExpr::from_term(fourier_side_measure(lv.coeffs, lv.placement.h, -w)));
    fm.mu_hat = add(fm.mu_hat, hat_n);
    hat_diffs.push_back(std::move(hat_n));
  }

  // hard certificates (throw on failure, with the level index in the message)
  for (const auto& lv : fm.levels) {
    check_restriction_identity(fm, lv.params.n);
    fm.certificates.push_back({"two-atom restriction identity, level " + std::to_string(lv.params.n),
                               true, "two atoms at lambda, lambda+tau"});
    check_disjointness(fm, lv.params.n);
    fm.certificates.push_back({"window disjointness, level " + std::to_string(lv.params.n),
                               true, "all foreign levels empty on the window"});
  }
  if (!fm.levels.empty()) {
    const Rational M_lo(fm.levels.front().params.M);
    const Interval gap = Interval::closed(-(M_lo / Rational(16)), M_lo / Rational(16));
    const auto atoms = atoms_in(fm.mu, gap);
    if (!atoms.empty())
      throw CertificateFailure("assemble: mu has an atom at " + atoms[0].position.str() +
                               " inside the support gap " + gap.str());
    fm.certificates.push_back({"support gap on [-M_lo/16, M_lo/16]", true, gap.str()});
    for (std::size_t i = 0; i < fm.levels.size(); ++i) {
      const auto& lv = fm.levels[i];
      const Rational aM = cfg.alpha * Rational(lv.params.M);
      const Interval fgap = Interval::open(-aM, aM);
      if (!atoms_in(hat_diffs[i], fgap).empty())
        throw CertificateFailure("assemble: level-" + std::to_string(lv.params.n) +
                                 " Fourier-side atom inside " + fgap.str());
    }
    fm.certificates.push_back({"Fourier-side gap (-alpha M_n, alpha M_n) per level", true, ""});
  }
  for (const auto& e : check_hypotheses(fm))
    fm.certificates.push_back({"hypothesis: " + e.name, e.pass,
                               "lhs=" + std::to_string(e.lhs) + " rhs=" + std::to_string(e.rhs) +
                                   (e.exact ? " (exact)" : "")});
  return fm;
}

}  // namespace gapcomb
