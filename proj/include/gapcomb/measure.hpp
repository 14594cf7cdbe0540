#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "gapcomb/errors.hpp"
#include "gapcomb/numeric.hpp"
#include "gapcomb/rational.hpp"
#include "gapcomb/schwartz.hpp"

namespace gapcomb {

struct Atom {
  Rational position;
  Complex weight;
};

// ---------------------------------------------------------------------------
// Shared immutable coefficient payload.  Shifted / scaled copies of a measure
// alias the same block, so level-2 vectors (2^20 entries) are never duplicated.

class CoeffBlock {
 public:
  explicit CoeffBlock(std::vector<Complex> c) : c_(std::move(c)) {
    abs_sum_ = pairwise_sum<double>(0, c_.size(), [&](std::size_t i) { return std::abs(c_[i]); });
    nonzero_ = 0;
    for (const Complex& z : c_)
      if (z != Complex{0.0, 0.0}) ++nonzero_;
  }

  const std::vector<Complex>& coeffs() const { return c_; }
  std::size_t size() const { return c_.size(); }
  std::size_t nonzero_count() const { return nonzero_; }

  // sum_j |c_j| over the whole block, pairwise order.
  double abs_sum() const { return abs_sum_; }

  // sum over the index range [lo, hi), pairwise order.
  double abs_sum_range(std::size_t lo, std::size_t hi) const {
    if (lo == 0 && hi == c_.size()) return abs_sum_;
    return pairwise_sum<double>(lo, hi, [&](std::size_t i) { return std::abs(c_[i]); });
  }

 private:
  std::vector<Complex> c_;
  double abs_sum_;
  std::size_t nonzero_;
};

using CoeffPtr = std::shared_ptr<const CoeffBlock>;

inline CoeffPtr make_coeffs(std::vector<Complex> c) {
  return std::make_shared<const CoeffBlock>(std::move(c));
}

// ---------------------------------------------------------------------------
// M-periodic measure on the lattice (1/M)Z:
//
//   s * sum_{k in Z} sum_{j=0}^{M^2-1} c_j e^{-2 pi i theta k} delta_{kM + j/M + h}
//
// theta (the per-period phase ramp) is 0 for the space-side measures; the
// Fourier side of a shifted lattice measure needs it because the modulation
// e^{-2 pi i h y} is k-dependent whenever h*M is not an integer.

class PeriodicLatticeMeasure {
 public:
  PeriodicLatticeMeasure(long M, CoeffPtr coeffs, Rational shift, Complex scale,
                         Rational ramp = Rational(0))
      : M_(M), c_(std::move(coeffs)), shift_(std::move(shift)), scale_(scale),
        ramp_(ramp.frac()) {
    if (M_ <= 0) throw Error("PeriodicLatticeMeasure: period must be positive");
    if (!c_ || c_->size() != static_cast<std::size_t>(M_) * static_cast<std::size_t>(M_))
      throw Error("PeriodicLatticeMeasure: coefficient vector must have length M^2");
  }

  long period() const { return M_; }
  const CoeffPtr& block() const { return c_; }
  const std::vector<Complex>& coeffs() const { return c_->coeffs(); }
  const Rational& shift() const { return shift_; }
  Complex scale() const { return scale_; }
  const Rational& ramp() const { return ramp_; }

  PeriodicLatticeMeasure shifted(const Rational& h) const {
    return {M_, c_, shift_ + h, scale_, ramp_};
  }
  PeriodicLatticeMeasure scaled(Complex s) const { return {M_, c_, shift_, scale_ * s, ramp_}; }

  Complex period_factor(const BigInt& k) const {
    if (ramp_.is_zero()) return scale_;
    return scale_ * cis_neg2pi(ramp_ * Rational(k));
  }

 private:
  long M_;
  CoeffPtr c_;
  Rational shift_;
  Complex scale_;
  Rational ramp_;
};

// ---------------------------------------------------------------------------
// A finite sum of periodic lattice measures plus explicit atoms; the
// representation of mu and mu_hat.  Immutable value type.

class MeasureExpr {
 public:
  MeasureExpr() = default;

  static MeasureExpr dirac(Rational position, Complex weight) {
    MeasureExpr m;
    if (weight != Complex{0.0, 0.0}) m.extras_.push_back({std::move(position), weight});
    return m;
  }

  static MeasureExpr from_term(PeriodicLatticeMeasure term) {
    MeasureExpr m;
    if (term.scale() != Complex{0.0, 0.0}) m.terms_.push_back(std::move(term));
    return m;
  }

  static MeasureExpr from_atoms(std::vector<Atom> atoms) {
    MeasureExpr m;
    for (auto& a : atoms)
      if (a.weight != Complex{0.0, 0.0}) m.extras_.push_back(std::move(a));
    return m;
  }

  const std::vector<PeriodicLatticeMeasure>& terms() const { return terms_; }
  const std::vector<Atom>& extras() const { return extras_; }
  bool trivially_zero() const { return terms_.empty() && extras_.empty(); }

  friend MeasureExpr add(const MeasureExpr& a, const MeasureExpr& b) {
    MeasureExpr m = a;
    m.terms_.insert(m.terms_.end(), b.terms_.begin(), b.terms_.end());
    m.extras_.insert(m.extras_.end(), b.extras_.begin(), b.extras_.end());
    return m;
  }

 private:
  std::vector<PeriodicLatticeMeasure> terms_;
  std::vector<Atom> extras_;
};

inline MeasureExpr shift(const MeasureExpr& m, const Rational& h) {
  std::vector<Atom> extras = m.extras();
  for (auto& a : extras) a.position += h;
  MeasureExpr out = MeasureExpr::from_atoms(std::move(extras));
  for (const auto& t : m.terms()) out = add(out, MeasureExpr::from_term(t.shifted(h)));
  return out;
}

inline MeasureExpr scale(const MeasureExpr& m, Complex s) {
  std::vector<Atom> extras = m.extras();
  for (auto& a : extras) a.weight *= s;
  MeasureExpr out = MeasureExpr::from_atoms(std::move(extras));
  if (s == Complex{0.0, 0.0}) return out;  // scaled atoms dropped above
  for (const auto& t : m.terms()) out = add(out, MeasureExpr::from_term(t.scaled(s)));
  return out;
}

inline MeasureExpr subtract(const MeasureExpr& a, const MeasureExpr& b) {
  return add(a, scale(b, Complex{-1.0, 0.0}));
}

// ---------------------------------------------------------------------------
// Exact windowed atom enumeration.  Lattice indices (k, j) landing in the
// window are solved by rational ceil/floor; a full period is never walked
// unless the window covers it.

namespace detail {

struct TermRange {
  BigInt k_lo, k_hi;  // candidate periods (may be empty when k_lo > k_hi)
};

inline TermRange candidate_periods(const PeriodicLatticeMeasure& t, const Interval& w) {
  // period k intersects w iff kM + h <= w.hi and kM + h + M - 1/M >= w.lo
  const Rational M(t.period());
  TermRange r;
  r.k_lo = ((w.lo - t.shift() - M + Rational(1, t.period())) / M).ceil();
  r.k_hi = ((w.hi - t.shift()) / M).floor();
  return r;
}

// j-index range of period k landing in w (openness respected); empty when lo > hi.
inline std::optional<std::pair<long, long>> j_range(const PeriodicLatticeMeasure& t,
                                                    const Interval& w, const BigInt& k) {
  const long M = t.period();
  const Rational base = Rational(k) * Rational(M) + t.shift();
  const Rational jlo_rat = (w.lo - base) * Rational(M);
  const Rational jhi_rat = (w.hi - base) * Rational(M);
  BigInt jlo = jlo_rat.ceil();
  if (w.lo_open && jlo_rat.is_integer()) ++jlo;
  BigInt jhi = jhi_rat.floor();
  if (w.hi_open && jhi_rat.is_integer()) --jhi;
  const BigInt M2 = BigInt(M) * M;
  if (jlo < 0) jlo = 0;
  if (jhi > M2 - 1) jhi = M2 - 1;
  if (jlo > jhi) return std::nullopt;
  return std::make_pair(static_cast<long>(jlo), static_cast<long>(jhi));
}

inline std::vector<Atom> term_atoms_in(const PeriodicLatticeMeasure& t, const Interval& w) {
  std::vector<Atom> out;
  if (t.scale() == Complex{0.0, 0.0}) return out;
  const auto& c = t.coeffs();
  const TermRange kr = candidate_periods(t, w);
  const Rational M(t.period());
  for (BigInt k = kr.k_lo; k <= kr.k_hi; ++k) {
    const auto jr = j_range(t, w, k);
    if (!jr) continue;
    const Complex wk = t.period_factor(k);
    const Rational base = Rational(k) * M + t.shift();
    for (long j = jr->first; j <= jr->second; ++j) {
      const Complex cj = c[static_cast<std::size_t>(j)];
      if (cj == Complex{0.0, 0.0}) continue;
      out.push_back({base + Rational(j, t.period()), wk * cj});
    }
  }
  return out;
}

// Can two lattices (or a lattice and a point) share exact positions?
inline bool lattices_may_collide(const PeriodicLatticeMeasure& a, const PeriodicLatticeMeasure& b) {
  // (1/Ma)Z + (1/Mb)Z = gZ with g = gcd(Ma, Mb) / (Ma * Mb)
  const BigInt g = boost::multiprecision::gcd(BigInt(a.period()), BigInt(b.period()));
  const Rational step(g, BigInt(a.period()) * BigInt(b.period()));
  return ((a.shift() - b.shift()) / step).is_integer();
}

inline bool lattice_contains(const PeriodicLatticeMeasure& t, const Rational& pos) {
  return ((pos - t.shift()) * Rational(t.period())).is_integer();
}

inline bool any_collisions(const MeasureExpr& m) {
  const auto& ts = m.terms();
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i + 1; j < ts.size(); ++j)
      if (lattices_may_collide(ts[i], ts[j])) return true;
  for (const auto& a : m.extras())
    for (const auto& t : ts)
      if (lattice_contains(t, a.position)) return true;
  for (std::size_t i = 0; i < m.extras().size(); ++i)
    for (std::size_t j = i + 1; j < m.extras().size(); ++j)
      if (m.extras()[i].position == m.extras()[j].position) return true;
  return false;
}

// k-way merge of per-source sorted atom lists; coincident positions combine
// by weight addition and exact zeros are dropped (eps <= 0 keeps everything
// with weight != 0; a positive eps opts into lossy dropping).
inline std::vector<Atom> merge_atoms(std::vector<std::vector<Atom>> lists, double eps) {
  std::vector<std::size_t> idx(lists.size(), 0);
  std::vector<Atom> out;
  for (;;) {
    const Rational* best = nullptr;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      if (idx[i] >= lists[i].size()) continue;
      const Rational& p = lists[i][idx[i]].position;
      if (!best || p < *best) {
        best = &p;
        best_i = i;
      }
    }
    if (!best) break;
    Atom a = lists[best_i][idx[best_i]++];
    // absorb equal positions from all lists
    for (;;) {
      bool absorbed = false;
      for (std::size_t i = 0; i < lists.size(); ++i) {
        while (idx[i] < lists[i].size() && lists[i][idx[i]].position == a.position) {
          a.weight += lists[i][idx[i]].weight;
          ++idx[i];
          absorbed = true;
        }
      }
      if (!absorbed) break;
    }
    if (std::abs(a.weight) > eps || (eps <= 0.0 && a.weight != Complex{0.0, 0.0}))
      out.push_back(std::move(a));
  }
  return out;
}

}  // namespace detail

// Exactly the atoms of m in the window: positions exact, merged, ascending.
inline std::vector<Atom> atoms_in(const MeasureExpr& m, const Interval& w, double eps = 0.0) {
  std::vector<std::vector<Atom>> lists;
  for (const auto& t : m.terms()) lists.push_back(detail::term_atoms_in(t, w));
  std::vector<Atom> ex;
  for (const auto& a : m.extras())
    if (w.contains(a.position)) ex.push_back(a);
  std::sort(ex.begin(), ex.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });
  lists.push_back(std::move(ex));
  return detail::merge_atoms(std::move(lists), eps);
}

// The measure-theoretic restriction used by the level identities; same
// result as atoms_in.
inline std::vector<Atom> restrict_to(const MeasureExpr& m, const Interval& w) {
  return atoms_in(m, w);
}

// ---------------------------------------------------------------------------
// Total variation over a window.  Complete periods are counted in closed form
// (period count times sum |c_j|); partial periods reduce to an exact index
// range.  When distinct sources could place atoms at equal positions the
// closed form is invalid and the merged enumeration is used instead.

inline double variation(const MeasureExpr& m, const Interval& w) {
  if (detail::any_collisions(m)) {
    const auto atoms = atoms_in(m, w);
    return pairwise_sum<double>(0, atoms.size(),
                                [&](std::size_t i) { return std::abs(atoms[i].weight); });
  }
  double total = 0.0;
  for (const auto& t : m.terms()) {
    if (t.scale() == Complex{0.0, 0.0}) continue;
    const double s_abs = std::abs(t.scale());
    const Rational M(t.period());
    const BigInt M2 = BigInt(t.period()) * t.period();
    // complete periods: kM + h on the low side, kM + h + M - 1/M on the high side
    const Rational span = M - Rational(1, t.period());
    Rational lo_k = (w.lo - t.shift()) / M;
    BigInt k_full_lo = lo_k.ceil();
    if (w.lo_open && lo_k.is_integer()) ++k_full_lo;
    Rational hi_k = (w.hi - t.shift() - span) / M;
    BigInt k_full_hi = hi_k.floor();
    if (w.hi_open && hi_k.is_integer()) --k_full_hi;
    if (k_full_hi >= k_full_lo) {
      const BigInt n_full = k_full_hi - k_full_lo + 1;
      total += n_full.convert_to<double>() * s_abs * t.block()->abs_sum();
    }
    const detail::TermRange kr = detail::candidate_periods(t, w);
    for (BigInt k = kr.k_lo; k <= kr.k_hi; ++k) {
      if (k >= k_full_lo && k <= k_full_hi) continue;
      const auto jr = detail::j_range(t, w, k);
      if (!jr) continue;
      total += s_abs * t.block()->abs_sum_range(static_cast<std::size_t>(jr->first),
                                                static_cast<std::size_t>(jr->second) + 1);
    }
  }
  std::vector<const Atom*> inside;
  for (const auto& a : m.extras())
    if (w.contains(a.position)) inside.push_back(&a);
  total += pairwise_sum<double>(0, inside.size(),
                                [&](std::size_t i) { return std::abs(inside[i]->weight); });
  return total;
}

// ---------------------------------------------------------------------------
// Pairing (m, f) truncated to |x| <= radius, with a crude certified tail
// bound from f's decay certificate.

struct PairResult {
  Complex value;
  double tail_bound = 0.0;
};

namespace detail {

// sum_{k >= k0} 1 / (1 + (d0 + (k-k0) M)^2)  bounded by first term + integral
inline double inverse_square_tail(double d0, double M) {
  if (d0 < 0) d0 = 0;
  return 1.0 / (1.0 + d0 * d0) + (1.5707963267948966 - std::atan(d0)) / M;
}

}  // namespace detail

inline PairResult pair(const MeasureExpr& m, const SmoothFunction& f, const Rational& radius) {
  if (!(radius > Rational(0))) throw Error("pair: radius must be positive");
  const double R = radius.to_double();
  const auto tail_sup = f.tail_sup_bound(R, 2);
  if (!tail_sup)
    throw NoDecayCertificate("pair: function carries no decay certificate for the tail");
  const Interval w = Interval::closed(-radius, radius);
  const auto atoms = atoms_in(m, w);
  const Complex value = pairwise_sum<Complex>(0, atoms.size(), [&](std::size_t i) {
    return atoms[i].weight * f.eval(atoms[i].position.to_double(), 0);
  });
  // tail: sum_{|lambda|>R} |c_lambda| / (1 + lambda^2), overestimated per term.
  // Beyond R, each window of length M holds at most one period's mass S1 and
  // the g-th such window sits at distance >= R + (g-1) M, so per side
  //   sum <= S1 [ 2/(1+R^2) + integral_0^inf dg / (1 + (R + gM)^2) ].
  double tail_mass = 0.0;
  for (const auto& t : m.terms()) {
    if (t.scale() == Complex{0.0, 0.0}) continue;
    const double s_abs = std::abs(t.scale());
    const double S1 = t.block()->abs_sum();
    const double Md = static_cast<double>(t.period());
    tail_mass += 2.0 * s_abs * S1 *
                 (1.0 / (1.0 + R * R) + detail::inverse_square_tail(R, Md));
  }
  for (const auto& a : m.extras()) {
    if (w.contains(a.position)) continue;
    const double x = a.position.to_double();
    tail_mass += std::abs(a.weight) / (1.0 + x * x);
  }
  return {value, tail_mass * *tail_sup};
}

}  // namespace gapcomb
