#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "gapcomb/errors.hpp"
#include "gapcomb/rational.hpp"

namespace gapcomb {

// ---------------------------------------------------------------------------
// Smooth test functions.  eval(x, k) is the k-th derivative; the optional
// bounds are *certified* upper estimates used on the right-hand side of
// inequality certificates (grid maxima are only ever lower bounds).

// Weight (1 + |x|^n) of the seminorm N_{n,m}; at n = 0 this is read as 1
// (N_{0,0} is the plain sup norm).
inline double seminorm_weight(double x, int n) {
  return n == 0 ? 1.0 : 1.0 + std::pow(std::fabs(x), n);
}

class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;

  virtual Complex eval(double x, int k = 0) const = 0;
  virtual int max_derivative() const { return 4; }

  // Upper bound for sup_{|x|>r} |f(x)| (1+|x|^n); nullopt when the function
  // carries no decay certificate.
  virtual std::optional<double> tail_sup_bound(double /*r*/, int /*n*/) const {
    return std::nullopt;
  }

  // Upper bound for the seminorm N_{n,m}(f) = sup max_{k<=m} |(1+|x|^n) f^(k)|.
  virtual std::optional<double> seminorm_upper(int /*n*/, int /*m*/) const {
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Truncated 4-jets (value + derivatives 1..4) for the bump internals.

namespace jet {

using Jet = std::array<double, 5>;

inline Jet add(const Jet& a, const Jet& b) {
  Jet r;
  for (int i = 0; i < 5; ++i) r[i] = a[i] + b[i];
  return r;
}

// Leibniz quotient: q = a / b with q_k = (a_k - sum_{i<k} C(k,i) q_i b_{k-i}) / b_0.
inline Jet div(const Jet& a, const Jet& b) {
  static const int C[5][5] = {{1, 0, 0, 0, 0},
                              {1, 1, 0, 0, 0},
                              {1, 2, 1, 0, 0},
                              {1, 3, 3, 1, 0},
                              {1, 4, 6, 4, 1}};
  Jet q{};
  for (int k = 0; k < 5; ++k) {
    double s = a[k];
    for (int i = 0; i < k; ++i) s -= C[k][i] * q[i] * b[k - i];
    q[k] = s / b[0];
  }
  return q;
}

// Jet of f(s) = e^{-1/s} for s > 0 (all zero for s <= 0 and for underflowed s).
inline Jet exp_neg_inv(double s) {
  if (s < 0.01) return Jet{};  // e^{-100} and below: below double noise here
  const double e0 = std::exp(-1.0 / s);
  const double w1 = 1.0 / (s * s);
  const double w2 = -2.0 / (s * s * s);
  const double w3 = 6.0 / (s * s * s * s);
  const double w4 = -24.0 / (s * s * s * s * s);
  Jet r;
  r[0] = e0;
  r[1] = e0 * w1;
  r[2] = e0 * (w2 + w1 * w1);
  r[3] = e0 * (w3 + 3 * w1 * w2 + w1 * w1 * w1);
  r[4] = e0 * (w4 + 4 * w1 * w3 + 3 * w2 * w2 + 6 * w1 * w1 * w2 + w1 * w1 * w1 * w1);
  return r;
}

}  // namespace jet

// ---------------------------------------------------------------------------
// Plateau bump: eta = 1 on [-1/3, 1/3], 0 outside (-1/2, 1/2), even, C^inf.
// Transition profile g(s) = f(s)/(f(s)+f(1-s)) with f(s) = e^{-1/s}.

// k-th derivative of eta at x, closed form for k <= 4.
inline double eta_eval(double x, int k = 0) {
  if (k < 0 || k > 4) throw Error("eta_eval: derivative order must be in [0,4]");
  const double ax = std::fabs(x);
  if (ax <= 1.0 / 3.0) return k == 0 ? 1.0 : 0.0;
  if (ax >= 0.5) return 0.0;
  const double s = 3.0 - 6.0 * ax;  // in (0, 1)
  jet::Jet u = jet::exp_neg_inv(s);
  jet::Jet v = jet::exp_neg_inv(1.0 - s);
  for (int i = 1; i < 5; i += 2) v[i] = -v[i];  // chain rule for (1-s)
  if (u[0] == 0.0 && v[0] == 0.0) return 0.0;   // both underflowed: deep corner
  const jet::Jet g = jet::div(u, jet::add(u, v));
  double d = g[k];
  double chain = 1.0;
  for (int i = 0; i < k; ++i) chain *= -6.0;
  d *= chain;                       // d/dx for x > 0
  if (x < 0 && (k % 2) == 1) d = -d;  // evenness
  return d;
}

namespace detail {

// Certified-ish maxima of |eta^(k)| on the transition band.  k <= 2 gets a
// rigorous between-grid-nodes correction (needs eta^(k+2)); k = 3, 4 carry a
// small safety factor and are only used in report-grade bounds.
inline double eta_deriv_max(int k) {
  static const std::array<double, 5> maxima = [] {
    std::array<double, 5> grid_max{};
    const int n = 200000;
    const double h = (0.5 - 1.0 / 3.0) / n;
    for (int i = 0; i <= n; ++i) {
      const double x = 1.0 / 3.0 + i * h;
      for (int k2 = 0; k2 < 5; ++k2)
        grid_max[k2] = std::max(grid_max[k2], std::fabs(eta_eval(x, k2)));
    }
    std::array<double, 5> out{};
    for (int k2 = 0; k2 < 5; ++k2) {
      if (k2 <= 2)
        out[k2] = grid_max[k2] + h * h / 8.0 * grid_max[k2 + 2];
      else
        out[k2] = grid_max[k2] * 1.05;
    }
    out[0] = 1.0;  // 0 <= eta <= 1 by construction
    return out;
  }();
  return maxima.at(static_cast<std::size_t>(k));
}

}  // namespace detail

class BumpEta : public SmoothFunction {
 public:
  Complex eval(double x, int k = 0) const override { return {eta_eval(x, k), 0.0}; }

  std::optional<double> tail_sup_bound(double r, int n) const override {
    if (r >= 0.5) return 0.0;
    return seminorm_weight(0.5, n);  // |eta| <= 1 and the support ends at 1/2
  }

  std::optional<double> seminorm_upper(int n, int m) const override {
    if (m > 2) return std::nullopt;
    double best = 0;
    const double wfac = seminorm_weight(0.5, n);  // sup of the weight on the support
    for (int k = 0; k <= m; ++k) best = std::max(best, wfac * detail::eta_deriv_max(k));
    return best;
  }
};

// ---------------------------------------------------------------------------
// psi(x) = sum_n tau_n^{1/3} eta(lambda_n (x - lambda_n)); summand supports
// are pairwise disjoint, which is checked exactly at construction.

struct PsiLevel {
  Rational tau;
  Rational lambda;
  double tau_cbrt;
  double lambda_d;
};

class PsiFunction : public SmoothFunction {
 public:
  PsiFunction() = default;

  explicit PsiFunction(std::vector<std::pair<Rational, Rational>> tau_lambda) {
    for (auto& [tau, lambda] : tau_lambda) {
      if (!(lambda > Rational(0)) || !(tau > Rational(0)))
        throw Error("PsiFunction: tau and lambda must be positive");
      PsiLevel lv;
      lv.tau_cbrt = std::cbrt(tau.to_double());
      lv.lambda_d = lambda.to_double();
      lv.tau = std::move(tau);
      lv.lambda = std::move(lambda);
      levels_.push_back(std::move(lv));
    }
    std::sort(levels_.begin(), levels_.end(),
              [](const PsiLevel& a, const PsiLevel& b) { return a.lambda < b.lambda; });
    for (std::size_t i = 0; i + 1 < levels_.size(); ++i) {
      const Rational right = levels_[i].lambda + half_width(levels_[i]);
      const Rational left = levels_[i + 1].lambda - half_width(levels_[i + 1]);
      if (!(right <= left))
        throw Error("PsiFunction: bump supports around lambda=" + levels_[i].lambda.str() +
                    " and lambda=" + levels_[i + 1].lambda.str() + " overlap");
    }
  }

  const std::vector<PsiLevel>& levels() const { return levels_; }

  double eval_real(double x, int k = 0) const {
    if (k < 0 || k > 4) throw Error("psi_eval: derivative order must be in [0,4]");
    for (const auto& lv : levels_) {
      const double u = lv.lambda_d * (x - lv.lambda_d);
      if (std::fabs(u) < 0.5) {
        double lam_pow = 1.0;
        for (int i = 0; i < k; ++i) lam_pow *= lv.lambda_d;
        return lv.tau_cbrt * lam_pow * eta_eval(u, k);
      }
    }
    return 0.0;
  }

  Complex eval(double x, int k = 0) const override { return {eval_real(x, k), 0.0}; }

  std::optional<double> tail_sup_bound(double r, int n) const override {
    double b = 0;
    for (const auto& lv : levels_) {
      const double hi = lv.lambda_d + 0.5 / lv.lambda_d;
      if (hi <= r) continue;
      b = std::max(b, lv.tau_cbrt * seminorm_weight(hi, n));
    }
    return b;
  }

  std::optional<double> seminorm_upper(int n, int m) const override {
    if (m > 2) return std::nullopt;
    double best = 0;
    for (const auto& lv : levels_) {
      const double hi = lv.lambda_d + 0.5 / lv.lambda_d;
      const double wfac = seminorm_weight(hi, n);
      double lam_pow = 1.0;
      for (int k = 0; k <= m; ++k) {
        best = std::max(best, lv.tau_cbrt * lam_pow * wfac * detail::eta_deriv_max(k));
        lam_pow *= lv.lambda_d;
      }
    }
    return best;
  }

 private:
  static Rational half_width(const PsiLevel& lv) {
    return Rational(1) / (Rational(2) * lv.lambda);
  }

  std::vector<PsiLevel> levels_;
};

inline double psi_eval(const PsiFunction& psi, double x, int k = 0) {
  return psi.eval_real(x, k);
}

// ---------------------------------------------------------------------------
// Gaussian family g(x) = amp e^{-pi a (x-x0)^2} e^{2 pi i xi x}, closed under
// the transform ghat(t) = \int g(x) e^{-2 pi i x t} dx.

class Gaussian : public SmoothFunction {
 public:
  explicit Gaussian(double a, double x0 = 0.0, double xi = 0.0, Complex amp = {1.0, 0.0})
      : a_(a), x0_(x0), xi_(xi), amp_(amp) {
    if (!(a > 0)) throw Error("Gaussian: width parameter a must be positive");
    // g^(k) = P_k(u) g with u = x-x0;  P_{k+1} = P_k' + P_k h', h' = -2 pi a u + 2 pi i xi.
    poly_[0] = {Complex{1.0, 0.0}};
    const Complex h1{0.0, 2 * kPi * xi_};  // constant term of h'
    const double h2 = -2 * kPi * a_;       // u-coefficient of h'
    for (int k = 0; k < 4; ++k) {
      const auto& p = poly_[k];
      std::vector<Complex> q(p.size() + 1, Complex{0.0, 0.0});
      // derivative part
      for (std::size_t i = 1; i < p.size(); ++i) q[i - 1] += static_cast<double>(i) * p[i];
      // product with h'
      for (std::size_t i = 0; i < p.size(); ++i) {
        q[i] += p[i] * h1;
        q[i + 1] += p[i] * h2;
      }
      poly_[k + 1] = std::move(q);
    }
  }

  double width() const { return a_; }
  double center() const { return x0_; }
  double modulation() const { return xi_; }
  Complex amplitude() const { return amp_; }

  Complex eval(double x, int k = 0) const override {
    if (k < 0 || k > 4) throw Error("Gaussian::eval: derivative order must be in [0,4]");
    const double u = x - x0_;
    const Complex base = amp_ * std::exp(-kPi * a_ * u * u) *
                         Complex{std::cos(2 * kPi * xi_ * x), std::sin(2 * kPi * xi_ * x)};
    const auto& p = poly_[k];
    Complex acc{0.0, 0.0};
    double up = 1.0;
    for (const Complex& c : p) {
      acc += c * up;
      up *= u;
    }
    return acc * base;
  }

  // ghat(t) = amp a^{-1/2} e^{2 pi i x0 xi} e^{-pi (t-xi)^2/a} e^{-2 pi i x0 t}.
  Gaussian fourier_transform() const {
    const Complex phase{std::cos(2 * kPi * x0_ * xi_), std::sin(2 * kPi * x0_ * xi_)};
    return Gaussian(1.0 / a_, xi_, -x0_, amp_ * phase / std::sqrt(a_));
  }

  // g(-x), same family.
  Gaussian reflected() const { return Gaussian(a_, -x0_, -xi_, amp_); }

  // gcheck(x) = ghat(-x).
  Gaussian inverse_transform() const { return fourier_transform().reflected(); }

  std::optional<double> tail_sup_bound(double r, int n) const override {
    const double u0 = r > std::fabs(x0_) ? r - std::fabs(x0_) : 0.0;
    return std::abs(amp_) * polytail(weight_poly(n), u0);
  }

  std::optional<double> seminorm_upper(int n, int m) const override {
    if (m > 4 || n > 8) return std::nullopt;
    double best = 0;
    const std::vector<double> w = weight_poly(n);
    for (int k = 0; k <= m; ++k) {
      std::vector<double> pabs(poly_[k].size(), 0.0);
      for (std::size_t i = 0; i < poly_[k].size(); ++i) pabs[i] = std::abs(poly_[k][i]);
      // product polynomial in |u| with nonnegative coefficients
      std::vector<double> prod(w.size() + pabs.size() - 1, 0.0);
      for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < pabs.size(); ++j) prod[i + j] += w[i] * pabs[j];
      best = std::max(best, std::abs(amp_) * polytail(prod, 0.0));
    }
    return best;
  }

  // Smallest radius (stepped in 1/sqrt(a)) whose certified tail is below eps.
  double suggested_radius(double eps, int n = 2) const {
    const double step = 1.0 / std::sqrt(a_);
    double r = std::fabs(x0_) + step;
    for (int i = 0; i < 400; ++i) {
      if (*tail_sup_bound(r, n) < eps) return r;
      r += step;
    }
    return r;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  // coefficients of 1 + (|u| + |x0|)^n as a polynomial in |u|; n = 0 is the
  // plain sup-norm weight 1
  std::vector<double> weight_poly(int n) const {
    if (n == 0) return {1.0};
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    w[0] = 1.0;
    double binom = 1.0;
    const double c = std::fabs(x0_);
    for (int i = 0; i <= n; ++i) {
      w[static_cast<std::size_t>(i)] += binom * std::pow(c, n - i);
      binom = binom * (n - i) / (i + 1);
    }
    return w;
  }

  // sup_{u >= u0} poly(|u|) e^{-pi a u^2}, bounded termwise.
  double polytail(const std::vector<double>& poly, double u0) const {
    double s = 0;
    for (std::size_t d = 0; d < poly.size(); ++d) {
      if (poly[d] == 0) continue;
      const double dd = static_cast<double>(d);
      const double ucrit = d == 0 ? 0.0 : std::sqrt(dd / (2 * kPi * a_));
      double m;
      if (u0 >= ucrit) {
        m = std::pow(u0, dd) * std::exp(-kPi * a_ * u0 * u0);
      } else {
        m = d == 0 ? 1.0 : std::pow(dd / (2 * kPi * a_ * std::exp(1.0)), dd / 2.0);
      }
      s += poly[d] * m;
    }
    return s;
  }

  double a_, x0_, xi_;
  Complex amp_;
  std::array<std::vector<Complex>, 5> poly_;
};

// ---------------------------------------------------------------------------
// Seminorm N_{n,m}: adaptive grid maximization (a lower bound) plus the
// function's certified upper bound when it carries one.

struct SeminormSpec {
  int n = 0;
  int m = 0;
  int coarse_points = 20001;
  double initial_radius = 8.0;
  int refine_iters = 80;
};

struct SeminormValue {
  double lower = 0.0;
  std::optional<double> upper;
};

inline SeminormValue seminorm(const SmoothFunction& f, const SeminormSpec& spec) {
  auto weighted = [&](double x, int k) {
    return seminorm_weight(x, spec.n) * std::abs(f.eval(x, k));
  };
  // pick a scan radius the tail certificate cannot beat
  double r = spec.initial_radius;
  for (int i = 0; i < 24; ++i) {
    const auto tb = f.tail_sup_bound(r, spec.n);
    if (!tb) break;
    if (*tb <= 1e-14 * std::max(1.0, weighted(0.0, 0))) break;
    const auto tb2 = f.tail_sup_bound(2 * r, spec.n);
    if (tb2 && *tb2 >= *tb * 0.999999 && *tb < 1e300) break;  // no longer improving
    r *= 2;
  }
  double lower = 0;
  for (int k = 0; k <= spec.m; ++k) {
    double best_x = 0, best_v = -1;
    const double h = 2 * r / (spec.coarse_points - 1);
    for (int i = 0; i < spec.coarse_points; ++i) {
      const double x = -r + i * h;
      const double v = weighted(x, k);
      if (v > best_v) {
        best_v = v;
        best_x = x;
      }
    }
    // golden-section polish on [best_x - h, best_x + h]
    const double phi = 0.618033988749894848;
    double lo = best_x - h, hi = best_x + h;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = weighted(x1, k), f2 = weighted(x2, k);
    for (int it = 0; it < spec.refine_iters; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = weighted(x2, k);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = weighted(x1, k);
      }
    }
    lower = std::max({lower, best_v, f1, f2});
  }
  SeminormValue out;
  out.lower = lower;
  out.upper = f.seminorm_upper(spec.n, spec.m);
  return out;
}

}  // namespace gapcomb
