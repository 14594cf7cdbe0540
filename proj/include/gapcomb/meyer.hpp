#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gapcomb/errors.hpp"
#include "gapcomb/fft.hpp"
#include "gapcomb/measure.hpp"
#include "gapcomb/numeric.hpp"
#include "gapcomb/rational.hpp"

namespace gapcomb {

// ---------------------------------------------------------------------------
// Window geometry: both supp sigma_M and supp sigma_hat_M must avoid the
// closed window [-alpha M, alpha M] on the (1/M)Z lattice.

struct WindowSpec {
  long M;
  Rational alpha;

  WindowSpec(long M_, Rational alpha_) : M(M_), alpha(std::move(alpha_)) {
    if (M < 1) throw InfeasibleWindow("WindowSpec: M must be >= 1");
    if (!(alpha > Rational(0)) || alpha > Rational(1, 6))
      throw InfeasibleWindow("WindowSpec: alpha = " + alpha.str() + " outside (0, 1/6]");
  }

  long N() const { return M * M; }
};

// { j in [0, M^2) : min_k |kM + j/M| <= alpha M }, i.e. j <= alpha M^2 or
// j >= M^2 - alpha M^2, decided in exact arithmetic with closed boundaries.
inline std::vector<long> forbidden_time_indices(const WindowSpec& w) {
  const Rational aM2 = w.alpha * Rational(w.M) * Rational(w.M);
  const BigInt N(w.N());
  const BigInt lo_hi = aM2.floor();           // j <= alpha M^2
  BigInt hi_lo = (Rational(N) - aM2).ceil();  // j >= M^2 - alpha M^2
  std::vector<long> idx;
  for (BigInt j = 0; j <= lo_hi && j < N; ++j) idx.push_back(static_cast<long>(j));
  if (hi_lo <= lo_hi + 1) hi_lo = lo_hi + 1;  // avoid double-listing tiny windows
  for (BigInt j = hi_lo; j < N; ++j) idx.push_back(static_cast<long>(j));
  return idx;
}

// The Fourier side of representation (a) is again M-periodic on (1/M)Z with
// coefficients dft(c) scaled by 1/M, so the forbidden set has the same formula.
inline std::vector<long> forbidden_freq_indices(const WindowSpec& w) {
  return forbidden_time_indices(w);
}

// ---------------------------------------------------------------------------

struct MeyerCertificate {
  double time_residual = 0.0;  // max_{j in T} |c_j|  (must be exactly 0)
  double freq_residual = 0.0;  // max_{m in F} |chat_m| / max_m |chat_m|
  long worst_time_index = -1;
  long worst_freq_index = -1;
  double max_freq_abs = 0.0;
  bool j_star_is_one = false;
};

struct MeyerCoefficients {
  long M = 0;
  Rational alpha;
  std::vector<Complex> c;  // length M^2, max modulus 1 attained at j_star with value 1
  long j_star = -1;
  double tol = 1e-9;
  std::string method;
  std::uint64_t seed = 0;
  long kernel_dim = -1;  // nullspace method only
  long iterations = 0;   // alternating projections only
  MeyerCertificate cert;
};

enum class MeyerMethod { nullspace, alternating_projection };

inline const char* to_string(MeyerMethod m) {
  return m == MeyerMethod::nullspace ? "nullspace" : "alternating_projection";
}

namespace detail {

// Seeded start vector: a random band-limited field.  Spectrum = plateau
// window over the allowed frequency arc times the spectrum of a dense random
// tap field confined to time indices [0.30 N, 0.45 N].  Such a vector sits
// within ~1e-10 of the constraint intersection and concentrates its modulus
// low in the allowed time arc, which downstream placement relies on.
inline std::vector<Complex> shaped_start(const WindowSpec& w, std::uint64_t seed,
                                         const std::vector<long>& forb) {
  const std::size_t N = static_cast<std::size_t>(w.N());
  SplitMix64 rng(seed * 0x9e3779b97f4a7c15ull + 0x51ab3f1ull);
  if (N < 256) {
    std::vector<Complex> x(N);
    for (auto& z : x) z = rng.complex_normal();
    return x;
  }
  // allowed arc = [first index past the low forbidden block, last index
  // before the high forbidden block]
  long lo = 0;
  while (lo < static_cast<long>(N) &&
         std::binary_search(forb.begin(), forb.end(), lo))
    ++lo;
  long hi = static_cast<long>(N) - 1;
  while (hi >= 0 && std::binary_search(forb.begin(), forb.end(), hi)) --hi;
  const long L = hi - lo + 1;
  std::vector<Complex> spec(N, Complex{0.0, 0.0});
  for (long i = 0; i < L; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(L - 1) - 0.5;
    spec[static_cast<std::size_t>(lo + i)] = {eta_eval(u, 0), 0.0};
  }
  std::vector<Complex> taps(N, Complex{0.0, 0.0});
  const auto dlo = static_cast<std::size_t>(0.30 * static_cast<double>(N));
  const auto dhi = static_cast<std::size_t>(0.45 * static_cast<double>(N));
  for (std::size_t d = dlo; d < dhi; ++d) taps[d] = rng.complex_normal();
  std::vector<Complex> mod = dft(std::move(taps));
  for (std::size_t i = 0; i < N; ++i) spec[i] *= mod[i];
  return idft(std::move(spec));
}

struct Residual {
  double rel = 0.0;
  long worst = -1;
  double max_abs = 0.0;
};

inline Residual freq_residual(const std::vector<Complex>& chat, const std::vector<long>& forb) {
  Residual r;
  for (const Complex& z : chat) r.max_abs = std::max(r.max_abs, std::abs(z));
  double worst_abs = 0.0;
  for (long m : forb) {
    const double a = std::abs(chat[static_cast<std::size_t>(m)]);
    if (a > worst_abs) {
      worst_abs = a;
      r.worst = m;
    }
  }
  r.rel = r.max_abs > 0 ? worst_abs / r.max_abs : 0.0;
  return r;
}

// Normalize so max_j |c_j| = 1 is attained with c[j_star] = 1 exactly.
inline long normalize_to_max(std::vector<Complex>& c) {
  std::size_t jmax = 0;
  double best = -1;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double a = std::abs(c[j]);
    if (a > best) {
      best = a;
      jmax = j;
    }
  }
  if (best <= 0) throw NoSolution("normalize: zero vector");
  const Complex pivot = c[jmax];
  for (auto& z : c) z /= pivot;
  c[jmax] = {1.0, 0.0};
  return static_cast<long>(jmax);
}

inline MeyerCoefficients build_nullspace(const WindowSpec& w, std::uint64_t seed, double tol) {
  const long N = w.N();
  if (N > 16384)
    throw Error("build_meyer[nullspace]: dense decomposition limited to M^2 <= 16384; "
                "use alternating_projection for larger periods");
  const std::vector<long> forb_t = forbidden_time_indices(w);
  const std::vector<long> forb_f = forbidden_freq_indices(w);
  std::vector<long> allowed;
  allowed.reserve(static_cast<std::size_t>(N - static_cast<long>(forb_t.size())));
  for (long j = 0; j < N; ++j)
    if (!std::binary_search(forb_t.begin(), forb_t.end(), j)) allowed.push_back(j);
  const auto rows = static_cast<Eigen::Index>(forb_f.size());
  const auto cols = static_cast<Eigen::Index>(allowed.size());
  Eigen::MatrixXcd A(rows, cols);
  const double step = -6.283185307179586477 / static_cast<double>(N);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto m = static_cast<std::uint64_t>(forb_f[static_cast<std::size_t>(r)]);
    for (Eigen::Index cidx = 0; cidx < cols; ++cidx) {
      const auto j = static_cast<std::uint64_t>(allowed[static_cast<std::size_t>(cidx)]);
      const double ang = step * static_cast<double>((m * j) % static_cast<std::uint64_t>(N));
      A(r, cidx) = Complex{std::cos(ang), std::sin(ang)};
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > smax * 1e-10) ++rank;
  const long kernel_dim = static_cast<long>(cols - rank);
  if (kernel_dim <= 0)
    throw NoSolution("build_meyer[nullspace]: partial DFT matrix has trivial kernel");

  const std::vector<Complex> start = shaped_start(w, seed, forb_t);
  Eigen::VectorXcd t(cols);
  for (Eigen::Index i = 0; i < cols; ++i)
    t(i) = start[static_cast<std::size_t>(allowed[static_cast<std::size_t>(i)])];
  // project onto ker A: subtract the component in the row space span(V_r)
  const Eigen::MatrixXcd V = svd.matrixV().leftCols(rank);
  const Eigen::VectorXcd proj = t - V * (V.adjoint() * t);
  if (proj.norm() <= 1e-10 * t.norm())
    throw NoSolution("build_meyer[nullspace]: seeded start is orthogonal to the kernel; retry with a new seed");

  MeyerCoefficients mc;
  mc.M = w.M;
  mc.alpha = w.alpha;
  mc.tol = tol;
  mc.method = "nullspace";
  mc.seed = seed;
  mc.kernel_dim = kernel_dim;
  mc.c.assign(static_cast<std::size_t>(N), Complex{0.0, 0.0});
  for (Eigen::Index i = 0; i < cols; ++i)
    mc.c[static_cast<std::size_t>(allowed[static_cast<std::size_t>(i)])] = proj(i);
  mc.j_star = normalize_to_max(mc.c);
  return mc;
}

inline MeyerCoefficients build_alternating(const WindowSpec& w, std::uint64_t seed, double tol,
                                           long max_rounds) {
  const auto N = static_cast<std::size_t>(w.N());
  const std::vector<long> forb = forbidden_time_indices(w);
  std::vector<Complex> x = shaped_start(w, seed, forb);
  // Anderson extrapolation over the projection rounds removes the slow
  // near-kernel modes that make the plain iteration stall.
  const int depth = N > (1u << 17) ? 3 : 10;
  std::vector<std::vector<Complex>> hist_x, hist_g;
  long it = 0;
  double rf = 1.0;
  for (it = 0; it < max_rounds; ++it) {
    for (long j : forb) x[static_cast<std::size_t>(j)] = {0.0, 0.0};
    std::vector<Complex> xh = dft(x);
    const Residual r = freq_residual(xh, forb);
    rf = r.rel;
    if (rf <= tol) break;
    for (long m : forb) xh[static_cast<std::size_t>(m)] = {0.0, 0.0};
    std::vector<Complex> g = idft(std::move(xh));
    hist_x.push_back(x);
    hist_g.push_back(g);
    if (static_cast<int>(hist_x.size()) > depth) {
      hist_x.erase(hist_x.begin());
      hist_g.erase(hist_g.begin());
    }
    const std::size_t m = hist_x.size();
    if (m >= 3) {
      Eigen::MatrixXcd FtF(m, m);
      std::vector<std::vector<Complex>> diffs(m);
      for (std::size_t i = 0; i < m; ++i) {
        diffs[i].resize(N);
        for (std::size_t p = 0; p < N; ++p) diffs[i][p] = hist_g[i][p] - hist_x[i][p];
      }
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j2 = 0; j2 <= i; ++j2) {
          Complex acc = pairwise_sum<Complex>(0, N, [&](std::size_t p) {
            return std::conj(diffs[i][p]) * diffs[j2][p];
          });
          FtF(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j2)) = acc;
          FtF(static_cast<Eigen::Index>(j2), static_cast<Eigen::Index>(i)) = std::conj(acc);
        }
      const double reg = 1e-30 * std::abs(FtF.trace()) / static_cast<double>(m);
      Eigen::MatrixXcd reg_m = FtF + reg * Eigen::MatrixXcd::Identity(m, m);
      const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(m));
      const Eigen::VectorXcd y = reg_m.fullPivLu().solve(ones);
      const Complex ysum = y.sum();
      if (std::abs(ysum) > 1e-300 && y.allFinite()) {
        std::vector<Complex> xn(N, Complex{0.0, 0.0});
        for (std::size_t i = 0; i < m; ++i) {
          const Complex a = y(static_cast<Eigen::Index>(i)) / ysum;
          for (std::size_t p = 0; p < N; ++p) xn[p] += a * hist_g[i][p];
        }
        x = std::move(xn);
        continue;
      }
    }
    x = std::move(g);
  }
  if (rf > tol)
    throw NoSolution("build_meyer[alternating_projection]: frequency residual stalled at " +
                     std::to_string(rf) + " after " + std::to_string(it) +
                     " rounds; retry with a new seed");
  MeyerCoefficients mc;
  mc.M = w.M;
  mc.alpha = w.alpha;
  mc.tol = tol;
  mc.method = "alternating_projection";
  mc.seed = seed;
  mc.iterations = it + 1;
  mc.c = std::move(x);
  mc.j_star = normalize_to_max(mc.c);
  return mc;
}

}  // namespace detail

// Residual certificate for a coefficient vector against its window spec.
// Throws CertificateFailure (with the offending index) when it does not hold.
inline MeyerCertificate verify_meyer(const MeyerCoefficients& mc, const WindowSpec& w,
                                     double tol) {
  if (mc.M != w.M || static_cast<long>(mc.c.size()) != w.N())
    throw CertificateFailure("verify_meyer: coefficient vector does not match window spec");
  MeyerCertificate cert;
  const std::vector<long> forb_t = forbidden_time_indices(w);
  for (long j : forb_t) {
    const double a = std::abs(mc.c[static_cast<std::size_t>(j)]);
    if (a > cert.time_residual) {
      cert.time_residual = a;
      cert.worst_time_index = j;
    }
  }
  if (cert.time_residual != 0.0)
    throw CertificateFailure("verify_meyer: nonzero coefficient at forbidden time index " +
                             std::to_string(cert.worst_time_index));
  const std::vector<long> forb_f = forbidden_freq_indices(w);
  const std::vector<Complex> chat = dft(mc.c);
  const detail::Residual r = detail::freq_residual(chat, forb_f);
  cert.freq_residual = r.rel;
  cert.worst_freq_index = r.worst;
  cert.max_freq_abs = r.max_abs;
  if (cert.freq_residual > tol)
    throw CertificateFailure(
        "verify_meyer: frequency residual " + std::to_string(cert.freq_residual) +
        " above tolerance at forbidden frequency index " + std::to_string(cert.worst_freq_index));
  if (mc.j_star < 0 || mc.j_star >= static_cast<long>(mc.c.size()) ||
      mc.c[static_cast<std::size_t>(mc.j_star)] != Complex{1.0, 0.0})
    throw CertificateFailure("verify_meyer: c[j_star] != 1");
  double maxabs = 0.0;
  for (const Complex& z : mc.c) maxabs = std::max(maxabs, std::abs(z));
  if (maxabs > 1.0 + 8e-16)
    throw CertificateFailure("verify_meyer: max |c_j| exceeds 1 beyond rounding");
  cert.j_star_is_one = true;
  return cert;
}

// Constructive substitute for the cited existence lemma: a coefficient vector
// with exact zeros on the forbidden time window and a certified frequency
// residual, normalized so c[j_star] = 1.
inline MeyerCoefficients build_meyer(const WindowSpec& w, MeyerMethod method, std::uint64_t seed,
                                     double tol, long max_rounds = 100000) {
  const std::vector<long> forb_t = forbidden_time_indices(w);
  const std::vector<long> forb_f = forbidden_freq_indices(w);
  if (static_cast<long>(forb_t.size() + forb_f.size()) >= w.N())
    throw InfeasibleWindow("build_meyer: forbidden windows leave no room for a nonzero vector ("
                           + std::to_string(forb_t.size()) + " + " + std::to_string(forb_f.size()) +
                           " >= " + std::to_string(w.N()) + ")");
  MeyerCoefficients mc = method == MeyerMethod::nullspace
                             ? detail::build_nullspace(w, seed, tol)
                             : detail::build_alternating(w, seed, tol, max_rounds);
  mc.cert = verify_meyer(mc, w, tol);
  return mc;
}

// ---------------------------------------------------------------------------
// Measure views.

// sigma^h * s as a lattice measure (space side).
inline PeriodicLatticeMeasure lattice_measure(const MeyerCoefficients& mc, const Rational& h,
                                              Complex s) {
  return {mc.M, make_coeffs(mc.c), h, s};
}

// Fourier transform of (sigma^h * s): period M on the frequency lattice,
//   sigma_hat = (s/M) sum_m chat_{m mod M^2} e^{-2 pi i h (m/M)} delta_{m/M},
// realized with coefficients (s/M) chat_j e^{-2 pi i h j / M} and period
// ramp theta = frac(h M).  Forbidden-window coefficients already below the
// vector's certificate tolerance are snapped to exact zero: the constructed
// measure is the certified one, so the spectral gap holds as a measure-level
// fact.  Above-tolerance window mass is kept and surfaces in the gap checks.
inline PeriodicLatticeMeasure fourier_side_measure(const MeyerCoefficients& mc, const Rational& h,
                                                   Complex s) {
  const WindowSpec w(mc.M, mc.alpha);
  std::vector<Complex> chat = dft(mc.c);
  const std::vector<long> forb_f = forbidden_freq_indices(w);
  const detail::Residual r = detail::freq_residual(chat, forb_f);
  for (long m : forb_f)
    if (std::abs(chat[static_cast<std::size_t>(m)]) <= mc.tol * r.max_abs)
      chat[static_cast<std::size_t>(m)] = {0.0, 0.0};
  const Complex s_over_M = s / static_cast<double>(mc.M);
  const Rational hM = h * Rational(mc.M);
  // phase e^{-2 pi i h j / M}: with h/M = a/b the fractional part of a j / b
  // advances by an exact integer recurrence, no per-entry gcd
  const Rational h_over_M = h / Rational(mc.M);
  const BigInt b = h_over_M.denominator();
  BigInt step = h_over_M.numerator() % b;
  if (step < 0) step += b;
  const double b_d = b.convert_to<double>();
  std::vector<Complex> coeffs(chat.size());
  BigInt racc = 0;
  for (std::size_t j = 0; j < chat.size(); ++j) {
    if (chat[j] != Complex{0.0, 0.0}) {
      Complex ph;
      if (racc == 0) ph = {1.0, 0.0};
      else {
        const double ang = -6.283185307179586477 * (racc.convert_to<double>() / b_d);
        ph = {std::cos(ang), std::sin(ang)};
        const BigInt r4 = racc * 4;
        if (r4 == b) ph = {0.0, -1.0};
        else if (r4 == b * 2) ph = {-1.0, 0.0};
        else if (r4 == b * 3) ph = {0.0, 1.0};
      }
      coeffs[j] = s_over_M * chat[j] * ph;
    }
    racc += step;
    if (racc >= b) racc -= b;
  }
  return {mc.M, make_coeffs(std::move(coeffs)), Rational(0), Complex{1.0, 0.0}, hM.frac()};
}

}  // namespace gapcomb
