#pragma once

// Shared expensive fixtures, built once per test binary.

#include "gapcomb/construction.hpp"
#include "gapcomb/meyer.hpp"

namespace fixtures {

// Certified gap vector for M = 32, alpha = 1/8 (nullspace route).
inline const gapcomb::MeyerCoefficients& sigma32() {
  static const gapcomb::MeyerCoefficients mc = gapcomb::build_meyer(
      gapcomb::WindowSpec(32, gapcomb::Rational(1, 8)), gapcomb::MeyerMethod::nullspace, 1, 1e-9);
  return mc;
}

// The default two-level desk-scale build.
inline const gapcomb::AssembledMeasure& default_build() {
  static const gapcomb::AssembledMeasure fm = gapcomb::assemble(gapcomb::BuildConfig{});
  return fm;
}

// A cheap single-level build (M = 32 only).
inline const gapcomb::AssembledMeasure& single_level_build() {
  static const gapcomb::AssembledMeasure fm = [] {
    gapcomb::BuildConfig cfg;
    cfg.n_hi = 1;
    return gapcomb::assemble(cfg);
  }();
  return fm;
}

}  // namespace fixtures
