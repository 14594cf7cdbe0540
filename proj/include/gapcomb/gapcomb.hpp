#pragma once

// Dirac combs with two-sided spectral gaps and the crystalline measure
// assembled from them, with runtime certificates for every inequality the
// construction rests on.

#include "gapcomb/errors.hpp"
#include "gapcomb/numeric.hpp"
#include "gapcomb/rational.hpp"
#include "gapcomb/fft.hpp"
#include "gapcomb/schwartz.hpp"
#include "gapcomb/measure.hpp"
#include "gapcomb/meyer.hpp"
#include "gapcomb/construction.hpp"
#include "gapcomb/verify.hpp"
#include "gapcomb/io.hpp"
