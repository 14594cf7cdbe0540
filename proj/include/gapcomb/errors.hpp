#pragma once

#include <stdexcept>
#include <string>

namespace gapcomb {

// Base class for all library failures.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// The forbidden windows leave no room for a nonzero coefficient vector.
struct InfeasibleWindow : Error {
  using Error::Error;
};

// Iterative construction stalled above tolerance.
struct NoSolution : Error {
  using Error::Error;
};

// A runtime certificate did not hold; message carries the offending datum.
struct CertificateFailure : Error {
  using Error::Error;
};

// tau schedule violates tau_n < 1/(4 M_n).
struct ScheduleInfeasible : Error {
  using Error::Error;
};

// Placement scan exhausted all candidate subintervals.
struct NoAdmissibleSubinterval : Error {
  using Error::Error;
};

// Test-function levels do not match the built measure's levels.
struct MismatchedLevels : Error {
  using Error::Error;
};

// A tail bound was requested from a function without a decay certificate.
struct NoDecayCertificate : Error {
  using Error::Error;
};

struct EmptyInterval : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

}  // namespace gapcomb
