#pragma once

#include <stdexcept>
#include <string>

namespace blochwave {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lattice basis vectors are (numerically) linearly dependent.
struct SingularBasis : Error {
  using Error::Error;
};

// A potential Fourier coefficient cannot be reached by any difference of
// plane-wave basis vectors; the Hamiltonian would silently lose it.
struct CutoffTooSmall : Error {
  using Error::Error;
};

// Requested band has a neighboring eigenvalue within the degeneracy
// tolerance; group velocities and deflated solves are refused there.
struct DegenerateBand : Error {
  using Error::Error;
};

// (k,E) is within the resolvent tolerance of the spectrum; the
// non-resonant (Case I) solve does not apply.
struct NearResonance : Error {
  using Error::Error;
};

// Tuple enumeration would exceed the configured budget.
struct BudgetExceeded : Error {
  using Error::Error;
};

// Quadrature grid too coarse for the plane-wave content of an integrand.
struct ResolutionTooLow : Error {
  using Error::Error;
};

// Sign pattern required by the intermediate-value search did not appear.
struct SignSearchFailed : Error {
  using Error::Error;
};

// A field sample became NaN/Inf during time stepping (divergence indicator).
struct NonFiniteField : Error {
  using Error::Error;
};

// Microscopic cells or mode wavenumbers do not tile the requested box.
struct GridIncommensurate : Error {
  using Error::Error;
};

// Malformed configuration input.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace blochwave
