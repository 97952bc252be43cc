#pragma once

#include <complex>

#include "degenwave/error.hpp"

namespace degenwave::specfun {

using cplx = std::complex<double>;

class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum class BesselMethod { series, asymptotic };

struct BesselEval {
  double order = 0.0;
  cplx argument{};
  cplx value{};
  BesselMethod method = BesselMethod::series;
};

/// Gamma function by a Lanczos approximation (g = 7), with the reflection
/// formula for Re z < 1/2. Throws PoleError at nonpositive integers.
cplx gamma(cplx z);
double gamma(double x);

/// |z| at which bessel_j switches from the power series to the Hankel
/// asymptotic series.
double bessel_crossover(double nu);

/// Entire normalization Jhat_nu(z) = (z/2)^{-nu} J_nu(z)
///   = sum_m (-z^2/4)^m / (m! Gamma(m + nu + 1)).
/// Depends on z only through z^2, so it has no branch cut. nu >= -1.
cplx bessel_j_scaled(double nu, cplx z);

/// J_nu(z) on the principal branch, nu >= -1, |arg z| < pi.
/// Throws DomainError on the cut arg z = pi.
cplx bessel_j(double nu, cplx z);

/// Same value as bessel_j, but evaluates the requested branch explicitly
/// and reports which one was used. Both are valid for every z; the
/// split exists so the overlap between them can be checked.
BesselEval bessel_j_series(double nu, cplx z);
BesselEval bessel_j_asymptotic(double nu, cplx z);
BesselEval bessel_j_eval(double nu, cplx z);

/// J'_nu(z) = (nu/z) J_nu(z) - J_{nu+1}(z). Throws DomainError at z = 0.
cplx bessel_j_prime(double nu, cplx z);

/// k-th positive zero of J_nu (nu >= -1/2 recommended, k >= 1): McMahon
/// guess refined by Newton, safeguarded by bisection inside a bracket.
double bessel_zero(double nu, int k);

}  // namespace degenwave::specfun
