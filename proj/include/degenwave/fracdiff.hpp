#pragma once

#include <complex>
#include <vector>

#include "degenwave/error.hpp"

namespace degenwave::fracdiff {

using cplx = std::complex<double>;

/// Order tau in (0,1], exponential shift omega >= 0, gain rho.
struct FractionalKernel {
  double tau = 0.5;
  double omega = 1.0;
  double rho = 1.0;

  /// rho sin(tau pi)/pi; zero at tau = 1, where the damper acts as rho u_t.
  double zeta() const;
  bool is_direct() const { return tau == 1.0; }
};

struct DiffusiveQuadrature {
  std::vector<double> nodes;    // sigma_j > 0, geometric
  std::vector<double> weights;  // w_j, already doubled for the symmetric integral
  std::vector<double> theta;    // theta(sigma_j, tau), cached
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double certified_error = 0.0;  // worst resolvent error at lambda in {0, 1, 10i}

  std::size_t size() const { return nodes.size(); }
};

struct DiffusiveState {
  std::vector<double> phi;
  double time = 0.0;
};

class QuadratureValidationError : public Error {
 public:
  QuadratureValidationError(const std::string& msg, double achieved)
      : Error(msg), achieved_error(achieved) {}
  double achieved_error;
};

constexpr double kDefaultTolerance = 1e-6;
constexpr int kDefaultNodes = 200;
constexpr double kDefaultSigmaMin = 1e-4;
constexpr double kDefaultSigmaMax = 1e4;

/// |sigma|^{(2 tau - 1)/2}
double theta(double sigma, double tau);

/// Ladder and weights without the a posteriori check. Nodes sit at the
/// log-midpoints of M equal cells in ln(sigma); the two end weights also
/// absorb the geometric tails of the ladder beyond the range.
DiffusiveQuadrature make_quadrature(const FractionalKernel& kernel, int M, double sigma_min,
                                    double sigma_max);

/// make_quadrature followed by validation. Throws QuadratureValidationError
/// when the worst resolvent error exceeds tol.
DiffusiveQuadrature build_quadrature(const FractionalKernel& kernel, int M = kDefaultNodes,
                                     double sigma_min = kDefaultSigmaMin,
                                     double sigma_max = kDefaultSigmaMax,
                                     double tol = kDefaultTolerance);

/// sum_j w_j theta_j^2 / (lambda + omega + sigma_j^2). Throws DomainError on
/// the cut lambda in (-inf, -omega].
cplx resolvent_weight(const FractionalKernel& kernel, const DiffusiveQuadrature& quad, cplx lambda);

/// pi/sin(tau pi) (lambda + omega)^{tau - 1}, principal branch.
cplx resolvent_exact(const FractionalKernel& kernel, cplx lambda);

/// Largest relative resolvent error over lambda in {0, 1, 10i}. The point
/// lambda = 0 is skipped when omega = 0 (branch point).
double resolvent_error(const FractionalKernel& kernel, const DiffusiveQuadrature& quad);

DiffusiveState zero_state(const DiffusiveQuadrature& quad);

/// Exact exponential update of every node with the input U held constant.
DiffusiveState step_diffusive(const DiffusiveState& state, const DiffusiveQuadrature& quad,
                              const FractionalKernel& kernel, double input, double dt);

/// (sin tau pi / pi) sum_j w_j theta_j phi_j, which approximates I^{1-tau,omega} U.
double output(const DiffusiveState& state, const DiffusiveQuadrature& quad,
              const FractionalKernel& kernel);

/// zeta sum_j w_j (sigma_j^2 + omega) phi_j^2
double dissipation_rate(const DiffusiveState& state, const DiffusiveQuadrature& quad,
                        const FractionalKernel& kernel);

/// Per-node constants of one step of length dt, shared with the coupled
/// integrator: decay e_j = exp(-h_j), gain c_j = (1 - e_j)/(sigma_j^2 + omega)
/// and the stage weight used to evaluate the force inside the step.
struct StepCoefficients {
  double dt = 0.0;
  std::vector<double> decay;
  std::vector<double> gain;
  std::vector<double> stage;
};

StepCoefficients step_coefficients(const DiffusiveQuadrature& quad, const FractionalKernel& kernel,
                                   double dt);

/// Stage weight theta(h) = [(1 + k) - sqrt(2 k (1 + e^{-h}))]/h, k = h/(1 - e^{-h}).
/// Evaluating the force at theta*new + (1 - theta)*old turns each node's
/// energy exchange over the step into a negative perfect square.
double stage_weight(double h);

/// Riemann-Liouville type integral (1/Gamma(1-tau)) int_0^t (t-s)^{-tau}
/// e^{-omega (t-s)} U(s) ds on a uniform grid, by product integration of the
/// piecewise-linear interpolant of e^{omega s} U(s) against the exact kernel
/// moments. Needs at least 4 samples.
std::vector<double> fractional_integral_direct(const std::vector<double>& u, double dt, double tau,
                                               double omega);

/// Generalized Caputo derivative of samples g: the integral above applied to
/// g', where g' comes from second-order finite differences.
std::vector<double> caputo_direct(const std::vector<double>& g, double dt, double tau,
                                  double omega);

}  // namespace degenwave::fracdiff
