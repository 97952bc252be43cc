#include "degenwave/fracdiff.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "degenwave/specfun.hpp"

namespace degenwave::fracdiff {

namespace {
constexpr double kPi = std::numbers::pi;
}

double FractionalKernel::zeta() const {
  if (tau >= 1.0) return 0.0;
  return rho * std::sin(tau * kPi) / kPi;
}

double theta(double sigma, double tau) { return std::pow(std::abs(sigma), (2.0 * tau - 1.0) / 2.0); }

DiffusiveQuadrature make_quadrature(const FractionalKernel& kernel, int M, double sigma_min,
                                    double sigma_max) {
  if (M < 8) throw DomainError("quadrature needs at least 8 nodes");
  if (!(kernel.tau > 0.0 && kernel.tau < 1.0)) {
    throw DomainError("diffusive quadrature needs tau in (0, 1); tau = 1 acts directly");
  }
  if (!(sigma_min > 0.0 && sigma_min < sigma_max)) {
    throw DomainError("quadrature range must satisfy 0 < sigma_min < sigma_max");
  }
  DiffusiveQuadrature q;
  q.sigma_min = sigma_min;
  q.sigma_max = sigma_max;
  const double h = std::log(sigma_max / sigma_min) / M;
  q.nodes.resize(M);
  q.weights.resize(M);
  q.theta.resize(M);
  for (int j = 0; j < M; ++j) {
    const double s = sigma_min * std::exp((j + 0.5) * h);
    q.nodes[j] = s;
    q.weights[j] = 2.0 * h * s;  // d sigma = sigma d(ln sigma), doubled for sigma < 0
    q.theta[j] = theta(s, kernel.tau);
  }
  // Below the range the integrand behaves like sigma^{2 tau}, above it like
  // sigma^{2 tau - 2}; continuing the ladder to infinity sums a geometric
  // series that lands on the end weights.
  if (kernel.tau < 1.0) {
    q.weights.front() /= -std::expm1(-2.0 * kernel.tau * h);
    q.weights.back() /= -std::expm1(-(2.0 - 2.0 * kernel.tau) * h);
  }
  return q;
}

DiffusiveQuadrature build_quadrature(const FractionalKernel& kernel, int M, double sigma_min,
                                     double sigma_max, double tol) {
  DiffusiveQuadrature q = make_quadrature(kernel, M, sigma_min, sigma_max);
  q.certified_error = resolvent_error(kernel, q);
  if (!(q.certified_error <= tol)) {
    throw QuadratureValidationError("diffusive quadrature failed validation: resolvent error " +
                                        std::to_string(q.certified_error) + " > " +
                                        std::to_string(tol),
                                    q.certified_error);
  }
  return q;
}

namespace {
void check_branch(const FractionalKernel& kernel, cplx lambda) {
  const cplx s = lambda + kernel.omega;
  if (s.imag() == 0.0 && s.real() <= 0.0) {
    throw DomainError("resolvent: lambda on the cut (-inf, -omega]");
  }
}
}  // namespace

cplx resolvent_weight(const FractionalKernel& kernel, const DiffusiveQuadrature& quad, cplx lambda) {
  check_branch(kernel, lambda);
  cplx sum = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const double s = quad.nodes[j];
    sum += quad.weights[j] * quad.theta[j] * quad.theta[j] / (lambda + kernel.omega + s * s);
  }
  return sum;
}

cplx resolvent_exact(const FractionalKernel& kernel, cplx lambda) {
  check_branch(kernel, lambda);
  return kPi / std::sin(kernel.tau * kPi) * std::pow(lambda + kernel.omega, kernel.tau - 1.0);
}

double resolvent_error(const FractionalKernel& kernel, const DiffusiveQuadrature& quad) {
  double worst = 0.0;
  for (cplx lambda : {cplx(0.0), cplx(1.0), cplx(0.0, 10.0)}) {
    if (kernel.omega == 0.0 && lambda == cplx(0.0)) continue;
    const cplx exact = resolvent_exact(kernel, lambda);
    worst = std::max(worst, std::abs(resolvent_weight(kernel, quad, lambda) - exact) / std::abs(exact));
  }
  return worst;
}

DiffusiveState zero_state(const DiffusiveQuadrature& quad) {
  return DiffusiveState{std::vector<double>(quad.size(), 0.0), 0.0};
}

DiffusiveState step_diffusive(const DiffusiveState& state, const DiffusiveQuadrature& quad,
                              const FractionalKernel& kernel, double input, double dt) {
  if (!(dt > 0.0)) throw DomainError("step_diffusive: dt must be positive");
  DiffusiveState next = state;
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const double rate = quad.nodes[j] * quad.nodes[j] + kernel.omega;
    const double e = std::exp(-rate * dt);
    const double gain = -std::expm1(-rate * dt) / rate;
    next.phi[j] = e * state.phi[j] + gain * input * quad.theta[j];
  }
  next.time = state.time + dt;
  return next;
}

double output(const DiffusiveState& state, const DiffusiveQuadrature& quad,
              const FractionalKernel& kernel) {
  double sum = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j) sum += quad.weights[j] * quad.theta[j] * state.phi[j];
  return std::sin(kernel.tau * kPi) / kPi * sum;
}

double dissipation_rate(const DiffusiveState& state, const DiffusiveQuadrature& quad,
                        const FractionalKernel& kernel) {
  double sum = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const double s = quad.nodes[j];
    sum += quad.weights[j] * (s * s + kernel.omega) * state.phi[j] * state.phi[j];
  }
  return kernel.zeta() * sum;
}

double stage_weight(double h) {
  if (!(h > 0.0)) throw DomainError("stage_weight: h must be positive");
  if (h < 0.05) {
    // the closed form cancels badly here
    const double h3 = h * h * h;
    return 0.5 + h3 / 576.0 - h3 * h * h / 7680.0;
  }
  const double one_minus_e = -std::expm1(-h);
  const double kappa = h / one_minus_e;
  const double e = std::exp(-h);
  return ((1.0 + kappa) - std::sqrt(2.0 * kappa * (1.0 + e))) / h;
}

StepCoefficients step_coefficients(const DiffusiveQuadrature& quad, const FractionalKernel& kernel,
                                   double dt) {
  StepCoefficients c;
  c.dt = dt;
  const std::size_t m = quad.size();
  c.decay.resize(m);
  c.gain.resize(m);
  c.stage.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double rate = quad.nodes[j] * quad.nodes[j] + kernel.omega;
    const double h = rate * std::abs(dt);
    c.decay[j] = std::exp(-h);
    c.gain[j] = -std::expm1(-h) / rate;
    c.stage[j] = stage_weight(h);
  }
  return c;
}

std::vector<double> fractional_integral_direct(const std::vector<double>& u, double dt, double tau,
                                               double omega) {
  const std::size_t n = u.size();
  if (n < 4) throw DomainError("fractional integral oracle needs at least 4 samples");
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("fractional integral oracle needs tau in (0,1)");
  const double a = 1.0 - tau;  // order of the integral
  const double scale = std::pow(dt, a) / specfun::gamma(a);
  // Cell j covers t - s in [(j-1) dt, j dt]; in units of dt the kernel
  // moments are I0 = int s^{-tau}, I1 = int s^{1-tau}.
  std::vector<double> p(n), q(n), decay(n);
  for (std::size_t j = 1; j < n; ++j) {
    const double lo = static_cast<double>(j - 1);
    const double hi = static_cast<double>(j);
    const double i0 = (std::pow(hi, a) - std::pow(lo, a)) / a;
    const double i1 = (std::pow(hi, a + 1.0) - std::pow(lo, a + 1.0)) / (a + 1.0);
    q[j] = hi * i0 - i1;  // weight of the cell's right sample
    p[j] = i0 - q[j];     // weight of the cell's left sample
  }
  for (std::size_t j = 0; j < n; ++j) decay[j] = std::exp(-omega * dt * static_cast<double>(j));
  std::vector<double> out(n, 0.0);
  for (std::size_t m = 1; m < n; ++m) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t j = m - k;
      sum += p[j] * decay[j] * u[k] + q[j] * decay[j - 1] * u[k + 1];
    }
    out[m] = scale * sum;
  }
  return out;
}

std::vector<double> caputo_direct(const std::vector<double>& g, double dt, double tau,
                                  double omega) {
  const std::size_t n = g.size();
  if (n < 4) throw DomainError("caputo oracle needs at least 4 samples");
  std::vector<double> d(n);
  d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * dt);
  d[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * dt);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (g[i + 1] - g[i - 1]) / (2.0 * dt);
  return fractional_integral_direct(d, dt, tau, omega);
}

}  // namespace degenwave::fracdiff
