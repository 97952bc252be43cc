#pragma once

#include <complex>
#include <string>
#include <vector>

#include "degenwave/discretize.hpp"
#include "degenwave/model.hpp"

namespace degenwave::spectrum {

using cplx = std::complex<double>;

class CountMismatchError : public Error {
 public:
  CountMismatchError(const std::string& what, double im_lo, double im_hi, int counted, int found)
      : Error(what), im_lo(im_lo), im_hi(im_hi), counted(counted), found(found) {}
  double im_lo, im_hi;
  int counted, found;
};

class ContourError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Derived symbols for a = x^gamma.
struct CharacteristicParams {
  double gamma = 0.0;
  double r = 1.0;           // 2/(2 - gamma)
  double nu = 0.5;          // |1 - gamma|/(2 - gamma)
  double beta_tilde = 0.0;  // beta + max(0, 1 - gamma)
  double a1 = 0.0, a1t = 0.0, a2 = 0.0, a2t = 0.0;  // McMahon constants at nu and nu + 1
  double ell = 0.0;         // ln sqrt(|rho - 1|/(rho + 1)); NaN when rho = 1
  double beta = 0.0, alpha = 0.0;
  fracdiff::FractionalKernel kernel;
};

CharacteristicParams characteristic_params(const model::ProblemConfig& config);

/// beta + rho lambda (lambda + omega)^{tau-1} (rho lambda at tau = 1), principal branch.
/// Throws DomainError on the cut (-inf, -omega].
cplx boundary_symbol(const fracdiff::FractionalKernel& kernel, double beta, cplx lambda);

/// Characteristic function with principal branches:
///   f = 2(bt + B_d) J(c)J(ct) - i lt J'(c)J(ct) - i ltt J'(ct)J(c),
/// J = J_nu, J' = J_{nu+1}, c = r i lt, ct = r i ltt, lt = sqrt(l^2 + a), ltt = sqrt(l^2 - a).
/// Evaluated as (c/2)^nu (ct/2)^nu f_hat so it never overflows.
cplx char_f(cplx lambda, const model::ProblemConfig& config);

/// Entire part of f: the same expression with J replaced by (z/2)^{-nu} J_nu.
/// Zeros coincide with those of f off the imaginary axis.
cplx char_f_regularized(cplx lambda, const CharacteristicParams& p);
cplx char_f_regularized(cplx lambda, const model::ProblemConfig& config);

/// Size of f_hat expected from the large-argument behaviour of the Bessel
/// factors. Residuals are measured relative to it.
double envelope(cplx lambda, const CharacteristicParams& p);

struct ShootingOptions {
  double epsilon = 1e-6;
  double tolerance = 1e-13;
};

struct ShootingValue {
  cplx value;       // 2 B Phi Psi + W_Phi Psi + Phi W_Psi
  double magnitude; // sum of the moduli of the three terms
};

/// Boundary determinant from integrating (a phi')' = (lambda^2 +- alpha) phi
/// from x = epsilon to 1 for a general profile. Phi is the regular solution
/// normalized as phi ~ int_0^x 1/a (Dirichlet regime) or phi ~ 1 (Neumann).
ShootingValue char_f_shooting(cplx lambda, const model::ProblemConfig& config,
                              const ShootingOptions& options = {});

/// For a = x^gamma, char_f_shooting = shooting_scale^2 * char_f_regularized.
double shooting_scale(const CharacteristicParams& p, model::Regime regime);

enum class SeedVariant {
  as_stated,  // offsets and constants exactly as in the published expansion
  corrected,  // offsets matching the McMahon zeros of J_nu and J_{nu+1}
};

/// Large-k eigenvalue approximation for family 1 (damper-driven) or
/// family 2 (coupling-driven). k >= 10. Throws DomainError for the tau = 1,
/// rho = 1 family-1 case, where the logarithm is undefined.
cplx asymptotic_seed(int family, int k, const model::ProblemConfig& config,
                     SeedVariant variant = SeedVariant::as_stated);

struct NamedConstant {
  std::string label;
  double value = 0.0;
};

/// The two competing evaluations of the family-1 real-part constant
/// (labels "r^-tau" and "r^+tau").
std::vector<NamedConstant> beta1_candidates(const model::ProblemConfig& config);
/// The two competing evaluations of the family-2 constant
/// (labels "r^(4-tau)" and "r^(4+tau)").
std::vector<NamedConstant> beta2_candidates(const model::ProblemConfig& config);
/// rho r^3 alpha^2 / (4 pi^2): limit of k^2 |Re lambda_{2,k}| at tau = 1.
double upsilon(const model::ProblemConfig& config);

/// Exponent p with Re lambda_{family,k} ~ k^{-p}: 1 - tau or 3 - tau.
double trend_exponent(int family, double tau);

/// alpha_0 = 5 max(|beta_1|, |ell|/r at tau = 1).
double strip_halfwidth(const model::ProblemConfig& config);

enum class Method { closed, shooting };

struct RefineOptions {
  Method method = Method::closed;
  double accept = 1e-10;  // |f| / envelope
  int max_iterations = 60;
  double max_step = 0.0;  // 0: a quarter of the root spacing
  ShootingOptions shooting;
};

struct Refined {
  cplx lambda;
  double residual = 0.0;  // |f| / envelope at lambda
  int iterations = 0;
};

/// Damped Newton with a central-difference derivative. Throws
/// ConvergenceError when a step leaves the basin of the seed or the
/// residual stalls, DomainError when the root has Re lambda > 1e-8.
Refined refine_root(cplx seed, const model::ProblemConfig& config, const RefineOptions& options = {});

struct Rect {
  double re_lo, re_hi, im_lo, im_hi;
};

/// Winding number of f_hat along the boundary of rect, by adaptive phase
/// tracking. Throws ContourError when |f_hat| nearly vanishes on the contour.
int count_roots(const Rect& rect, const model::ProblemConfig& config);

struct Eigenvalue {
  int family = 0;
  int k = 0;  // negative for the conjugate partner
  cplx lambda;
  double residual = 0.0;
  cplx seed;
  int iterations = 0;
};

struct WindowCount {
  int k = 0;
  Rect rect{};
  int counted = 0;
  int found = 0;
};

struct SpectrumResult {
  std::vector<Eigenvalue> roots;  // sorted by (family, k)
  std::vector<WindowCount> windows;
  double strip = 0.0;
};

struct SpectrumOptions {
  SeedVariant seeds = SeedVariant::corrected;
  bool include_conjugates = true;
  int threads = 0;  // 0: hardware concurrency
  RefineOptions refine;
};

/// Roots of both families for k in [k_min, k_max], with an argument-principle
/// count on every backbone period Im in (k + nu/2 -+ 1/2) pi / r. Throws
/// CountMismatchError when a window's count differs from the roots found in it.
SpectrumResult compute_spectrum(const model::ProblemConfig& config, int k_min, int k_max,
                                const SpectrumOptions& options = {});

struct WitnessResult {
  double mu = 0.0;     // discrete eigenvalue of the v problem
  double value = 0.0;  // ||(i sqrt(mu) - A_h) U_n||^2 in the energy norm
  double ratio = 0.0;  // value * 2 mu / alpha^2 (NaN for alpha = 0)
};

/// Applies the discrete generator to U_n = (0, 0, e_n/(i sqrt mu_n), e_n, 0)/sqrt 2.
WitnessResult exp_stability_witness(const model::ProblemConfig& config,
                                    const discretize::Mesh& mesh, int n);

}  // namespace degenwave::spectrum
