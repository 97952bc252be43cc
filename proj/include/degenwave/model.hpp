#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "degenwave/error.hpp"
#include "degenwave/fracdiff.hpp"

namespace degenwave::model {

class DegeneracyError : public DomainError {
 public:
  using DomainError::DomainError;
};

class DivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum class ProfileKind { power, oscillating, tabulated };

/// Diffusion coefficient a(x) on (0,1].
///   power:       a = x^gamma
///   oscillating: a = x^w (1 + cos^2(theta ln x))
///   tabulated:   cubic Hermite through (x_i, a_i, a'_i); below the first
///                sample a is continued as the matching power law.
class DegeneracyProfile {
 public:
  static DegeneracyProfile power(double gamma);
  static DegeneracyProfile oscillating(double w, double theta);
  static DegeneracyProfile tabulated(std::vector<double> x, std::vector<double> a,
                                     std::vector<double> da);

  ProfileKind kind() const { return kind_; }
  /// Exponent of the leading power (gamma or w); tabulated: the one used
  /// for the continuation to 0.
  double exponent() const { return exponent_; }
  double theta() const { return theta_; }

  double a(double x) const;
  double da(double x) const;
  /// x a'(x) / a(x)
  double log_slope(double x) const;

  const std::vector<double>& table_x() const { return tx_; }
  const std::vector<double>& table_a() const { return ta_; }
  const std::vector<double>& table_da() const { return tda_; }

 private:
  ProfileKind kind_ = ProfileKind::power;
  double exponent_ = 0.0;
  double theta_ = 0.0;
  std::vector<double> tx_, ta_, tda_;
  double head_scale_ = 1.0;
};

enum class Regime { dirichlet_at_0, weighted_neumann_at_0 };

const char* to_string(Regime r);
Regime regime_for(double m_a);

struct ProblemConfig {
  DegeneracyProfile profile = DegeneracyProfile::power(0.5);
  double alpha = 0.1;
  double beta = 1.0;
  fracdiff::FractionalKernel kernel{};
  /// When set, must agree with regime_for(m_a).
  std::optional<Regime> regime;
  /// Downgrades the coercivity rule to a warning (used for the deliberately
  /// non-coercive contrast run).
  bool allow_noncoercive = false;

  Regime effective_regime() const;
};

/// sup x|a'|/a. Exact for the power kind, dense sampling in ln x otherwise.
/// Throws DegeneracyError when the value is >= 2.
double measure_degeneracy(const DegeneracyProfile& profile);

/// Same supremum without the admissibility check.
double degeneracy_sup(const DegeneracyProfile& profile);

/// int_0^1 f(x) dx for f(x) ~ x^{p-1} near 0 (p > 0): Gauss-Legendre panels in
/// s = ln x, truncated where x^p falls below machine precision.
double integrate_singular(const std::function<double(double)>& f, double p);

/// C* = int_0^1 ds / a(s). Throws DivergenceError when m_a >= 1.
double poincare_constant(const DegeneracyProfile& profile);

/// int_0^1 s / a(s) ds, finite for m_a < 2.
double trace_constant(const DegeneracyProfile& profile);

/// Constant c with |alpha| c < 1 required for coercivity.
/// m_a < 1: C*. m_a >= 1: sqrt(C_u C_v) with C_v = int s/a and
/// C_u = max(2/beta, 2 C_v).
double coercivity_constant(const ProblemConfig& config);

enum class Severity { error, warning };

struct Violation {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> items;
  double m_a = 0.0;
  double coercivity_constant = 0.0;  // NaN when not computable

  bool ok() const;
  std::vector<Violation> errors() const;
};

ValidationResult validate(const ProblemConfig& config);

/// nu_gamma = |1 - gamma| / (2 - gamma)
double nu_gamma(double gamma);

struct ConditionCPair {
  int k = 0;
  int m = 0;
  double alpha_km = 0.0;
};

struct ConditionCResult {
  bool exact = true;  // no pair within tolerance
  std::vector<ConditionCPair> violations;
};

constexpr double kConditionCTolerance = 1e-9;

/// alpha_{k,m} = (1/2)((2 - gamma)/2)^2 (j_{nu,k}^2 - j_{nu,m}^2) for k, m <= K;
/// pairs with |alpha - alpha_{k,m}| <= tol are reported.
ConditionCResult check_condition_C(double alpha, double gamma, int K,
                                   double tol = kConditionCTolerance);

/// Default mesh grading 2/(2 - m_a), clamped to [1, 4].
double default_grading(double m_a);

}  // namespace degenwave::model
