#include "degenwave/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "degenwave/specfun.hpp"

namespace degenwave::model {

namespace {

// 10-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 5> kGaussX = {0.1488743389816312, 0.4333953941292472,
                                           0.6794095682990244, 0.8650633666889845,
                                           0.9739065285171717};
constexpr std::array<double, 5> kGaussW = {0.2955242247147529, 0.2692667193099963,
                                           0.2190863625159820, 0.1494513491505806,
                                           0.0666713443086881};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

DegeneracyProfile DegeneracyProfile::power(double gamma) {
  if (!(gamma >= 0.0)) throw DegeneracyError("power profile needs gamma >= 0");
  DegeneracyProfile p;
  p.kind_ = ProfileKind::power;
  p.exponent_ = gamma;
  return p;
}

DegeneracyProfile DegeneracyProfile::oscillating(double w, double theta) {
  if (!(w >= 0.0) || !(theta > 0.0)) {
    throw DegeneracyError("oscillating profile needs w >= 0 and theta > 0");
  }
  DegeneracyProfile p;
  p.kind_ = ProfileKind::oscillating;
  p.exponent_ = w;
  p.theta_ = theta;
  return p;
}

DegeneracyProfile DegeneracyProfile::tabulated(std::vector<double> x, std::vector<double> a,
                                               std::vector<double> da) {
  if (x.size() < 2 || x.size() != a.size() || x.size() != da.size()) {
    throw DegeneracyError("tabulated profile needs matching x, a, a' columns (>= 2 rows)");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(a[i] > 0.0)) throw DegeneracyError("tabulated profile needs x > 0, a > 0");
    if (i > 0 && !(x[i] > x[i - 1])) throw DegeneracyError("tabulated x must increase");
  }
  if (std::abs(x.back() - 1.0) > 1e-12) throw DegeneracyError("tabulated profile must end at x = 1");
  DegeneracyProfile p;
  p.kind_ = ProfileKind::tabulated;
  p.exponent_ = x[0] * da[0] / a[0];
  if (!(p.exponent_ >= 0.0)) throw DegeneracyError("tabulated profile must not blow up at x = 0");
  p.head_scale_ = a[0] / std::pow(x[0], p.exponent_);
  p.tx_ = std::move(x);
  p.ta_ = std::move(a);
  p.tda_ = std::move(da);
  return p;
}

double DegeneracyProfile::a(double x) const {
  switch (kind_) {
    case ProfileKind::power:
      return exponent_ == 0.0 ? 1.0 : std::pow(x, exponent_);
    case ProfileKind::oscillating: {
      const double c = std::cos(theta_ * std::log(x));
      return std::pow(x, exponent_) * (1.0 + c * c);
    }
    case ProfileKind::tabulated: {
      if (x <= tx_.front()) return head_scale_ * std::pow(x, exponent_);
      const auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
      const std::size_t i = std::min<std::size_t>(it - tx_.begin(), tx_.size() - 1) - 1;
      const double h = tx_[i + 1] - tx_[i];
      const double t = (x - tx_[i]) / h;
      const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
      const double h10 = t * (1 - t) * (1 - t);
      const double h01 = t * t * (3 - 2 * t);
      const double h11 = t * t * (t - 1);
      return h00 * ta_[i] + h10 * h * tda_[i] + h01 * ta_[i + 1] + h11 * h * tda_[i + 1];
    }
  }
  return 0.0;
}

double DegeneracyProfile::da(double x) const {
  switch (kind_) {
    case ProfileKind::power:
      return exponent_ == 0.0 ? 0.0 : exponent_ * std::pow(x, exponent_ - 1.0);
    case ProfileKind::oscillating:
      return a(x) * log_slope(x) / x;
    case ProfileKind::tabulated: {
      if (x <= tx_.front()) return exponent_ * head_scale_ * std::pow(x, exponent_ - 1.0);
      const auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
      const std::size_t i = std::min<std::size_t>(it - tx_.begin(), tx_.size() - 1) - 1;
      const double h = tx_[i + 1] - tx_[i];
      const double t = (x - tx_[i]) / h;
      const double d00 = 6 * t * t - 6 * t;
      const double d10 = 3 * t * t - 4 * t + 1;
      const double d01 = -6 * t * t + 6 * t;
      const double d11 = 3 * t * t - 2 * t;
      return (d00 * ta_[i] + d01 * ta_[i + 1]) / h + d10 * tda_[i] + d11 * tda_[i + 1];
    }
  }
  return 0.0;
}

double DegeneracyProfile::log_slope(double x) const {
  switch (kind_) {
    case ProfileKind::power:
      return exponent_;
    case ProfileKind::oscillating: {
      const double u = theta_ * std::log(x);
      const double c = std::cos(u);
      return exponent_ - theta_ * std::sin(2.0 * u) / (1.0 + c * c);
    }
    case ProfileKind::tabulated:
      return x * da(x) / a(x);
  }
  return 0.0;
}

const char* to_string(Regime r) {
  return r == Regime::dirichlet_at_0 ? "dirichlet_at_0" : "weighted_neumann_at_0";
}

Regime regime_for(double m_a) { return m_a < 1.0 ? Regime::dirichlet_at_0 : Regime::weighted_neumann_at_0; }

Regime ProblemConfig::effective_regime() const {
  return regime ? *regime : regime_for(degeneracy_sup(profile));
}

double degeneracy_sup(const DegeneracyProfile& profile) {
  if (profile.kind() == ProfileKind::power) return profile.exponent();
  double lo = -40.0;
  if (profile.kind() == ProfileKind::oscillating) {
    // log_slope is periodic in ln x with period pi/theta
    lo = -std::max(40.0, 3.0 * std::numbers::pi / profile.theta());
  } else {
    lo = std::min(std::log(profile.table_x().front()) - 1.0, -1.0);
  }
  constexpr int kSamples = 20000;
  double sup = std::abs(profile.log_slope(1.0));
  for (int i = 0; i < kSamples; ++i) {
    const double s = lo * (1.0 - static_cast<double>(i) / kSamples);
    sup = std::max(sup, std::abs(profile.log_slope(std::exp(s))));
  }
  if (profile.kind() == ProfileKind::tabulated) {
    // also hit every table segment densely in x
    const auto& x = profile.table_x();
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      for (int j = 0; j <= 16; ++j) {
        const double xi = x[i] + (x[i + 1] - x[i]) * j / 16.0;
        sup = std::max(sup, std::abs(profile.log_slope(xi)));
      }
    }
  }
  return sup;
}

double measure_degeneracy(const DegeneracyProfile& profile) {
  const double m = degeneracy_sup(profile);
  if (!(m < 2.0)) {
    throw DegeneracyError("degeneracy measure m_a = " + fmt(m) + " is not < 2");
  }
  return m;
}

double integrate_singular(const std::function<double(double)>& f, double p) {
  if (!(p > 0.0)) throw DivergenceError("integrand is not integrable at x = 0");
  // int_0^1 f dx = int_{-inf}^0 f(e^s) e^s ds; the integrand decays like e^{p s}
  const double s_min = -40.0 / p;
  const int panels = static_cast<int>(std::ceil(-s_min * 2.0));
  const double width = -s_min / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = s_min + (k + 0.5) * width;
    double acc = 0.0;
    for (std::size_t i = 0; i < kGaussX.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double s = mid + sign * 0.5 * width * kGaussX[i];
        const double x = std::exp(s);
        acc += kGaussW[i] * f(x) * x;
      }
    }
    sum += 0.5 * width * acc;
  }
  return sum;
}

double poincare_constant(const DegeneracyProfile& profile) {
  const double m = degeneracy_sup(profile);
  if (!(m < 1.0)) {
    throw DivergenceError("Poincare constant int 1/a diverges for m_a = " + fmt(m) + " >= 1");
  }
  return integrate_singular([&](double x) { return 1.0 / profile.a(x); }, 1.0 - m);
}

double trace_constant(const DegeneracyProfile& profile) {
  const double m = degeneracy_sup(profile);
  if (!(m < 2.0)) throw DivergenceError("int s/a diverges for m_a >= 2");
  return integrate_singular([&](double x) { return x / profile.a(x); }, 2.0 - m);
}

double coercivity_constant(const ProblemConfig& config) {
  if (config.effective_regime() == Regime::dirichlet_at_0) {
    return poincare_constant(config.profile);
  }
  const double cv = trace_constant(config.profile);
  if (!(config.beta > 0.0)) return std::numeric_limits<double>::infinity();
  const double cu = std::max(2.0 / config.beta, 2.0 * cv);
  return std::sqrt(cu * cv);
}

bool ValidationResult::ok() const { return errors().empty(); }

std::vector<Violation> ValidationResult::errors() const {
  std::vector<Violation> out;
  for (const auto& v : items) {
    if (v.severity == Severity::error) out.push_back(v);
  }
  return out;
}

ValidationResult validate(const ProblemConfig& config) {
  ValidationResult r;
  r.coercivity_constant = std::numeric_limits<double>::quiet_NaN();
  auto add = [&](Severity s, std::string code, std::string msg) {
    r.items.push_back(Violation{s, std::move(code), std::move(msg)});
  };

  r.m_a = degeneracy_sup(config.profile);
  if (!(r.m_a < 2.0)) {
    add(Severity::error, "degeneracy", "m_a = " + fmt(r.m_a) + " must be < 2");
    return r;
  }
  const Regime expected = regime_for(r.m_a);
  if (config.regime && *config.regime != expected) {
    add(Severity::error, "regime",
        std::string("regime ") + to_string(*config.regime) + " inconsistent with m_a = " +
            fmt(r.m_a) + " (expected " + to_string(expected) + ")");
  }
  if (!(config.beta >= 0.0)) add(Severity::error, "beta", "beta must be >= 0");
  if (r.m_a >= 1.0 && !(config.beta > 0.0)) {
    add(Severity::error, "beta", "beta must be positive when m_a >= 1");
  }
  const auto& k = config.kernel;
  if (!(k.rho >= 0.0)) {
    add(Severity::error, "rho", "rho must be positive");
  } else if (k.rho == 0.0) {
    add(Severity::warning, "rho", "rho = 0: undamped reference run, no decay expected");
  }
  if (!(k.tau > 0.0 && k.tau <= 1.0)) add(Severity::error, "tau", "tau must lie in (0, 1]");
  if (!(k.omega >= 0.0)) add(Severity::error, "omega", "omega must be >= 0");
  if (!std::isfinite(config.alpha)) add(Severity::error, "alpha", "alpha must be finite");

  if (r.m_a < 1.0 || config.beta > 0.0) {
    const Regime regime = config.regime.value_or(expected);
    ProblemConfig probe = config;
    probe.regime = regime;
    try {
      r.coercivity_constant = coercivity_constant(probe);
      const double band = std::abs(config.alpha) * r.coercivity_constant;
      if (!(band < 1.0)) {
        add(config.allow_noncoercive ? Severity::warning : Severity::error, "coercivity",
            "|alpha| C = " + fmt(band) + " >= 1 (coupling too strong for the coercivity band)");
      }
    } catch (const DivergenceError& e) {
      add(Severity::error, "coercivity", e.what());
    }
  }
  return r;
}

double nu_gamma(double gamma) { return std::abs(1.0 - gamma) / (2.0 - gamma); }

ConditionCResult check_condition_C(double alpha, double gamma, int K, double tol) {
  if (K < 2) throw DomainError("condition C search bound must be >= 2");
  if (!(gamma >= 0.0 && gamma < 2.0)) throw DomainError("condition C needs gamma in [0, 2)");
  const double nu = nu_gamma(gamma);
  const double scale = 0.5 * std::pow((2.0 - gamma) / 2.0, 2);
  std::vector<double> j2(K + 1);
  for (int k = 1; k <= K; ++k) {
    const double j = specfun::bessel_zero(nu, k);
    j2[k] = j * j;
  }
  ConditionCResult out;
  for (int k = 1; k <= K; ++k) {
    for (int m = 1; m <= K; ++m) {
      const double akm = scale * (j2[k] - j2[m]);
      if (std::abs(alpha - akm) <= tol) out.violations.push_back({k, m, akm});
    }
  }
  out.exact = out.violations.empty();
  return out;
}

double default_grading(double m_a) { return std::clamp(2.0 / (2.0 - m_a), 1.0, 4.0); }

}  // namespace degenwave::model
