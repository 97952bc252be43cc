#include "degenwave/spectrum.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "degenwave/specfun.hpp"

namespace degenwave::spectrum {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

void require_power(const model::ProblemConfig& config) {
  if (config.profile.kind() != model::ProfileKind::power) {
    throw DomainError("closed-form characteristic function needs a = x^gamma");
  }
}

// (c, c~) = r i sqrt(lambda^2 +- alpha), principal roots
std::pair<cplx, cplx> arguments(cplx lambda, const CharacteristicParams& p) {
  const cplx l2 = lambda * lambda;
  return {p.r * kI * std::sqrt(l2 + p.alpha), p.r * kI * std::sqrt(l2 - p.alpha)};
}

// size of Jhat_nu(z) for large |z|
double bessel_envelope(double nu, cplx z) {
  const double az = std::max(std::abs(z), 1.0);
  return std::pow(0.5 * az, -nu) * std::sqrt(2.0 / (kPi * az)) * std::cosh(z.imag());
}

template <class F>
void parallel_for(int n, int threads, F&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

CharacteristicParams characteristic_params(const model::ProblemConfig& config) {
  require_power(config);
  CharacteristicParams p;
  p.gamma = config.profile.exponent();
  if (!(p.gamma < 2.0)) throw DomainError("gamma must be < 2");
  p.r = 2.0 / (2.0 - p.gamma);
  p.nu = model::nu_gamma(p.gamma);
  p.beta_tilde = config.beta + std::max(0.0, 1.0 - p.gamma);
  const double m0 = 4.0 * p.nu * p.nu, m1 = 4.0 * (p.nu + 1.0) * (p.nu + 1.0);
  p.a1 = (m0 - 1.0) / 8.0;
  p.a1t = (m1 - 1.0) / 8.0;
  p.a2 = (m0 - 1.0) * (m0 - 9.0) / 128.0;
  p.a2t = (m1 - 1.0) * (m1 - 9.0) / 128.0;
  const double rho = config.kernel.rho;
  p.ell = rho == 1.0 ? std::numeric_limits<double>::quiet_NaN()
                     : 0.5 * std::log(std::abs(rho - 1.0) / (rho + 1.0));
  p.beta = config.beta;
  p.alpha = config.alpha;
  p.kernel = config.kernel;
  return p;
}

cplx boundary_symbol(const fracdiff::FractionalKernel& kernel, double beta, cplx lambda) {
  if (kernel.is_direct()) return beta + kernel.rho * lambda;
  const cplx s = lambda + kernel.omega;
  if (s.imag() == 0.0 && s.real() <= 0.0) {
    throw DomainError("lambda on the cut (-inf, -omega] of (lambda + omega)^(tau - 1)");
  }
  return beta + kernel.rho * lambda * std::pow(s, kernel.tau - 1.0);
}

cplx char_f_regularized(cplx lambda, const CharacteristicParams& p) {
  const cplx b = boundary_symbol(p.kernel, p.beta_tilde, lambda);
  const auto [c, ct] = arguments(lambda, p);
  const cplx l2 = lambda * lambda;
  const cplx j0 = specfun::bessel_j_scaled(p.nu, c);
  const cplx j1 = specfun::bessel_j_scaled(p.nu + 1.0, c);
  const cplx k0 = specfun::bessel_j_scaled(p.nu, ct);
  const cplx k1 = specfun::bessel_j_scaled(p.nu + 1.0, ct);
  return 2.0 * b * j0 * k0 + 0.5 * p.r * ((l2 + p.alpha) * j1 * k0 + (l2 - p.alpha) * k1 * j0);
}

cplx char_f_regularized(cplx lambda, const model::ProblemConfig& config) {
  return char_f_regularized(lambda, characteristic_params(config));
}

cplx char_f(cplx lambda, const model::ProblemConfig& config) {
  const auto p = characteristic_params(config);
  const auto [c, ct] = arguments(lambda, p);
  return std::pow(0.5 * c, p.nu) * std::pow(0.5 * ct, p.nu) * char_f_regularized(lambda, p);
}

double envelope(cplx lambda, const CharacteristicParams& p) {
  const cplx b = boundary_symbol(p.kernel, p.beta_tilde, lambda);
  const auto [c, ct] = arguments(lambda, p);
  const double weight = 2.0 * std::abs(b) + (std::abs(c) + std::abs(ct)) / p.r;
  return weight * bessel_envelope(p.nu, c) * bessel_envelope(p.nu, ct);
}

// ---------------------------------------------------------------- shooting

namespace {

struct Endpoint {
  cplx phi, w;
};

using State = std::array<double, 4>;

// Regular solution of (a phi')' = mu phi from x = eps to 1.
Endpoint shoot(const model::DegeneracyProfile& profile, bool dirichlet, double m_a, cplx mu,
               const ShootingOptions& opt) {
  const double eps = opt.epsilon;
  const double s_eps = std::log(eps);
  // Start values: Picard sweeps on a log grid below eps, iterated to
  // convergence. The correction integrands decay like x^p toward 0.
  const double p = dirichlet ? 1.0 - m_a : 2.0 - m_a;
  const double s_lo = s_eps - std::min(40.0 / p, 700.0);
  constexpr int n = 8001;
  const double ds = (s_eps - s_lo) / (n - 1);
  std::vector<double> x(n), inva(n);
  for (int i = 0; i < n; ++i) {
    x[i] = std::exp(s_lo + i * ds);
    inva[i] = x[i] / profile.a(x[i]);  // dx / a in the s variable
  }
  // fourth-order cumulative integral on the uniform grid
  auto cumint = [&](const std::vector<cplx>& f) {
    std::vector<cplx> out(n);
    out[0] = 0.0;
    out[1] = 0.5 * ds * (f[0] + f[1]);
    for (int i = 1; i + 2 < n; ++i) {
      out[i + 1] = out[i] + ds * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]) / 24.0;
    }
    const int i = n - 2;
    out[n - 1] = out[i] + ds * (f[i - 2] - 5.0 * f[i - 1] + 19.0 * f[i] + 9.0 * f[i + 1]) / 24.0;
    return out;
  };
  std::vector<cplx> base(n), phi(n), tmp(n);
  if (dirichlet) {
    std::vector<cplx> g(inva.begin(), inva.end());
    g = cumint(g);
    for (int i = 0; i < n; ++i) g[i] += inva[0] / p;  // tail below the grid
    base = g;
  } else {
    std::fill(base.begin(), base.end(), cplx(1.0));
  }
  phi = base;
  std::vector<cplx> dw, dphi;
  cplx last = 0.0;
  for (int sweep = 0; sweep < 200; ++sweep) {
    for (int i = 0; i < n; ++i) tmp[i] = mu * phi[i] * x[i];
    dw = cumint(tmp);
    for (int i = 0; i < n; ++i) tmp[i] = dw[i] * inva[i];
    dphi = cumint(tmp);
    for (int i = 0; i < n; ++i) phi[i] = base[i] + dphi[i];
    if (std::abs(phi.back() - last) <= 1e-16 * std::abs(phi.back())) break;
    last = phi.back();
  }
  cplx phi0, w0;
  if (dirichlet) {
    const double g_eps = model::integrate_singular(
        [&](double u) { return eps / profile.a(eps * u); }, p);
    phi0 = g_eps + dphi.back();
    w0 = 1.0 + dw.back();
  } else {
    phi0 = 1.0 + dphi.back();
    w0 = dw.back();
  }

  namespace odeint = boost::numeric::odeint;
  State y = {phi0.real(), phi0.imag(), w0.real(), w0.imag()};
  auto rhs = [&](const State& st, State& d, double s) {
    const double xs = std::exp(s);
    const double q = xs / profile.a(xs);
    const cplx ph(st[0], st[1]), w(st[2], st[3]);
    const cplx dph = q * w;
    const cplx dwv = mu * xs * ph;
    d = {dph.real(), dph.imag(), dwv.real(), dwv.imag()};
  };
  try {
    auto stepper = odeint::make_controlled(opt.tolerance, opt.tolerance,
                                           odeint::runge_kutta_dopri5<State>());
    odeint::integrate_adaptive(stepper, rhs, y, s_eps, 0.0, -s_eps * 1e-3);
  } catch (const std::exception& e) {
    throw IntegrationError(std::string("shooting integration failed: ") + e.what());
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw IntegrationError("shooting integration produced a non-finite value");
  }
  return {cplx(y[0], y[1]), cplx(y[2], y[3])};
}

}  // namespace

ShootingValue char_f_shooting(cplx lambda, const model::ProblemConfig& config,
                              const ShootingOptions& options) {
  if (!(options.epsilon > 0.0 && options.epsilon < 0.1)) {
    throw DomainError("shooting start point must lie in (0, 0.1)");
  }
  const double m_a = model::degeneracy_sup(config.profile);
  const bool dirichlet = config.effective_regime() == model::Regime::dirichlet_at_0;
  if (dirichlet && !(m_a < 1.0)) throw DomainError("Dirichlet start needs m_a < 1");
  const cplx b = boundary_symbol(config.kernel, config.beta, lambda);
  const cplx l2 = lambda * lambda;
  const Endpoint f = shoot(config.profile, dirichlet, m_a, l2 + config.alpha, options);
  const Endpoint g = shoot(config.profile, dirichlet, m_a, l2 - config.alpha, options);
  const cplx t0 = 2.0 * b * f.phi * g.phi, t1 = f.w * g.phi, t2 = f.phi * g.w;
  return {t0 + t1 + t2, std::abs(t0) + std::abs(t1) + std::abs(t2)};
}

double shooting_scale(const CharacteristicParams& p, model::Regime regime) {
  const double g = specfun::gamma(p.nu + 1.0);
  return regime == model::Regime::dirichlet_at_0 ? g / (1.0 - p.gamma) : g;
}

// ---------------------------------------------------------------- asymptotics

std::vector<NamedConstant> beta1_candidates(const model::ProblemConfig& config) {
  const auto p = characteristic_params(config);
  const double tau = p.kernel.tau;
  const double common = -p.kernel.rho * std::cos((1.0 - tau) * kPi / 2.0) / std::pow(kPi, 1.0 - tau);
  return {{"r^-tau", common * std::pow(p.r, -tau)}, {"r^+tau", common * std::pow(p.r, tau)}};
}

std::vector<NamedConstant> beta2_candidates(const model::ProblemConfig& config) {
  const auto p = characteristic_params(config);
  const double tau = p.kernel.tau;
  const double common = -p.kernel.rho * p.alpha * p.alpha * std::cos((1.0 - tau) * kPi / 2.0) /
                        (4.0 * std::pow(kPi, 3.0 - tau));
  return {{"r^(4-tau)", common * std::pow(p.r, 4.0 - tau)},
          {"r^(4+tau)", common * std::pow(p.r, 4.0 + tau)}};
}

double upsilon(const model::ProblemConfig& config) {
  const auto p = characteristic_params(config);
  return p.kernel.rho * std::pow(p.r, 3.0) * p.alpha * p.alpha / (4.0 * kPi * kPi);
}

double trend_exponent(int family, double tau) { return family == 1 ? 1.0 - tau : 3.0 - tau; }

double strip_halfwidth(const model::ProblemConfig& config) {
  const auto p = characteristic_params(config);
  double w = 0.0;
  for (const auto& c : beta1_candidates(config)) w = std::max(w, std::abs(c.value));
  if (p.kernel.is_direct() && std::isfinite(p.ell)) w = std::max(w, std::abs(p.ell) / p.r);
  return 5.0 * w;
}

cplx asymptotic_seed(int family, int k, const model::ProblemConfig& config, SeedVariant variant) {
  if (family != 1 && family != 2) throw DomainError("family must be 1 or 2");
  if (k < 10) throw DomainError("asymptotic seeds need k >= 10");
  const auto p = characteristic_params(config);
  const double nu = p.nu, tau = p.kernel.tau, kd = k;
  const bool stated = variant == SeedVariant::as_stated;

  if (family == 2) {
    double im;
    if (stated) {
      // kpi + (1-2nu)pi/4 - a1/(kpi) + (1-2nu) a1/(4 k^2 pi)
      im = kd * kPi + (1.0 - 2.0 * nu) * kPi / 4.0 - p.a1 / (kd * kPi) +
           (1.0 - 2.0 * nu) * p.a1 / (4.0 * kd * kd * kPi);
    } else {
      const double b = (kd + nu / 2.0 - 0.25) * kPi;
      im = b - p.a1 / b;
    }
    double re;
    if (p.kernel.is_direct()) {
      re = -upsilon(config) / (kd * kd);
    } else {
      re = beta2_candidates(config)[0].value / std::pow(kd, 3.0 - tau);
    }
    return cplx(re, im / p.r);
  }

  if (p.kernel.is_direct()) {
    const double rho = p.kernel.rho;
    if (rho == 1.0) throw DomainError("family-1 expansion undefined at tau = 1, rho = 1 (log of 0)");
    const double offset = rho > 1.0 ? (1.0 - 2.0 * nu) / 4.0 : (3.0 - 2.0 * nu) / 4.0;
    return cplx(p.ell, (kd + offset) * kPi) / p.r;
  }
  double im;
  double beta1;
  if (stated) {
    im = (kd + (3.0 - 2.0 * nu) / 4.0) * kPi;
    beta1 = beta1_candidates(config)[1].value;
  } else {
    const double b = (kd + nu / 2.0 + 0.25) * kPi;
    im = b - p.a1t / b;
    beta1 = beta1_candidates(config)[0].value;
  }
  return cplx(beta1 / std::pow(kd, 1.0 - tau), im / p.r);
}

// ---------------------------------------------------------------- refinement

namespace {

struct Evaluator {
  const model::ProblemConfig& config;
  RefineOptions opt;
  std::optional<CharacteristicParams> p;

  Evaluator(const model::ProblemConfig& c, const RefineOptions& o) : config(c), opt(o) {
    if (opt.method == Method::closed) p = characteristic_params(c);
  }

  // value and its reference size
  std::pair<cplx, double> operator()(cplx lambda) const {
    if (p) return {char_f_regularized(lambda, *p), envelope(lambda, *p)};
    const auto s = char_f_shooting(lambda, config, opt.shooting);
    return {s.value, s.magnitude};
  }
};

}  // namespace

Refined refine_root(cplx seed, const model::ProblemConfig& config, const RefineOptions& options) {
  const Evaluator eval(config, options);
  // root spacing pi / r, with r taken from the leading power of a
  const double r = 2.0 / (2.0 - config.profile.exponent());
  const double max_step = options.max_step > 0.0 ? options.max_step : kPi / (4.0 * r);
  cplx lambda = seed;
  auto [f, env] = eval(lambda);
  double res = std::abs(f) / env;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const double h = 1e-7 * std::max(1.0, std::abs(lambda));
    const cplx df = (eval(lambda + h).first - eval(lambda - h).first) / (2.0 * h);
    if (!(std::abs(df) > 0.0)) throw ConvergenceError("refine_root: zero derivative");
    const cplx step = f / df;
    if (!(std::abs(step) <= max_step)) {
      throw ConvergenceError("refine_root: Newton step leaves the basin of the seed");
    }
    // backtrack until the normalized residual drops
    double t = 1.0;
    cplx trial;
    double trial_res = 0.0;
    std::pair<cplx, double> fe;
    bool improved = false;
    for (int b = 0; b < 8; ++b, t *= 0.5) {
      trial = lambda - t * step;
      fe = eval(trial);
      trial_res = std::abs(fe.first) / fe.second;
      if (trial_res < res) {
        improved = true;
        break;
      }
    }
    const bool tiny = std::abs(step) <= 1e-14 * std::max(1.0, std::abs(lambda));
    if (improved) {
      lambda = trial;
      f = fe.first;
      res = trial_res;
    }
    if (std::abs(lambda - seed) > 2.0 * max_step) {
      throw ConvergenceError("refine_root: iterate left the window of the seed");
    }
    if ((!improved || tiny) && res <= options.accept) {
      if (lambda.real() > 1e-8) {
        throw DomainError("refine_root: root with positive real part (branch or overflow bug)");
      }
      return {lambda, res, it};
    }
    if (!improved) {
      std::ostringstream os;
      os << "refine_root: residual stalled at " << res;
      throw ConvergenceError(os.str());
    }
  }
  throw ConvergenceError("refine_root: no convergence within the iteration limit");
}

// ---------------------------------------------------------------- counting

int count_roots(const Rect& rect, const model::ProblemConfig& config) {
  if (!(rect.re_lo < rect.re_hi && rect.im_lo < rect.im_hi)) throw DomainError("empty rectangle");
  const auto p = characteristic_params(config);
  const std::array<cplx, 5> corner = {cplx(rect.re_lo, rect.im_lo), cplx(rect.re_hi, rect.im_lo),
                                      cplx(rect.re_hi, rect.im_hi), cplx(rect.re_lo, rect.im_hi),
                                      cplx(rect.re_lo, rect.im_lo)};
  auto value = [&](cplx z) {
    const cplx f = char_f_regularized(z, p);
    if (std::abs(f) < 1e-8 * envelope(z, p)) {
      std::ostringstream os;
      os << "count_roots: contour passes through a root near " << z;
      throw ContourError(os.str());
    }
    return f;
  };
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const cplx a = corner[e], b = corner[e + 1];
    double t = 0.0, dt = 1.0 / 32.0;
    cplx fa = value(a);
    while (t < 1.0) {
      const double tn = std::min(1.0, t + dt);
      const cplx fb = value(a + tn * (b - a));
      const cplx q = fb / fa;
      const double dphase = std::arg(q);
      const double dmag = std::abs(std::log(std::abs(q)));
      if ((std::abs(dphase) > 0.4 || dmag > 0.7) && dt > 1e-10) {
        dt *= 0.5;
        continue;
      }
      total += dphase;
      t = tn;
      fa = fb;
      if (std::abs(dphase) < 0.1 && dmag < 0.2) dt *= 1.5;
    }
  }
  const double w = total / (2.0 * kPi);
  const double n = std::round(w);
  if (std::abs(w - n) > 0.05) throw ContourError("count_roots: winding number is not an integer");
  return static_cast<int>(n);
}

// ---------------------------------------------------------------- spectrum

SpectrumResult compute_spectrum(const model::ProblemConfig& config, int k_min, int k_max,
                                const SpectrumOptions& options) {
  const auto v = model::validate(config);
  if (!v.ok()) throw ConfigError("config failed validation: " + v.errors().front().message);
  require_power(config);
  if (k_min < 10 || k_max < k_min) throw DomainError("k range must satisfy 10 <= k_min <= k_max");
  const auto p = characteristic_params(config);

  struct Task {
    int family, k;
    cplx seed;
  };
  std::vector<Task> tasks;
  for (int family : {1, 2}) {
    for (int k = k_min; k <= k_max; ++k) {
      const cplx s = asymptotic_seed(family, k, config, options.seeds);
      tasks.push_back({family, k, s});
      if (options.include_conjugates) tasks.push_back({family, -k, std::conj(s)});
    }
  }
  std::vector<std::optional<Refined>> refined(tasks.size());
  std::vector<std::string> failures(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), options.threads, [&](int i) {
    try {
      refined[i] = refine_root(tasks[i].seed, config, options.refine);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  SpectrumResult out;
  out.strip = strip_halfwidth(config);
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    std::ostringstream tag;
    tag << "(family " << tasks[i].family << ", k " << tasks[i].k << ")";
    if (!refined[i]) {
      missing.push_back(tag.str() + ": " + failures[i]);
      continue;
    }
    const cplx l = refined[i]->lambda;
    const bool dup = std::any_of(out.roots.begin(), out.roots.end(), [&](const Eigenvalue& e) {
      return std::abs(e.lambda - l) < 1e-7 * std::max(1.0, std::abs(l));
    });
    if (dup) {
      missing.push_back(tag.str() + ": converged to a root already claimed");
      continue;
    }
    out.roots.push_back({tasks[i].family, tasks[i].k, l, refined[i]->residual, tasks[i].seed,
                         refined[i]->iterations});
  }
  // conjugate partners must mirror each other
  for (const auto& e : out.roots) {
    if (e.k >= 0) continue;
    for (const auto& f : out.roots) {
      if (f.family == e.family && f.k == -e.k &&
          std::abs(f.lambda - std::conj(e.lambda)) > 1e-8 * std::abs(f.lambda)) {
        throw ConvergenceError("conjugate partner does not mirror its root");
      }
    }
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
    if (a.family != b.family) return a.family < b.family;
    if ((a.k > 0) != (b.k > 0)) return a.k > 0;
    return std::abs(a.k) < std::abs(b.k);
  });

  const double period = kPi / p.r;
  const int nw = k_max - k_min + 1;
  out.windows.resize(nw);
  std::vector<std::string> contour_failures(nw);
  parallel_for(nw, options.threads, [&](int i) {
    const int k = k_min + i;
    WindowCount& w = out.windows[i];
    w.k = k;
    const double mid = (k + p.nu / 2.0) * period;
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double shift = 0.013 * attempt * period;
      w.rect = {-out.strip, 0.25, mid - 0.5 * period + shift, mid + 0.5 * period + shift};
      try {
        w.counted = count_roots(w.rect, config);
        contour_failures[i].clear();
        return;
      } catch (const ContourError& e) {
        contour_failures[i] = e.what();
      }
    }
  });
  for (int i = 0; i < nw; ++i) {
    if (!contour_failures[i].empty()) throw ContourError(contour_failures[i]);
  }
  for (auto& w : out.windows) {
    w.found = static_cast<int>(std::count_if(out.roots.begin(), out.roots.end(), [&](const Eigenvalue& e) {
      const cplx l = e.lambda;
      return l.imag() > w.rect.im_lo && l.imag() < w.rect.im_hi && l.real() > w.rect.re_lo &&
             l.real() < w.rect.re_hi;
    }));
    if (w.counted != w.found) {
      std::ostringstream os;
      os << "window k = " << w.k << " (Im in [" << w.rect.im_lo << ", " << w.rect.im_hi
         << "]): argument principle counts " << w.counted << " roots, refinement found " << w.found;
      for (const auto& m : missing) os << "; " << m;
      throw CountMismatchError(os.str(), w.rect.im_lo, w.rect.im_hi, w.counted, w.found);
    }
  }
  return out;
}

// ---------------------------------------------------------------- witness

WitnessResult exp_stability_witness(const model::ProblemConfig& config, const discretize::Mesh& mesh,
                                    int n) {
  using CVec = Eigen::VectorXcd;
  const auto mats = discretize::assemble(config, mesh);
  const auto eig = discretize::decoupled_eigenpairs(mats, n);
  if (static_cast<int>(eig.values.size()) < n) throw DomainError("not enough discrete eigenpairs");
  const double mu = eig.values[n - 1];
  const discretize::Vec& e = eig.vectors[n - 1];
  const cplx s = kI * std::sqrt(mu);
  const double r2 = 1.0 / std::sqrt(2.0);

  const auto& kernel = config.kernel;
  fracdiff::DiffusiveQuadrature quad;
  if (!kernel.is_direct()) quad = fracdiff::make_quadrature(kernel, 40, 1e-2, 1e2);
  const int nq = static_cast<int>(quad.size());
  const int N = mats.nodes(), last = mats.last();

  const CVec u = CVec::Zero(N), ut = CVec::Zero(N);
  const CVec v = r2 * e.cast<cplx>() / s, vt = r2 * e.cast<cplx>();
  const CVec phi = CVec::Zero(nq);

  // M^{-1} restricted to the free dofs of each field
  auto solve_free = [&](const CVec& rhs, const std::vector<bool>& fixed) {
    Eigen::SimplicialLDLT<discretize::SpMat> ldlt(discretize::restrict(mats.M, fixed));
    const auto idx = discretize::free_indices(fixed);
    discretize::Vec re(idx.size()), im(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      re[i] = rhs[idx[i]].real();
      im[i] = rhs[idx[i]].imag();
    }
    const discretize::Vec xr = ldlt.solve(re), xi = ldlt.solve(im);
    CVec out = CVec::Zero(N);
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = cplx(xr[i], xi[i]);
    return out;
  };
  const Eigen::SparseMatrix<cplx> Mc = mats.M.cast<cplx>(), Kc = mats.K.cast<cplx>();

  cplx force = kernel.is_direct() ? kernel.rho * ut[last] : cplx(0.0);
  for (int j = 0; j < nq; ++j) force += kernel.zeta() * quad.weights[j] * quad.theta[j] * phi[j];
  CVec fu = -(Kc * u) - config.alpha * (Mc * v);
  fu[last] -= config.beta * u[last] + force;
  const CVec fv = -(Kc * v) - config.alpha * (Mc * u);

  // residual R = (s - A_h) U
  CVec ru = s * u - ut;
  CVec rut = s * ut - solve_free(fu, mats.u_fixed);
  CVec rv = s * v - vt;
  CVec rvt = s * vt - solve_free(fv, mats.v_fixed);
  for (int i = 0; i < N; ++i) {
    if (mats.u_fixed[i]) ru[i] = rut[i] = 0.0;
    if (mats.v_fixed[i]) rv[i] = rvt[i] = 0.0;
  }
  CVec rphi(nq);
  for (int j = 0; j < nq; ++j) {
    const double sg = quad.nodes[j];
    rphi[j] = s * phi[j] - (-(sg * sg + kernel.omega) * phi[j] + quad.theta[j] * ut[last]);
  }

  auto quad_form = [](const Eigen::SparseMatrix<cplx>& A, const CVec& x, const CVec& y) {
    return x.dot(A * y);  // x^H A y
  };
  double norm2 = quad_form(Mc, rut, rut).real() + quad_form(Mc, rvt, rvt).real() +
                 quad_form(Kc, ru, ru).real() + quad_form(Kc, rv, rv).real() +
                 2.0 * config.alpha * quad_form(Mc, ru, rv).real() + config.beta * std::norm(ru[last]);
  for (int j = 0; j < nq; ++j) norm2 += kernel.zeta() * quad.weights[j] * std::norm(rphi[j]);

  WitnessResult w;
  w.mu = mu;
  w.value = norm2;
  w.ratio = config.alpha == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                : norm2 * 2.0 * mu / (config.alpha * config.alpha);
  return w;
}

}  // namespace degenwave::spectrum
