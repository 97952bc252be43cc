#include "degenwave/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace degenwave::decay {

double predicted_exponent(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("predicted exponent needs tau in (0, 1]");
  return 2.0 / (3.0 - tau);
}

DecayReport fit_decay_exponent(const std::vector<double>& t, const std::vector<double>& energy,
                               double tau, FitWindow window) {
  if (t.size() != energy.size() || t.empty()) throw DomainError("fit: t and E must have equal length");
  if (!(window.t_a > 0.0 && window.t_b > window.t_a)) throw DomainError("fit: bad window");
  if (std::log10(window.t_b / window.t_a) < 1.5 - 1e-12) {
    throw DomainError("fit window must span at least 1.5 decades");
  }
  DecayReport r;
  r.t_a = window.t_a;
  r.t_b = window.t_b;
  r.tau = tau;
  r.predicted = predicted_exponent(tau);
  r.spectral_trend = std::numeric_limits<double>::quiet_NaN();

  const double e0 = energy.front();
  std::vector<double> lx, ly;
  double prev = std::numeric_limits<double>::infinity();
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t_a * (1.0 - 1e-12) || t[i] > window.t_b * (1.0 + 1e-12)) continue;
    if (!(energy[i] > 0.0)) {
      throw InsufficientDecayError("fit: energy is not positive at t = " + std::to_string(t[i]));
    }
    if (energy[i] > prev) r.monotone = false;
    prev = energy[i];
    lowest = std::min(lowest, energy[i]);
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(energy[i]));
  }
  r.points = static_cast<int>(lx.size());
  if (r.points < 3) throw InsufficientDecayError("fit: fewer than 3 samples inside the window");
  if (!(lowest < 0.5 * e0)) {
    std::ostringstream os;
    os << "fit: energy never falls below 0.5 E(0) inside the window (min E/E(0) = " << lowest / e0
       << ")";
    throw InsufficientDecayError(os.str());
  }
  if (!r.monotone) r.warnings.push_back("energy is not monotone inside the fit window");

  const double n = r.points;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < r.points; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < r.points; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  r.s_fit = -slope;
  const double ss_res = std::max(0.0, syy - slope * sxy);
  r.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return r;
}

DecayReport fit_decay_exponent(const timestep::EnergyTrace& trace, double tau, FitWindow window) {
  std::vector<double> t, e;
  for (const auto& s : trace.samples) {
    t.push_back(s.t);
    e.push_back(s.split.total());
  }
  if (!e.empty()) e.front() = trace.initial_energy;
  DecayReport r = fit_decay_exponent(t, e, tau, window);
  r.quadrature_error = trace.quadrature_error;
  return r;
}

TrendSummary trend_summary(const spectrum::SpectrumResult& spectrum, int family, double tau) {
  TrendSummary out;
  out.family = family;
  out.exponent = spectrum::trend_exponent(family, tau);
  for (const auto& e : spectrum.roots) {
    if (e.family != family || e.k <= 0) continue;
    out.rows.push_back({e.k, e.lambda.real(), std::abs(e.lambda.real()) * std::pow(e.k, out.exponent)});
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const TrendRow& a, const TrendRow& b) { return a.k < b.k; });
  if (out.rows.empty()) return out;
  const std::size_t half = out.rows.size() / 2;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
  for (std::size_t i = half; i < out.rows.size(); ++i) {
    lo = std::min(lo, out.rows[i].trend);
    hi = std::max(hi, out.rows[i].trend);
    sum += out.rows[i].trend;
  }
  out.level = sum / static_cast<double>(out.rows.size() - half);
  out.spread = lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<CandidateMatch> match_candidates(double level, const std::vector<spectrum::NamedConstant>& candidates,
                                             double tolerance) {
  std::vector<CandidateMatch> out;
  for (const auto& c : candidates) {
    CandidateMatch m;
    m.label = c.label;
    m.value = c.value;
    m.relative_error = std::abs(level - std::abs(c.value)) / std::abs(c.value);
    m.within = m.relative_error <= tolerance;
    out.push_back(m);
  }
  return out;
}

OptimalityReport optimality_report(const spectrum::SpectrumResult& spectrum, double tau,
                                   const DecayReport* report) {
  OptimalityReport out;
  const TrendSummary summary = trend_summary(spectrum, 2, tau);
  out.rows = summary.rows;
  if (out.rows.empty()) {
    out.flag = "inconsistent";
    out.notes.push_back("no family-2 roots to tabulate");
    return out;
  }
  const bool all_zero = std::all_of(out.rows.begin(), out.rows.end(),
                                    [](const TrendRow& r) { return std::abs(r.re) < 1e-12; });
  if (all_zero) {
    out.flag = "no-decay subspace";
    out.notes.push_back("family-2 real parts vanish: those modes never decay, strong stability fails");
    return out;
  }
  out.level = summary.level;
  out.spread = summary.spread;
  out.bounded_nonzero = out.level > 0.0 && out.spread <= kSpreadTolerance;
  if (!out.bounded_nonzero) {
    out.notes.push_back("trend |Re lambda_2,k| k^" + std::to_string(summary.exponent) +
                        " does not settle to a nonzero constant");
  }
  if (report) {
    out.overshoot = report->s_fit > (1.0 + kOvershootTolerance) * report->predicted;
    if (out.overshoot) {
      std::ostringstream os;
      os << "fitted exponent " << report->s_fit << " exceeds " << 1.0 + kOvershootTolerance
         << " x predicted " << report->predicted;
      out.notes.push_back(os.str());
    }
  }
  out.flag = out.bounded_nonzero && !out.overshoot ? "optimal-consistent" : "inconsistent";
  return out;
}

std::string to_text(const OptimalityReport& r) {
  std::ostringstream os;
  os << "flag: " << r.flag << "\n";
  os << "trend level: " << r.level << "  spread: " << r.spread << "\n";
  os << "k, Re lambda_2k, trend\n";
  for (const auto& row : r.rows) os << row.k << ", " << row.re << ", " << row.trend << "\n";
  for (const auto& n : r.notes) os << "note: " << n << "\n";
  return os.str();
}

}  // namespace degenwave::decay
