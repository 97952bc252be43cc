#pragma once

#include <string>
#include <vector>

#include "degenwave/spectrum.hpp"
#include "degenwave/timestep.hpp"

namespace degenwave::decay {

class InsufficientDecayError : public Error {
 public:
  using Error::Error;
};

/// 2 / (3 - tau), tau in (0, 1].
double predicted_exponent(double tau);

struct FitWindow {
  double t_a = 1e2;
  double t_b = 1e4;
};

struct DecayReport {
  double s_fit = 0.0;  // minus the log-log slope
  double t_a = 0.0, t_b = 0.0;
  double r_squared = 0.0;
  int points = 0;
  double tau = 0.0;
  double predicted = 0.0;
  double spectral_trend = 0.0;  // |Re lambda_{2,k}| k^{3-tau} level; NaN until attached
  double quadrature_error = 0.0;
  bool monotone = true;
  std::vector<std::string> warnings;
};

/// Least-squares line through (ln t, ln E) for samples with t in [t_a, t_b].
/// The window must span at least 1.5 decades and the energy must fall below
/// half its first value inside it.
DecayReport fit_decay_exponent(const std::vector<double>& t, const std::vector<double>& energy,
                               double tau, FitWindow window = {});
DecayReport fit_decay_exponent(const timestep::EnergyTrace& trace, double tau, FitWindow window = {});

struct TrendRow {
  int k = 0;
  double re = 0.0;
  double trend = 0.0;  // |Re lambda| k^{3 - tau}
};

struct OptimalityReport {
  std::vector<TrendRow> rows;  // family 2, k > 0
  double level = 0.0;          // mean trend over the upper half of the k range
  double spread = 0.0;         // max/min - 1 over the same rows
  bool bounded_nonzero = false;
  bool overshoot = false;      // s_fit > (1 + tolerance) * predicted
  std::string flag;            // "optimal-consistent", "no-decay subspace" or "inconsistent"
  std::vector<std::string> notes;
};

struct TrendSummary {
  int family = 0;
  double exponent = 0.0;       // p in |Re lambda| k^p
  std::vector<TrendRow> rows;  // k > 0, ascending
  double level = 0.0;          // mean trend over the upper half of the k range
  double spread = 0.0;         // max/min - 1 over the same rows
};

TrendSummary trend_summary(const spectrum::SpectrumResult& spectrum, int family, double tau);

struct CandidateMatch {
  std::string label;
  double value = 0.0;
  double relative_error = 0.0;  // |level - |value|| / |value|
  bool within = false;
};

/// Compares a measured trend level with each candidate constant (in absolute value).
std::vector<CandidateMatch> match_candidates(double level, const std::vector<spectrum::NamedConstant>& candidates,
                                             double tolerance = 0.15);

constexpr double kSpreadTolerance = 0.1;
constexpr double kOvershootTolerance = 0.2;

/// Tabulates the family-2 trend and confronts it with a decay fit (optional).
OptimalityReport optimality_report(const spectrum::SpectrumResult& spectrum, double tau,
                                   const DecayReport* report = nullptr);

std::string to_text(const OptimalityReport& report);

}  // namespace degenwave::decay
