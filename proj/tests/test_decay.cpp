#include <cmath>

#include "degenwave/decay.hpp"
#include "doctest.h"

using namespace degenwave;
using namespace degenwave::decay;

namespace {

struct Series {
  std::vector<double> t, e;
};

template <class F>
Series sample(F&& f, double t0 = 1.0, double t1 = 1e5, int per_decade = 40) {
  Series s;
  const int n = static_cast<int>(std::log10(t1 / t0) * per_decade);
  for (int i = 0; i <= n; ++i) {
    const double t = t0 * std::pow(10.0, static_cast<double>(i) / per_decade);
    s.t.push_back(t);
    s.e.push_back(f(t));
  }
  return s;
}

spectrum::SpectrumResult fake_spectrum(double scale, double power) {
  spectrum::SpectrumResult r;
  for (int k = 20; k <= 40; ++k) {
    spectrum::Eigenvalue e;
    e.family = 2;
    e.k = k;
    e.lambda = {-scale * std::pow(k, -power), 1.0 * k};
    r.roots.push_back(e);
  }
  return r;
}

}  // namespace

TEST_CASE("predicted exponent") {
  CHECK(predicted_exponent(0.5) == doctest::Approx(0.8));
  CHECK(predicted_exponent(1.0) == doctest::Approx(1.0));
  CHECK(predicted_exponent(0.1) == doctest::Approx(0.68966).epsilon(1e-5));
  CHECK_THROWS_AS(predicted_exponent(0.0), DomainError);
}

TEST_CASE("exact power law") {
  const auto s = sample([](double t) { return 7.0 * std::pow(t, -0.8); });
  const auto r = fit_decay_exponent(s.t, s.e, 0.5);
  CHECK(r.s_fit == doctest::Approx(0.8).epsilon(1e-3));
  CHECK(r.r_squared > 0.999999);
  CHECK(r.monotone);
}

TEST_CASE("log-periodic perturbation") {
  // the window must hold a few periods of sin(ln t); over [1e2, 1e4] (0.73
  // periods) the slope is biased to 0.708
  const auto s = sample([](double t) { return 7.0 * std::pow(t, -0.8) * (1.0 + 0.2 * std::sin(std::log(t))); },
                        1.0, 1e8);
  const auto r = fit_decay_exponent(s.t, s.e, 0.5, {1.0, 1e8});
  CHECK(std::abs(r.s_fit - 0.8) < 0.05);
  CHECK(r.r_squared < 0.9999);
  const auto narrow = fit_decay_exponent(s.t, s.e, 0.5);
  CHECK(narrow.s_fit == doctest::Approx(0.708).epsilon(2e-3));
}

TEST_CASE("slope is invariant under rescaling of E") {
  const auto s = sample([](double t) { return 3.0 * std::pow(t, -0.7) * (1.0 + 0.1 * std::cos(2.0 * std::log(t))); });
  auto scaled = s;
  for (double& e : scaled.e) e *= 123.0;
  CHECK(fit_decay_exponent(s.t, s.e, 0.5).s_fit ==
        doctest::Approx(fit_decay_exponent(scaled.t, scaled.e, 0.5).s_fit).epsilon(1e-12));
}

TEST_CASE("fit preconditions") {
  const auto flat = sample([](double) { return 1.0; });
  CHECK_THROWS_AS(fit_decay_exponent(flat.t, flat.e, 0.5), InsufficientDecayError);
  const auto s = sample([](double t) { return std::pow(t, -1.0); });
  CHECK_THROWS_AS(fit_decay_exponent(s.t, s.e, 0.5, {1e2, 1e3}), DomainError);
  const auto bumpy = sample([](double t) { return std::pow(t, -1.0) * (1.0 + 0.5 * std::sin(3.0 * std::log(t))); });
  const auto r = fit_decay_exponent(bumpy.t, bumpy.e, 0.5);
  CHECK_FALSE(r.monotone);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("optimality flags") {
  DecayReport fit;
  fit.predicted = 0.8;
  fit.s_fit = 0.82;
  const auto good = optimality_report(fake_spectrum(2.8e-4, 2.5), 0.5, &fit);
  CHECK(good.flag == "optimal-consistent");
  CHECK(good.level == doctest::Approx(2.8e-4));

  fit.s_fit = 1.1;
  CHECK(optimality_report(fake_spectrum(2.8e-4, 2.5), 0.5, &fit).flag == "inconsistent");

  CHECK(optimality_report(fake_spectrum(0.0, 2.5), 0.5).flag == "no-decay subspace");

  // a faster spectral decay than k^{-(3 - tau)} drives the trend to zero
  CHECK(optimality_report(fake_spectrum(2.8e-4, 3.5), 0.5).flag == "inconsistent");

  // tau = 1 uses k^2
  const auto direct = optimality_report(fake_spectrum(5e-4, 2.0), 1.0);
  CHECK(direct.flag == "optimal-consistent");
  CHECK(direct.rows.front().trend == doctest::Approx(5e-4));
}

TEST_CASE("optimality on a computed spectrum") {
  model::ProblemConfig c;
  c.profile = model::DegeneracyProfile::power(0.5);
  c.alpha = 0.1;
  c.kernel = {0.5, 1.0, 1.0};
  const auto spec = spectrum::compute_spectrum(c, 30, 60);
  const auto rep = optimality_report(spec, 0.5);
  CHECK(rep.flag == "optimal-consistent");
  CHECK(rep.level == doctest::Approx(2.78e-4).epsilon(0.02));
  CHECK(to_text(rep).find("optimal-consistent") != std::string::npos);

  c.alpha = 0.0;
  c.kernel.rho = 1.0;
  const auto spec0 = spectrum::compute_spectrum(c, 20, 25);
  CHECK(optimality_report(spec0, 0.5).flag == "no-decay subspace");
}

TEST_CASE("trend summary and candidate matching") {
  const auto s = trend_summary(fake_spectrum(2.8e-4, 2.5), 2, 0.5);
  CHECK(s.exponent == doctest::Approx(2.5));
  CHECK(s.rows.size() == 21);
  CHECK(s.level == doctest::Approx(2.8e-4));
  CHECK(s.spread == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(trend_summary(fake_spectrum(1.0, 2.5), 1, 0.5).rows.empty());

  const auto m = match_candidates(2.8e-4, {{"a", -2.75e-4}, {"b", 3.7e-4}});
  REQUIRE(m.size() == 2);
  CHECK(m[0].within);
  CHECK(m[0].relative_error == doctest::Approx(0.05 / 2.75).epsilon(1e-9));
  CHECK_FALSE(m[1].within);
}
