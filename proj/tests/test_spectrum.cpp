#include <cmath>
#include <numbers>

#include "degenwave/specfun.hpp"
#include "degenwave/spectrum.hpp"
#include "doctest.h"

using namespace degenwave;
using namespace degenwave::spectrum;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

model::ProblemConfig reference_config() {
  model::ProblemConfig c;
  c.profile = model::DegeneracyProfile::power(0.5);
  c.alpha = 0.1;
  c.beta = 1.0;
  c.kernel = {0.5, 1.0, 1.0};
  return c;
}

model::ProblemConfig direct_config() {
  model::ProblemConfig c;
  c.profile = model::DegeneracyProfile::power(0.0);
  c.alpha = 0.1;
  c.beta = 1.0;
  c.kernel = {1.0, 1.0, 2.0};
  return c;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("char_f matches the Bessel product form off the axis") {
  auto c = reference_config();
  const auto p = characteristic_params(c);
  for (cplx l : {cplx(-0.3, 5.0), cplx(-1.0, 0.7), cplx(0.2, 12.0), cplx(-0.05, 40.0)}) {
    const cplx lt = std::sqrt(l * l + c.alpha), ltt = std::sqrt(l * l - c.alpha);
    const cplx z = p.r * kI * lt, zt = p.r * kI * ltt;
    const cplx b = boundary_symbol(c.kernel, p.beta_tilde, l);
    using specfun::bessel_j;
    const cplx direct = 2.0 * b * bessel_j(p.nu, z) * bessel_j(p.nu, zt) -
                        kI * lt * bessel_j(p.nu + 1, z) * bessel_j(p.nu, zt) -
                        kI * ltt * bessel_j(p.nu + 1, zt) * bessel_j(p.nu, z);
    CHECK(rel(char_f(l, c), direct) < 1e-11);
  }
}

TEST_CASE("alpha = 0 roots sit at i j_{nu,k} / r") {
  for (double g : {0.0, 0.5, 0.9}) {
    auto c = reference_config();
    c.profile = model::DegeneracyProfile::power(g);
    c.alpha = 0.0;
    const auto p = characteristic_params(c);
    for (int k = 1; k <= 5; ++k) {
      const double j = specfun::bessel_zero(p.nu, k);
      const cplx l(0.0, -j / p.r);
      CHECK(std::abs(char_f_regularized(l, p)) < 1e-12 * envelope(l, p));
      // the principal-branch form vanishes there too
      const cplx off = char_f(l + cplx(0.0, 0.3), c);
      CHECK(std::abs(char_f(l, c)) < 1e-11 * std::abs(off));
    }
  }
}

TEST_CASE("conjugate symmetry") {
  const auto c = reference_config();
  const double nu = characteristic_params(c).nu;
  for (cplx l : {cplx(-0.2, 3.0), cplx(-2.0, 17.5), cplx(0.4, 0.9)}) {
    CHECK(rel(char_f_regularized(std::conj(l), c), std::conj(char_f_regularized(l, c))) < 1e-12);
    // principal powers of c = r i sqrt(.) flip c to -conj(c): only a unit factor remains
    const cplx q = char_f(std::conj(l), c) / std::conj(char_f(l, c));
    CHECK(std::abs(q) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(std::abs(std::arg(q)) - 2.0 * kPi * nu) < 1e-10);
  }
}

TEST_CASE("branch cut of the damper symbol is refused") {
  const auto c = reference_config();
  CHECK_THROWS_AS(char_f(cplx(-2.0, 0.0), c), DomainError);
  CHECK_NOTHROW(char_f(cplx(-2.0, 1e-3), c));
}

TEST_CASE("seed proximity probe for the tau = 1 damper family") {
  auto c = direct_config();
  c.alpha = 0.01;
  const cplx s = asymptotic_seed(1, 40, c);
  CHECK(std::abs(char_f(s, c)) < 0.05 * std::abs(char_f(s + 0.3, c)));
}

TEST_CASE("shooting equals the closed form up to the normalization factor") {
  for (double g : {0.3, 0.5, 1.0, 1.5}) {
    auto c = reference_config();
    c.profile = model::DegeneracyProfile::power(g);
    const auto p = characteristic_params(c);
    const double sc = shooting_scale(p, c.effective_regime());
    for (cplx l : {cplx(-0.3, 5.0), cplx(-0.05, 20.0)}) {
      const auto s = char_f_shooting(l, c);
      CHECK(rel(s.value, sc * sc * char_f_regularized(l, p)) < 1e-9);
    }
  }
}

TEST_CASE("regular string: shooting reproduces the sinh/cosh determinant") {
  auto c = reference_config();
  c.profile = model::DegeneracyProfile::power(0.0);
  for (cplx l : {cplx(-0.4, 2.0), cplx(-0.1, 9.0)}) {
    const cplx b = boundary_symbol(c.kernel, c.beta, l);
    auto parts = [&](double a) {
      const cplx s = std::sqrt(l * l + a);
      return std::pair{std::sinh(s) / s, std::cosh(s)};
    };
    const auto [sp, cp] = parts(c.alpha);
    const auto [sm, cm] = parts(-c.alpha);
    const cplx expected = 2.0 * b * sp * sm + cp * sm + sp * cm;
    CHECK(rel(char_f_shooting(l, c).value, expected) < 1e-9);
  }
}

TEST_CASE("shooting is insensitive to the start point") {
  const auto c = reference_config();
  ShootingOptions half;
  half.epsilon = 0.5e-6;
  for (cplx l : {cplx(-0.3, 5.0), cplx(-0.02, 30.0)}) {
    CHECK(rel(char_f_shooting(l, c, half).value, char_f_shooting(l, c).value) < 1e-8);
  }
  auto n = reference_config();
  n.profile = model::DegeneracyProfile::power(1.4);
  CHECK(rel(char_f_shooting(cplx(-0.3, 5.0), n, half).value,
            char_f_shooting(cplx(-0.3, 5.0), n).value) < 1e-8);
}

TEST_CASE("shooting on a tabulated profile finds the power-law roots") {
  std::vector<double> x, a, da;
  for (int i = 0; i <= 400; ++i) {
    const double xi = std::pow(10.0, -4.0 + 4.0 * i / 400.0);
    x.push_back(xi);
    a.push_back(std::sqrt(xi));
    da.push_back(0.5 / std::sqrt(xi));
  }
  x.back() = 1.0;
  auto c = reference_config();
  c.profile = model::DegeneracyProfile::tabulated(x, a, da);
  CHECK(std::isfinite(char_f_shooting(cplx(-0.1, 6.0), c).value.real()));
  const auto exact = refine_root(asymptotic_seed(1, 10, reference_config(), SeedVariant::corrected),
                                 reference_config());
  RefineOptions opt;
  opt.method = Method::shooting;
  const auto r = refine_root(exact.lambda + cplx(0.01, 0.01), c, opt);
  CHECK(std::abs(r.lambda - exact.lambda) < 1e-6);
  CHECK(r.residual < 1e-10);
}

TEST_CASE("asymptotic seeds: closed-form values") {
  const auto d = direct_config();
  for (int k : {10, 25, 40}) {
    const cplx s = asymptotic_seed(1, k, d);
    CHECK(s.real() == doctest::Approx(-0.549306).epsilon(1e-6));
    CHECK(s.imag() == doctest::Approx(k * kPi).epsilon(1e-12));
  }
  const auto c = reference_config();
  const int k = 20;
  const cplx s2 = asymptotic_seed(2, k, c);
  CHECK(s2.imag() == doctest::Approx(0.75 * (k * kPi + kPi / 12.0)).epsilon(1e-4));
  CHECK(std::abs(beta2_candidates(c)[0].value) == doctest::Approx(2.766e-4).epsilon(1e-3));

  auto z = c;
  z.alpha = 0.0;
  CHECK(asymptotic_seed(2, k, z).real() == 0.0);

  auto one = d;
  one.kernel.rho = 1.0;
  CHECK_THROWS_AS(asymptotic_seed(1, 12, one), DomainError);
  CHECK_THROWS_AS(asymptotic_seed(1, 5, d), DomainError);
}

TEST_CASE("refine_root recovers a perturbed alpha = 0 root") {
  auto c = reference_config();
  c.alpha = 0.0;
  const auto p = characteristic_params(c);
  const cplx root(0.0, specfun::bessel_zero(p.nu, 12) / p.r);
  for (cplx d : {cplx(1e-3, 0.0), cplx(-1e-3, 1e-3), cplx(0.0, -1e-3)}) {
    const auto r = refine_root(root + d, c);
    CHECK(std::abs(r.lambda - root) < 1e-11);
  }
}

TEST_CASE("refine_root: conjugate seeds give conjugate roots") {
  const auto c = reference_config();
  for (int fam : {1, 2}) {
    const cplx s = asymptotic_seed(fam, 15, c, SeedVariant::corrected);
    const auto a = refine_root(s, c);
    const auto b = refine_root(std::conj(s), c);
    CHECK(std::abs(b.lambda - std::conj(a.lambda)) < 1e-10);
    CHECK(a.lambda.real() <= 0.0);
  }
}

TEST_CASE("refine_root refuses a seed at a critical point") {
  const auto c = reference_config();
  const auto p = characteristic_params(c);
  // locate f'(z) = 0 between two roots by Newton on the derivative
  auto d1 = [&](cplx z) {
    const double h = 1e-5;
    return (char_f_regularized(z + h, p) - char_f_regularized(z - h, p)) / (2 * h);
  };
  const cplx a = refine_root(asymptotic_seed(2, 12, c, SeedVariant::corrected), c).lambda;
  const cplx b = refine_root(asymptotic_seed(1, 12, c, SeedVariant::corrected), c).lambda;
  cplx z = 0.5 * (a + b);
  for (int i = 0; i < 40; ++i) {
    const double h = 1e-4;
    const cplx dd = (d1(z + h) - d1(z - h)) / (2 * h);
    z -= d1(z) / dd;
  }
  REQUIRE(std::abs(d1(z)) < 1e-9 * envelope(z, p));
  CHECK_THROWS_AS(refine_root(z, c), ConvergenceError);
}

TEST_CASE("count_roots: known root sets and additivity") {
  auto c = reference_config();
  c.alpha = 0.0;
  const auto p = characteristic_params(c);
  const double j5 = specfun::bessel_zero(p.nu, 5) / p.r;
  const double j6 = specfun::bessel_zero(p.nu, 6) / p.r;
  CHECK(count_roots({-0.02, 0.02, j5 - 0.3, j5 + 0.3}, c) == 1);
  CHECK(count_roots({-0.02, 0.02, j5 + 0.2, j6 - 0.2}, c) == 0);

  const auto d = reference_config();
  const Rect lo{-1.5, 0.25, 40.0, 43.0}, hi{-1.5, 0.25, 43.0, 46.0}, all{-1.5, 0.25, 40.0, 46.0};
  const int nlo = count_roots(lo, d), nhi = count_roots(hi, d);
  CHECK(nlo + nhi == count_roots(all, d));
  CHECK(nlo + nhi > 0);
}

TEST_CASE("reference spectrum: two roots per period and the real-part trends") {
  const auto c = reference_config();
  const auto res = compute_spectrum(c, 30, 60);
  CHECK(res.windows.size() == 31);
  for (const auto& w : res.windows) CHECK(w.counted == 2);
  CHECK(res.roots.size() == 4 * 31);
  double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {0, 0, 0};
  for (const auto& e : res.roots) {
    CHECK(e.lambda.real() <= 0.0);
    CHECK(e.residual < 1e-10);
    if (e.k < 45) continue;  // upper half of the range
    const double t = std::abs(e.lambda.real()) * std::pow(e.k, trend_exponent(e.family, 0.5));
    lo[e.family] = std::min(lo[e.family], t);
    hi[e.family] = std::max(hi[e.family], t);
  }
  CHECK(hi[1] / lo[1] < 1.1);
  CHECK(hi[2] / lo[2] < 1.1);
  // the family-1 level singles out the r^-tau constant, family 2 the r^(4-tau) one
  const auto b1 = beta1_candidates(c);
  const auto b2 = beta2_candidates(c);
  CHECK(std::abs(hi[1] / std::abs(b1[0].value) - 1.0) < 0.1);
  CHECK(std::abs(hi[1] / std::abs(b1[1].value) - 1.0) > 0.15);
  CHECK(std::abs(hi[2] / std::abs(b2[0].value) - 1.0) < 0.1);
  CHECK(std::abs(hi[2] / std::abs(b2[1].value) - 1.0) > 0.15);
}

TEST_CASE("closed form and shooting share roots") {
  const auto c = reference_config();
  RefineOptions opt;
  opt.method = Method::shooting;
  for (int fam : {1, 2}) {
    const cplx s = asymptotic_seed(fam, 11, c, SeedVariant::corrected);
    const auto a = refine_root(s, c);
    const auto b = refine_root(s, c, opt);
    CHECK(std::abs(a.lambda - b.lambda) < 1e-8);
  }
}

TEST_CASE("tau = 1 spectrum: damper family on the log line, coupled family ~ upsilon / k^2") {
  const auto c = direct_config();
  const auto res = compute_spectrum(c, 10, 40);
  for (const auto& e : res.roots) {
    if (e.k != 40) continue;
    if (e.family == 1) {
      CHECK(std::abs(e.lambda.real() / std::log(std::sqrt(1.0 / 3.0)) - 1.0) < 0.01);
    } else {
      CHECK(std::abs(std::abs(e.lambda.real()) * 1600.0 / upsilon(c) - 1.0) < 0.15);
    }
  }
}

TEST_CASE("coupled family real parts scale like alpha^2") {
  auto c = reference_config();
  const cplx s = asymptotic_seed(2, 20, c, SeedVariant::corrected);
  const double r1 = refine_root(s, c).lambda.real();
  c.alpha = 0.05;
  const double r2 = refine_root(s, c).lambda.real();
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("mis-offset seeds surface as a count mismatch") {
  SpectrumOptions opt;
  opt.seeds = SeedVariant::as_stated;
  CHECK_THROWS_AS(compute_spectrum(reference_config(), 30, 40, opt), CountMismatchError);
}

TEST_CASE("exponential-stability witness") {
  auto c = reference_config();
  const auto mesh = discretize::build_mesh(128, model::default_grading(0.5));
  double prev = 1e300;
  for (int n = 1; n <= 5; ++n) {
    const auto w = exp_stability_witness(c, mesh, n);
    CHECK(w.ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(w.value < prev);
    prev = w.value;
  }
  c.alpha = 0.0;
  CHECK(exp_stability_witness(c, mesh, 2).value < 1e-20);
  auto d = direct_config();
  CHECK(exp_stability_witness(d, mesh, 3).ratio == doctest::Approx(1.0).epsilon(1e-9));
}
