#include <cmath>
#include <numbers>

#include "degenwave/discretize.hpp"
#include "degenwave/specfun.hpp"
#include "doctest.h"

using namespace degenwave;
using namespace degenwave::discretize;

namespace {

model::ProblemConfig power_config(double gamma, double alpha = 0.1, double beta = 1.0) {
  model::ProblemConfig c;
  c.profile = model::DegeneracyProfile::power(gamma);
  c.alpha = alpha;
  c.beta = beta;
  c.kernel = {0.5, 1.0, 1.0};
  return c;
}

double first_bessel_eigenvalue(double gamma) {
  const double j = specfun::bessel_zero(model::nu_gamma(gamma), 1);
  return std::pow((2.0 - gamma) / 2.0, 2) * j * j;
}

}  // namespace

TEST_CASE("mesh construction") {
  const auto m1 = build_mesh(4, 1.0);
  const std::vector<double> u{0, 0.25, 0.5, 0.75, 1};
  for (int i = 0; i <= 4; ++i) CHECK(m1.x[i] == doctest::Approx(u[i]));
  const auto m2 = build_mesh(4, 2.0);
  const std::vector<double> g{0, 0.0625, 0.25, 0.5625, 1};
  for (int i = 0; i <= 4; ++i) CHECK(m2.x[i] == doctest::Approx(g[i]));
  CHECK(m2.h_min() == doctest::Approx(0.0625));
  CHECK_THROWS_AS(build_mesh(1, 1.0), DomainError);
  CHECK_THROWS_AS(build_mesh(8, 0.5), DomainError);
}

TEST_CASE("non-degenerate stiffness is the classical Laplacian") {
  const auto s = assemble(power_config(0.0), build_mesh(8, 1.0));
  const Eigen::MatrixXd K(s.K);
  for (int i = 1; i < 8; ++i) {
    CHECK(K(i, i) == doctest::Approx(16.0));
    CHECK(K(i, i - 1) == doctest::Approx(-8.0));
  }
  CHECK(K(0, 0) == doctest::Approx(8.0));
  const Eigen::MatrixXd M(s.M);
  CHECK(M(3, 3) == doctest::Approx(2.0 / 24.0));
  CHECK(M(3, 4) == doctest::Approx(1.0 / 48.0));
}

TEST_CASE("symmetry and vanishing row sums") {
  const auto s = assemble(power_config(0.5), build_mesh(8, 4.0 / 3.0));
  const Eigen::MatrixXd K(s.K), M(s.M);
  CHECK((K - K.transpose()).norm() == 0.0);
  CHECK((M - M.transpose()).norm() == 0.0);
  for (int i = 0; i <= 8; ++i) CHECK(std::abs(K.row(i).sum()) < 1e-13);
  CHECK(s.u_fixed[0]);
  CHECK(s.v_fixed[0]);
  CHECK(s.v_fixed[8]);
  CHECK_FALSE(s.u_fixed[8]);
}

TEST_CASE("Neumann regime leaves x = 0 free") {
  const auto s = assemble(power_config(1.5), build_mesh(8, 4.0));
  CHECK_FALSE(s.u_fixed[0]);
  CHECK_FALSE(s.v_fixed[0]);
  CHECK(s.v_fixed[8]);
  CHECK_THROWS_AS(assemble(power_config(1.5, 0.1, 0.0), build_mesh(8, 4.0)), AssemblyError);
}

TEST_CASE("first decoupled eigenvalue converges to the Bessel value") {
  for (double gamma : {0.0, 0.5, 1.5}) {
    const double exact = first_bessel_eigenvalue(gamma);
    const double g = model::default_grading(gamma);
    std::vector<double> errs;
    for (int n : {16, 32, 64, 128}) {
      const auto s = assemble(power_config(gamma), build_mesh(n, g));
      const double mu = decoupled_eigenpairs(s, 1).values[0];
      errs.push_back(std::abs(mu - exact) / exact);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) CHECK(errs[i] < errs[i - 1]);
    const double rate = std::log2(errs.front() / errs.back()) / 3.0;
    CHECK(rate > 0.5);
  }
}

TEST_CASE("strong grading resolves the degenerate endpoint") {
  const double exact = first_bessel_eigenvalue(0.5);
  const auto s = assemble(power_config(0.5), build_mesh(128, 4.0));
  CHECK(std::abs(decoupled_eigenpairs(s, 1).values[0] - exact) < 5e-4 * exact);
}

TEST_CASE("eigenmodes are M-orthonormal") {
  const auto s = assemble(power_config(0.5), build_mesh(32, 4.0 / 3.0));
  const auto ep = decoupled_eigenpairs(s, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(ep.vectors[i].dot(s.M * ep.vectors[j]) == doctest::Approx(i == j ? 1.0 : 0.0));
    }
    CHECK(ep.vectors[i][0] == 0.0);
    CHECK(ep.vectors[i][32] == 0.0);
  }
}

TEST_CASE("energy components") {
  const auto cfg = power_config(0.5);
  const auto s = assemble(cfg, build_mesh(16, 1.0));
  const auto q = fracdiff::make_quadrature(cfg.kernel, 20, 0.1, 10.0);
  SimState st;
  st.u = st.ut = st.v = st.vt = Vec::Zero(17);
  st.diff = fracdiff::zero_state(q);
  auto e = discrete_energy(st, s, q, cfg.kernel);
  CHECK(e.total() == 0.0);

  double acc = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    st.diff.phi[j] = 0.1 * (j + 1);
    acc += q.weights[j] * st.diff.phi[j] * st.diff.phi[j];
  }
  e = discrete_energy(st, s, q, cfg.kernel);
  CHECK(e.total() == doctest::Approx(0.5 * cfg.kernel.zeta() * acc));
  CHECK(e.kinetic == 0.0);

  st.diff = fracdiff::zero_state(q);
  const auto ep = decoupled_eigenpairs(s, 1);
  st.vt = ep.vectors[0];
  e = discrete_energy(st, s, q, cfg.kernel);
  CHECK(e.kinetic == doctest::Approx(0.5));
  CHECK(e.total() == doctest::Approx(0.5));
}

TEST_CASE("energy form is positive definite for validated configs") {
  for (double gamma : {0.0, 0.5, 0.9, 1.2, 1.5}) {
    for (double alpha : {-0.3, 0.1, 0.4}) {
      auto cfg = power_config(gamma, alpha, 1.0);
      if (!model::validate(cfg).ok()) continue;
      for (int n : {8, 32, 64}) {
        const auto s = assemble(cfg, build_mesh(n, model::default_grading(gamma)));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(potential_form(s));
        CHECK(es.eigenvalues()[0] > 0.0);
      }
    }
  }
}

TEST_CASE("interpolation error of a smooth function decreases with refinement") {
  // in 1-D the nodal interpolant of x^2 is its Ritz projection (a = 1), so
  // |u - Iu|^2 = |u|^2 - (Iu)' K (Iu) with |u|^2 = 4/3
  std::vector<double> errs;
  for (int n : {8, 16, 32, 64}) {
    const auto mesh = build_mesh(n, 1.0);
    const auto s = assemble(power_config(0.0), mesh);
    Vec iu(n + 1);
    for (int i = 0; i <= n; ++i) iu[i] = mesh.x[i] * mesh.x[i];
    errs.push_back(std::sqrt(4.0 / 3.0 - iu.dot(s.K * iu)));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    CHECK(errs[i - 1] / errs[i] == doctest::Approx(2.0).epsilon(1e-3));
  }
}
