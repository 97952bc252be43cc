#include <cmath>

#include "degenwave/timestep.hpp"
#include "doctest.h"

using namespace degenwave;
using namespace degenwave::timestep;
using discretize::build_mesh;

namespace {

model::ProblemConfig reference_config() {
  model::ProblemConfig c;
  c.profile = model::DegeneracyProfile::power(0.5);
  c.alpha = 0.1;
  c.beta = 1.0;
  c.kernel = {0.5, 1.0, 1.0};
  return c;
}

double total(const SimState& s, const SystemMatrices& m, const fracdiff::DiffusiveQuadrature& q,
             const fracdiff::FractionalKernel& k) {
  return discretize::discrete_energy(s, m, q, k).total();
}

}  // namespace

TEST_CASE("gaussian bump respects the constraints") {
  const auto cfg = reference_config();
  const auto mats = discretize::assemble(cfg, build_mesh(16, 1.0));
  const auto q = fracdiff::make_quadrature(cfg.kernel, 20, 0.1, 10.0);
  InitialSpec spec;
  spec.kind = InitialKind::gaussian_bump;
  spec.target = InitialTarget::both;
  const auto s = initial_state(mats, q, spec);
  CHECK(s.u[0] == 0.0);
  CHECK(s.v[0] == 0.0);
  CHECK(s.v[16] == 0.0);
  CHECK(s.u[8] == doctest::Approx(1.0));
  for (double p : s.diff.phi) CHECK(p == 0.0);
}

TEST_CASE("first eigenmode has the right Rayleigh quotient") {
  const auto cfg = reference_config();
  const auto mats = discretize::assemble(cfg, build_mesh(32, 4.0 / 3.0));
  const auto q = fracdiff::make_quadrature(cfg.kernel, 20, 0.1, 10.0);
  InitialSpec spec;
  spec.target = InitialTarget::v;
  const auto s = initial_state(mats, q, spec);
  const double mu = discretize::decoupled_eigenpairs(mats, 1).values[0];
  CHECK(s.v.dot(mats.K * s.v) / s.v.dot(mats.M * s.v) == doctest::Approx(mu).epsilon(1e-12));
  CHECK(s.u.norm() == 0.0);
}

TEST_CASE("custom data violating v(1) = 0 is rejected") {
  const auto cfg = reference_config();
  const auto mats = discretize::assemble(cfg, build_mesh(8, 1.0));
  const auto q = fracdiff::make_quadrature(cfg.kernel, 20, 0.1, 10.0);
  InitialSpec spec;
  spec.kind = InitialKind::custom;
  spec.v.assign(9, 0.0);
  spec.v[8] = 1.0;
  CHECK_THROWS_AS(initial_state(mats, q, spec), IncompatibleDataError);
  spec.v[8] = 0.0;
  spec.v[4] = 1.0;
  spec.u.assign(3, 0.0);
  CHECK_THROWS_AS(initial_state(mats, q, spec), IncompatibleDataError);
  spec.u.clear();
  CHECK_NOTHROW(initial_state(mats, q, spec));
}

TEST_CASE("undamped uncoupled system conserves energy and is reversible") {
  auto cfg = reference_config();
  cfg.alpha = 0.0;
  cfg.kernel.rho = 0.0;
  const auto mats = discretize::assemble(cfg, build_mesh(32, 4.0 / 3.0));
  const auto q = fracdiff::make_quadrature(cfg.kernel, 20, 0.1, 10.0);
  InitialSpec spec;
  spec.kind = InitialKind::gaussian_bump;
  spec.target = InitialTarget::both;
  const auto s0 = initial_state(mats, q, spec);
  const double e0 = total(s0, mats, q, cfg.kernel);

  const Stepper fwd(mats, q, cfg.kernel, 1e-3);
  const Stepper back(mats, q, cfg.kernel, -1e-3);
  auto s = s0;
  for (int i = 0; i < 1000; ++i) fwd.advance(s);
  CHECK(std::abs(total(s, mats, q, cfg.kernel) - e0) < 1e-12 * e0);
  for (int i = 0; i < 1000; ++i) back.advance(s);
  CHECK((s.u - s0.u).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((s.v - s0.v).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((s.ut - s0.ut).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((s.vt - s0.vt).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("negative step with damping is refused") {
  const auto cfg = reference_config();
  const auto mats = discretize::assemble(cfg, build_mesh(8, 1.0));
  const auto q = fracdiff::make_quadrature(cfg.kernel, 20, 0.1, 10.0);
  CHECK_THROWS_AS(Stepper(mats, q, cfg.kernel, -1e-3), DomainError);
}

TEST_CASE("damped energy never increases") {
  for (double tau : {0.2, 0.5, 0.9, 1.0}) {
    auto cfg = reference_config();
    cfg.kernel.tau = tau;
    const auto mats = discretize::assemble(cfg, build_mesh(32, 4.0 / 3.0));
    const auto q = tau < 1.0 ? fracdiff::build_quadrature(cfg.kernel) : fracdiff::DiffusiveQuadrature{};
    InitialSpec spec;
    spec.kind = InitialKind::gaussian_bump;
    spec.target = InitialTarget::both;
    auto s = initial_state(mats, q, spec);
    const double e0 = total(s, mats, q, cfg.kernel);
    const Stepper st(mats, q, cfg.kernel, 5e-3);
    double prev = e0;
    for (int i = 0; i < 2000; ++i) {
      st.advance(s);
      const double e = total(s, mats, q, cfg.kernel);
      CHECK(e <= prev + 1e-13 * e0);
      prev = e;
    }
    CHECK(prev < 0.999 * e0);
  }
}

TEST_CASE("discrete energy balance is consistent with the dissipation law") {
  auto cfg = reference_config();
  const auto mats = discretize::assemble(cfg, build_mesh(16, 1.0));
  const auto q = fracdiff::make_quadrature(cfg.kernel, 60, 1e-2, 1e2);
  InitialSpec spec;
  spec.kind = InitialKind::gaussian_bump;
  spec.target = InitialTarget::u;
  spec.width = 0.2;
  auto residual = [&](double dt) {
    auto s = initial_state(mats, q, spec);
    // warm up so the field is nonzero, then measure one step
    const Stepper warm(mats, q, cfg.kernel, 1e-3);
    for (int i = 0; i < 200; ++i) warm.advance(s);
    const Stepper st(mats, q, cfg.kernel, dt);
    const double e0 = total(s, mats, q, cfg.kernel);
    auto n = s;
    st.advance(n);
    const double e1 = total(n, mats, q, cfg.kernel);
    fracdiff::DiffusiveState mid = s.diff;
    for (std::size_t j = 0; j < mid.phi.size(); ++j) mid.phi[j] = 0.5 * (s.diff.phi[j] + n.diff.phi[j]);
    return std::abs(e1 - e0 + dt * fracdiff::dissipation_rate(mid, q, cfg.kernel));
  };
  const double r1 = residual(1e-3);
  const double r2 = residual(5e-4);
  const double r3 = residual(2.5e-4);
  CHECK(r1 / r2 > 5.0);
  CHECK(r2 / r3 > 5.0);
}

TEST_CASE("N = 2 system matches an RK4 oracle") {
  auto cfg = reference_config();
  const auto mats = discretize::assemble(cfg, build_mesh(2, 1.0));
  const auto q = fracdiff::make_quadrature(cfg.kernel, 12, 0.2, 8.0);
  const double zeta = cfg.kernel.zeta();
  const Eigen::MatrixXd M(mats.M), K(mats.K);
  // free dofs: u at nodes 1, 2; v at node 1
  const int m = static_cast<int>(q.size());
  const int n = 6 + m;  // u1 u2 v1 ut1 ut2 vt1 phi...
  Eigen::MatrixXd Mu(2, 2), Ku(2, 2);
  Mu << M(1, 1), M(1, 2), M(2, 1), M(2, 2);
  Ku << K(1, 1), K(1, 2), K(2, 1), K(2, 2);
  Ku(1, 1) += cfg.beta;
  const Eigen::MatrixXd Muinv = Mu.inverse();
  auto rhs = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd d(n);
    d.segment(0, 3) = y.segment(3, 3);
    double F = 0.0;
    for (int j = 0; j < m; ++j) F += zeta * q.weights[j] * q.theta[j] * y[6 + j];
    Eigen::Vector2d fu;
    fu[0] = -(Ku(0, 0) * y[0] + Ku(0, 1) * y[1]) - cfg.alpha * M(1, 1) * y[2];
    fu[1] = -(Ku(1, 0) * y[0] + Ku(1, 1) * y[1]) - cfg.alpha * M(2, 1) * y[2] - F;
    d.segment(3, 2) = Muinv * fu;
    d[5] = (-K(1, 1) * y[2] - cfg.alpha * (M(1, 1) * y[0] + M(1, 2) * y[1])) / M(1, 1);
    for (int j = 0; j < m; ++j) {
      const double s = q.nodes[j];
      d[6 + j] = -(s * s + cfg.kernel.omega) * y[6 + j] + q.theta[j] * y[4];
    }
    return d;
  };
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  y[0] = 0.3;
  y[1] = 1.0;
  y[2] = -0.5;
  y[4] = 0.2;
  const double h = 1e-5;
  for (int i = 0; i < 100000; ++i) {
    const auto k1 = rhs(y);
    const auto k2 = rhs(y + 0.5 * h * k1);
    const auto k3 = rhs(y + 0.5 * h * k2);
    const auto k4 = rhs(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }

  InitialSpec spec;
  spec.kind = InitialKind::custom;
  spec.u = {0.0, 0.3, 1.0};
  spec.v = {0.0, -0.5, 0.0};
  spec.ut = {0.0, 0.0, 0.2};
  auto s = initial_state(mats, q, spec);
  const Stepper st(mats, q, cfg.kernel, 1e-5);
  for (int i = 0; i < 100000; ++i) st.advance(s);
  CHECK(std::abs(s.u[1] - y[0]) < 1e-6);
  CHECK(std::abs(s.u[2] - y[1]) < 1e-6);
  CHECK(std::abs(s.v[1] - y[2]) < 1e-6);
  CHECK(std::abs(s.ut[2] - y[4]) < 1e-6);
  for (int j = 0; j < m; ++j) CHECK(std::abs(s.diff.phi[j] - y[6 + j]) < 1e-6);
}

TEST_CASE("simulate: sampling and basic contracts") {
  const auto cfg = reference_config();
  SimulateOptions opt;
  opt.n_cells = 16;
  opt.t_final = 0.0;
  auto tr = simulate(cfg, opt);
  CHECK(tr.samples.size() == 1);
  CHECK(tr.samples[0].split.total() == doctest::Approx(tr.initial_energy));

  opt.t_final = 50.0;
  opt.dt = 1e-2;
  tr = simulate(cfg, opt);
  CHECK(tr.samples.back().t == doctest::Approx(50.0));
  CHECK(tr.steps == 5000);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) CHECK(tr.samples[i].t > tr.samples[i - 1].t);
  // 40 per decade, except that early samples cannot be closer than dt
  CHECK(tr.samples.size() > 110);
  CHECK(tr.samples.size() < 160);
  CHECK(tr.max_step_increase <= 1e-10 * tr.initial_energy);
  CHECK(tr.quadrature_error < 1e-6);

  opt.n_cells = 4;
  CHECK_THROWS_AS(simulate(cfg, opt), DomainError);
  auto bad = cfg;
  bad.alpha = 5.0;
  opt.n_cells = 16;
  CHECK_THROWS_AS(simulate(bad, opt), ConfigError);
}

TEST_CASE("damped run decreases strictly after the first period") {
  const auto cfg = reference_config();
  SimulateOptions opt;
  opt.n_cells = 32;
  opt.t_final = 40.0;
  opt.dt = 1e-2;
  opt.initial.target = InitialTarget::both;
  const auto tr = simulate(cfg, opt);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    if (tr.samples[i - 1].t > 5.0) CHECK(tr.samples[i].split.total() < tr.samples[i - 1].split.total());
  }
}

TEST_CASE("default time step") {
  const auto mesh = build_mesh(128, 4.0 / 3.0);
  CHECK(default_dt(mesh, model::DegeneracyProfile::power(0.5)) == doctest::Approx(mesh.h_min()));
  CHECK(default_dt(build_mesh(8, 1.0), model::DegeneracyProfile::power(0.0)) == 1e-2);
}
