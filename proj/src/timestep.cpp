#include "degenwave/timestep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace degenwave::timestep {

using discretize::SpMat;

InitialKind parse_initial_kind(const std::string& s) {
  if (s == "first_eigenmode") return InitialKind::first_eigenmode;
  if (s == "gaussian_bump") return InitialKind::gaussian_bump;
  if (s == "custom") return InitialKind::custom;
  throw ConfigError("unknown initial kind '" + s + "'");
}

InitialTarget parse_initial_target(const std::string& s) {
  if (s == "u") return InitialTarget::u;
  if (s == "v") return InitialTarget::v;
  if (s == "both") return InitialTarget::both;
  throw ConfigError("unknown initial target '" + s + "'");
}

const char* to_string(InitialKind k) {
  switch (k) {
    case InitialKind::first_eigenmode: return "first_eigenmode";
    case InitialKind::gaussian_bump: return "gaussian_bump";
    case InitialKind::custom: return "custom";
  }
  return "?";
}

const char* to_string(InitialTarget t) {
  switch (t) {
    case InitialTarget::u: return "u";
    case InitialTarget::v: return "v";
    case InitialTarget::both: return "both";
  }
  return "?";
}

namespace {

Vec from_samples(const std::vector<double>& s, int n, const char* name) {
  if (s.empty()) return Vec::Zero(n);
  if (static_cast<int>(s.size()) != n) {
    throw IncompatibleDataError(std::string("custom ") + name + " has " + std::to_string(s.size()) +
                                " samples, mesh has " + std::to_string(n) + " nodes");
  }
  return Eigen::Map<const Vec>(s.data(), n);
}

void check_constraints(const Vec& f, const std::vector<bool>& fixed, const char* name) {
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (fixed[i] && f[static_cast<Eigen::Index>(i)] != 0.0) {
      throw IncompatibleDataError(std::string("initial ") + name + " is nonzero at constrained node " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

SimState initial_state(const SystemMatrices& mats, const fracdiff::DiffusiveQuadrature& quad,
                       const InitialSpec& spec) {
  const int n = mats.nodes();
  SimState s;
  s.u = s.ut = s.v = s.vt = Vec::Zero(n);
  s.diff = fracdiff::zero_state(quad);
  const bool to_u = spec.target != InitialTarget::v;
  const bool to_v = spec.target != InitialTarget::u;

  switch (spec.kind) {
    case InitialKind::first_eigenmode: {
      // the v problem carries the stricter constraints, so its mode is
      // admissible for u as well
      const Vec e = discretize::decoupled_eigenpairs(mats, 1).vectors.at(0);
      if (to_u) s.u = e;
      if (to_v) s.v = e;
      break;
    }
    case InitialKind::gaussian_bump: {
      Vec b(n);
      for (int i = 0; i < n; ++i) {
        const double z = (mats.mesh.x[i] - spec.center) / spec.width;
        b[i] = std::exp(-z * z);
      }
      if (to_u) {
        s.u = b;
        for (int i = 0; i < n; ++i) {
          if (mats.u_fixed[i]) s.u[i] = 0.0;
        }
      }
      if (to_v) {
        s.v = b;
        for (int i = 0; i < n; ++i) {
          if (mats.v_fixed[i]) s.v[i] = 0.0;
        }
      }
      break;
    }
    case InitialKind::custom:
      s.u = from_samples(spec.u, n, "u");
      s.ut = from_samples(spec.ut, n, "u_t");
      s.v = from_samples(spec.v, n, "v");
      s.vt = from_samples(spec.vt, n, "v_t");
      break;
  }
  check_constraints(s.u, mats.u_fixed, "u");
  check_constraints(s.ut, mats.u_fixed, "u_t");
  check_constraints(s.v, mats.v_fixed, "v");
  check_constraints(s.vt, mats.v_fixed, "v_t");
  return s;
}

Stepper::Stepper(const SystemMatrices& mats, const fracdiff::DiffusiveQuadrature& quad,
                 const fracdiff::FractionalKernel& kernel, double dt)
    : mats_(mats), quad_(quad), kernel_(kernel), dt_(dt), n_(mats.nodes()) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw DomainError("time step must be nonzero");
  if (dt < 0.0 && kernel.rho != 0.0) throw DomainError("time step must be positive with damping");

  field_ = !kernel.is_direct() && kernel.rho != 0.0;
  if (kernel.is_direct()) {
    direct_gain_ = kernel.rho;
  } else if (field_) {
    coef_ = fracdiff::step_coefficients(quad, kernel, dt);
    const double zeta = kernel.zeta();
    hist_.resize(quad.size());
    for (std::size_t j = 0; j < quad.size(); ++j) {
      const double th = coef_.stage[j];
      const double wt = zeta * quad.weights[j] * quad.theta[j];
      hist_[j] = wt * (th * coef_.decay[j] + 1.0 - th);
      direct_gain_ += wt * th * coef_.gain[j] * quad.theta[j];
    }
  }

  // unknowns: midpoint velocities, u at 2i and v at 2i+1
  const int N = mats.last();
  auto fixed = [&](int row) { return row % 2 == 0 ? mats.u_fixed[row / 2] : mats.v_fixed[row / 2]; };
  const double h2 = 0.5 * dt * dt;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(8 * mats.M.nonZeros());
  auto add = [&](int r, int c, double v) {
    if (!fixed(r) && !fixed(c)) t.emplace_back(r, c, v);
  };
  for (int c = 0; c < mats.M.outerSize(); ++c) {
    for (SpMat::InnerIterator it(mats.M, c); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      add(2 * i, 2 * j, 2.0 * it.value());
      add(2 * i + 1, 2 * j + 1, 2.0 * it.value());
      add(2 * i, 2 * j + 1, h2 * mats.alpha * it.value());
      add(2 * i + 1, 2 * j, h2 * mats.alpha * it.value());
    }
  }
  for (int c = 0; c < mats.K.outerSize(); ++c) {
    for (SpMat::InnerIterator it(mats.K, c); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      add(2 * i, 2 * j, h2 * it.value());
      add(2 * i + 1, 2 * j + 1, h2 * it.value());
    }
  }
  add(2 * N, 2 * N, h2 * mats.beta + dt * direct_gain_);
  for (int r = 0; r < 2 * n_; ++r) {
    if (fixed(r)) {
      t.emplace_back(r, r, 1.0);
      fixed_rows_.push_back(r);
    }
  }
  SpMat A(2 * n_, 2 * n_);
  A.setFromTriplets(t.begin(), t.end());
  solver_.compute(A);
  if (solver_.info() != Eigen::Success) throw SolverError("factorization of the step matrix failed");
}

void Stepper::advance(SimState& s) const {
  const int N = mats_.last();
  const double dt = dt_;
  double f_hist = 0.0;
  if (field_) {
    for (std::size_t j = 0; j < hist_.size(); ++j) f_hist += hist_[j] * s.diff.phi[j];
  }
  const Vec Mu = mats_.M * s.u;
  const Vec Mv = mats_.M * s.v;
  Vec ru = 2.0 * (mats_.M * s.ut) - dt * (mats_.K * s.u + mats_.alpha * Mv);
  const Vec rv = 2.0 * (mats_.M * s.vt) - dt * (mats_.K * s.v + mats_.alpha * Mu);
  ru[N] -= dt * (mats_.beta * s.u[N] + f_hist);

  Vec rhs(2 * n_);
  for (int i = 0; i < n_; ++i) {
    rhs[2 * i] = ru[i];
    rhs[2 * i + 1] = rv[i];
  }
  for (int r : fixed_rows_) rhs[r] = 0.0;
  const Vec sol = solver_.solve(rhs);
  if (solver_.info() != Eigen::Success || !sol.allFinite()) throw SolverError("step solve failed");

  for (int i = 0; i < n_; ++i) {
    const double pbar = sol[2 * i], qbar = sol[2 * i + 1];
    s.u[i] += dt * pbar;
    s.v[i] += dt * qbar;
    s.ut[i] = 2.0 * pbar - s.ut[i];
    s.vt[i] = 2.0 * qbar - s.vt[i];
  }
  if (field_) {
    const double U = sol[2 * N];
    for (std::size_t j = 0; j < s.diff.phi.size(); ++j) {
      s.diff.phi[j] = coef_.decay[j] * s.diff.phi[j] + coef_.gain[j] * quad_.theta[j] * U;
    }
  }
  s.t += dt;
  s.diff.time = s.t;
}

SimState step(const SimState& state, const SystemMatrices& mats,
              const fracdiff::DiffusiveQuadrature& quad, const fracdiff::FractionalKernel& kernel,
              double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  Stepper st(mats, quad, kernel, dt);
  SimState next = state;
  st.advance(next);
  return next;
}

double default_dt(const discretize::Mesh& mesh, const model::DegeneracyProfile& profile) {
  double amax = 0.0;
  for (double x : mesh.x) {
    if (x > 0.0) amax = std::max(amax, profile.a(x));
  }
  return std::min(mesh.h_min() / std::sqrt(amax), 1e-2);
}

EnergyTrace simulate(const model::ProblemConfig& config, const SimulateOptions& opt) {
  const auto check = model::validate(config);
  if (!check.ok()) {
    std::string msg = "config rejected:";
    for (const auto& v : check.errors()) msg += " [" + v.code + "] " + v.message + ";";
    throw ConfigError(msg);
  }
  if (opt.n_cells < 8) throw DomainError("simulate needs at least 8 cells");
  if (!(opt.t_final >= 0.0)) throw DomainError("t_final must be >= 0");

  const double grading = opt.grading > 0.0 ? opt.grading : model::default_grading(check.m_a);
  const auto mesh = discretize::build_mesh(opt.n_cells, grading);
  const auto mats = discretize::assemble(config, mesh);

  EnergyTrace trace;
  fracdiff::DiffusiveQuadrature quad;
  if (!config.kernel.is_direct()) {
    quad = fracdiff::build_quadrature(config.kernel, opt.quad_nodes, opt.sigma_min, opt.sigma_max);
    trace.quadrature_error = quad.certified_error;
  }
  SimState s = initial_state(mats, quad, opt.initial);

  auto sample = [&](const SimState& st) {
    EnergySample e;
    e.t = st.t;
    e.split = discretize::discrete_energy(st, mats, quad, config.kernel);
    if (!config.kernel.is_direct()) e.dissipation = fracdiff::dissipation_rate(st.diff, quad, config.kernel);
    else e.dissipation = config.kernel.rho * st.ut[mats.last()] * st.ut[mats.last()];
    return e;
  };
  trace.samples.push_back(sample(s));
  trace.initial_energy = trace.samples.front().split.total();
  if (opt.t_final == 0.0) return trace;

  const double dt0 = opt.dt > 0.0 ? opt.dt : default_dt(mesh, config.profile);
  const long nsteps = static_cast<long>(std::ceil(opt.t_final / dt0 - 1e-9));
  const double dt = opt.t_final / static_cast<double>(nsteps);
  trace.dt = dt;
  const Stepper stepper(mats, quad, config.kernel, dt);

  const double ratio = std::pow(10.0, 1.0 / std::max(1, opt.samples_per_decade));
  double next_sample = dt;
  double prev = trace.initial_energy;
  for (long k = 1; k <= nsteps; ++k) {
    stepper.advance(s);
    s.t = k * dt;  // avoid drift from repeated addition
    const auto split = discretize::discrete_energy(s, mats, quad, config.kernel);
    const double e = split.total();
    if (!std::isfinite(e) || std::abs(e) > 1e200) {
      trace.steps = k;
      std::ostringstream msg;
      msg << "solution blew up at t = " << s.t << " (energy " << e << ", last sampled "
          << trace.samples.back().split.total() << " at t = " << trace.samples.back().t << ")";
      throw BlowUpError(msg.str(), trace);
    }
    trace.max_step_increase = std::max(trace.max_step_increase, e - prev);
    prev = e;
    if (s.t >= next_sample * (1.0 - 1e-12) || k == nsteps) {
      trace.samples.push_back(sample(s));
      while (next_sample <= s.t * (1.0 + 1e-12)) next_sample *= ratio;
    }
  }
  trace.steps = nsteps;
  return trace;
}

}  // namespace degenwave::timestep
