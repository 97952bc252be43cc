#include "degenwave/discretize.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace degenwave::discretize {

double Mesh::h_min() const {
  double h = x.back() - x.front();
  for (std::size_t i = 0; i + 1 < x.size(); ++i) h = std::min(h, x[i + 1] - x[i]);
  return h;
}

Mesh build_mesh(int N, double grading) {
  if (N < 2) throw DomainError("mesh needs at least 2 cells");
  if (!(grading >= 1.0)) throw DomainError("mesh grading must be >= 1");
  Mesh m;
  m.grading = grading;
  m.x.resize(N + 1);
  for (int i = 0; i <= N; ++i) m.x[i] = std::pow(static_cast<double>(i) / N, grading);
  m.x[0] = 0.0;
  m.x[N] = 1.0;
  return m;
}

namespace {

// int_{x0}^{x1} a(x) dx
double cell_integral(const model::DegeneracyProfile& p, double x0, double x1) {
  if (p.kind() == model::ProfileKind::power) {
    const double e = p.exponent() + 1.0;
    return (std::pow(x1, e) - std::pow(x0, e)) / e;
  }
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                               0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                               0.3478548451374538};
  const double mid = 0.5 * (x0 + x1);
  const double half = 0.5 * (x1 - x0);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += gw[i] * p.a(mid + half * gx[i]);
  return half * s;
}

}  // namespace

SystemMatrices assemble(const model::ProblemConfig& config, const Mesh& mesh) {
  const int n = static_cast<int>(mesh.x.size());
  if (n < 3) throw AssemblyError("mesh too small");
  SystemMatrices s;
  s.mesh = mesh;
  s.alpha = config.alpha;
  s.beta = config.beta;

  std::vector<Eigen::Triplet<double>> tm, tk;
  tm.reserve(4 * n);
  tk.reserve(4 * n);
  for (int e = 0; e + 1 < n; ++e) {
    const double h = mesh.x[e + 1] - mesh.x[e];
    const double m_diag = h / 3.0, m_off = h / 6.0;
    const double k = cell_integral(config.profile, mesh.x[e], mesh.x[e + 1]) / (h * h);
    tm.emplace_back(e, e, m_diag);
    tm.emplace_back(e + 1, e + 1, m_diag);
    tm.emplace_back(e, e + 1, m_off);
    tm.emplace_back(e + 1, e, m_off);
    tk.emplace_back(e, e, k);
    tk.emplace_back(e + 1, e + 1, k);
    tk.emplace_back(e, e + 1, -k);
    tk.emplace_back(e + 1, e, -k);
  }
  s.M.resize(n, n);
  s.K.resize(n, n);
  s.M.setFromTriplets(tm.begin(), tm.end());
  s.K.setFromTriplets(tk.begin(), tk.end());

  s.u_fixed.assign(n, false);
  s.v_fixed.assign(n, false);
  if (config.effective_regime() == model::Regime::dirichlet_at_0) {
    s.u_fixed[0] = true;
    s.v_fixed[0] = true;
  }
  s.v_fixed[n - 1] = true;
  if (config.effective_regime() == model::Regime::weighted_neumann_at_0 && !(config.beta > 0.0)) {
    // u would only be controlled through the damper; the static problem is singular
    throw AssemblyError("no constraint and no boundary stiffness on u (beta must be > 0)");
  }
  return s;
}

DiscreteEnergySplit discrete_energy(const SimState& st, const SystemMatrices& mats,
                                    const fracdiff::DiffusiveQuadrature& quad,
                                    const fracdiff::FractionalKernel& kernel) {
  DiscreteEnergySplit e;
  e.kinetic = 0.5 * (st.ut.dot(mats.M * st.ut) + st.vt.dot(mats.M * st.vt));
  e.potential = 0.5 * (st.u.dot(mats.K * st.u) + st.v.dot(mats.K * st.v));
  e.coupling = mats.alpha * st.u.dot(mats.M * st.v);
  const double uN = st.u[mats.last()];
  e.boundary = 0.5 * mats.beta * uN * uN;
  if (!kernel.is_direct() && !st.diff.phi.empty()) {
    double acc = 0.0;
    for (std::size_t j = 0; j < quad.size(); ++j) acc += quad.weights[j] * st.diff.phi[j] * st.diff.phi[j];
    e.diffusive = 0.5 * kernel.zeta() * acc;
  }
  return e;
}

std::vector<int> free_indices(const std::vector<bool>& fixed) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (!fixed[i]) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

SpMat restrict(const SpMat& A, const std::vector<bool>& fixed) {
  std::vector<int> map(fixed.size(), -1);
  int k = 0;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (!fixed[i]) map[i] = k++;
  }
  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      const int i = map[it.row()], j = map[it.col()];
      if (i >= 0 && j >= 0) t.emplace_back(i, j, it.value());
    }
  }
  SpMat R(k, k);
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

Vec expand(const Vec& free, const std::vector<bool>& fixed) {
  Vec full = Vec::Zero(static_cast<Eigen::Index>(fixed.size()));
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (!fixed[i]) full[static_cast<Eigen::Index>(i)] = free[k++];
  }
  return full;
}

Eigenpairs decoupled_eigenpairs(const SystemMatrices& mats, int count) {
  const Eigen::MatrixXd K(restrict(mats.K, mats.v_fixed));
  const Eigen::MatrixXd M(restrict(mats.M, mats.v_fixed));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, M);
  if (solver.info() != Eigen::Success) throw ConvergenceError("generalized eigensolver failed");
  Eigenpairs out;
  const int n = std::min<int>(count, static_cast<int>(K.rows()));
  for (int i = 0; i < n; ++i) {
    out.values.push_back(solver.eigenvalues()[i]);
    Vec e = solver.eigenvectors().col(i);
    // fix the sign so the mode is positive near x = 0
    Eigen::Index big = 0;
    e.cwiseAbs().maxCoeff(&big);
    for (Eigen::Index j = 0; j < e.size(); ++j) {
      if (std::abs(e[j]) > 1e-3 * std::abs(e[big])) {
        if (e[j] < 0) e = -e;
        break;
      }
    }
    out.vectors.push_back(expand(e, mats.v_fixed));
  }
  return out;
}

Eigen::MatrixXd potential_form(const SystemMatrices& mats) {
  const auto fu = free_indices(mats.u_fixed);
  const auto fv = free_indices(mats.v_fixed);
  const Eigen::MatrixXd K(mats.K), M(mats.M);
  const int nu = static_cast<int>(fu.size()), nv = static_cast<int>(fv.size());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(nu + nv, nu + nv);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nu; ++j) Q(i, j) = K(fu[i], fu[j]);
    if (fu[i] == mats.last()) Q(i, i) += mats.beta;
    for (int j = 0; j < nv; ++j) {
      Q(i, nu + j) = mats.alpha * M(fu[i], fv[j]);
      Q(nu + j, i) = Q(i, nu + j);
    }
  }
  for (int i = 0; i < nv; ++i) {
    for (int j = 0; j < nv; ++j) Q(nu + i, nu + j) = K(fv[i], fv[j]);
  }
  return Q;
}

}  // namespace degenwave::discretize
