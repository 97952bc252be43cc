#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "degenwave/fracdiff.hpp"
#include "degenwave/model.hpp"

namespace degenwave::discretize {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct Mesh {
  std::vector<double> x;  // x_0 = 0 < ... < x_N = 1
  double grading = 1.0;

  int cells() const { return static_cast<int>(x.size()) - 1; }
  double h_min() const;
};

/// x_i = (i/N)^g. N >= 2, g >= 1.
Mesh build_mesh(int N, double grading);

/// Linear-element matrices over all N+1 nodes. Constraints are recorded in
/// the masks, not eliminated; the boundary stiffness beta is kept apart
/// (it only touches u's last row).
struct SystemMatrices {
  Mesh mesh;
  SpMat M;
  SpMat K;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<bool> u_fixed;
  std::vector<bool> v_fixed;

  int nodes() const { return static_cast<int>(mesh.x.size()); }
  int last() const { return nodes() - 1; }
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

SystemMatrices assemble(const model::ProblemConfig& config, const Mesh& mesh);

/// Nodal displacements and velocities plus the diffusive field.
struct SimState {
  Vec u, ut, v, vt;
  fracdiff::DiffusiveState diff;
  double t = 0.0;
};

struct DiscreteEnergySplit {
  double kinetic = 0.0;
  double potential = 0.0;
  double coupling = 0.0;
  double boundary = 0.0;
  double diffusive = 0.0;

  double total() const { return kinetic + potential + coupling + boundary + diffusive; }
};

DiscreteEnergySplit discrete_energy(const SimState& state, const SystemMatrices& mats,
                                    const fracdiff::DiffusiveQuadrature& quad,
                                    const fracdiff::FractionalKernel& kernel);

/// Matrix restricted to the free dofs given by the mask.
SpMat restrict(const SpMat& A, const std::vector<bool>& fixed);
/// Scatter free values back into a full nodal vector (zeros at fixed dofs).
Vec expand(const Vec& free, const std::vector<bool>& fixed);
std::vector<int> free_indices(const std::vector<bool>& fixed);

struct Eigenpairs {
  std::vector<double> values;   // ascending
  std::vector<Vec> vectors;     // full nodal vectors, M-orthonormal
};

/// Lowest `count` eigenpairs of K e = mu M e with the v constraints
/// (the decoupled problem with v(1) = 0). Dense solver, meant for N <= ~1000.
Eigenpairs decoupled_eigenpairs(const SystemMatrices& mats, int count);

/// Symmetric matrix of the potential part of the energy (stiffness, beta
/// term, coupling) over the free u and v dofs.
Eigen::MatrixXd potential_form(const SystemMatrices& mats);

}  // namespace degenwave::discretize
