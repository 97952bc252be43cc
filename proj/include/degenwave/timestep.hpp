#pragma once

#include <Eigen/SparseCholesky>
#include <memory>
#include <string>
#include <vector>

#include "degenwave/discretize.hpp"

namespace degenwave::timestep {

using discretize::SimState;
using discretize::SystemMatrices;
using discretize::Vec;

class IncompatibleDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

enum class InitialKind { first_eigenmode, gaussian_bump, custom };
/// Which field carries the initial displacement.
enum class InitialTarget { u, v, both };

struct InitialSpec {
  InitialKind kind = InitialKind::first_eigenmode;
  InitialTarget target = InitialTarget::v;
  double center = 0.5;
  double width = 0.1;
  // custom: full nodal vectors (size N+1), empty means zero
  std::vector<double> u, ut, v, vt;
};

InitialKind parse_initial_kind(const std::string& s);
InitialTarget parse_initial_target(const std::string& s);
const char* to_string(InitialKind k);
const char* to_string(InitialTarget t);

SimState initial_state(const SystemMatrices& mats, const fracdiff::DiffusiveQuadrature& quad,
                       const InitialSpec& spec);

/// One-step map of the coupled system. Wave blocks use the implicit
/// midpoint rule; each diffusive node is advanced exactly with the boundary
/// velocity held at its midpoint value, and the damper force is evaluated at
/// the stage value that makes the discrete energy balance exact (so the
/// energy cannot grow). The linear system is factorized once.
class Stepper {
 public:
  Stepper(const SystemMatrices& mats, const fracdiff::DiffusiveQuadrature& quad,
          const fracdiff::FractionalKernel& kernel, double dt);

  void advance(SimState& state) const;
  double dt() const { return dt_; }

 private:
  const SystemMatrices& mats_;
  const fracdiff::DiffusiveQuadrature& quad_;
  fracdiff::FractionalKernel kernel_;
  double dt_;
  bool field_ = false;  // diffusive field present and advanced
  fracdiff::StepCoefficients coef_;
  std::vector<double> hist_;  // per-node force factor on the old field
  double direct_gain_ = 0.0;  // d in F = F_hist + d * U
  int n_ = 0;
  std::vector<int> fixed_rows_;
  Eigen::SimplicialLDLT<discretize::SpMat> solver_;
};

/// Convenience single step (builds the factorization every call).
SimState step(const SimState& state, const SystemMatrices& mats,
              const fracdiff::DiffusiveQuadrature& quad, const fracdiff::FractionalKernel& kernel,
              double dt);

/// min(h_min / sqrt(max a), 1e-2)
double default_dt(const discretize::Mesh& mesh, const model::DegeneracyProfile& profile);

struct EnergySample {
  double t = 0.0;
  discretize::DiscreteEnergySplit split;
  double dissipation = 0.0;
};

struct EnergyTrace {
  std::vector<EnergySample> samples;
  double dt = 0.0;
  long steps = 0;
  double initial_energy = 0.0;
  double max_step_increase = 0.0;  // max over steps of E_{n+1} - E_n
  double quadrature_error = 0.0;
};

/// Raised by simulate when the energy leaves the finite range; carries the
/// samples recorded up to that point.
class BlowUpError : public SolverError {
 public:
  BlowUpError(const std::string& what, EnergyTrace partial) : SolverError(what), partial(std::move(partial)) {}
  EnergyTrace partial;
};

struct SimulateOptions {
  int n_cells = 128;
  double grading = 0.0;  // 0: default for the profile
  double dt = 0.0;       // 0: default_dt
  double t_final = 100.0;
  InitialSpec initial;
  int samples_per_decade = 40;
  int quad_nodes = fracdiff::kDefaultNodes;
  double sigma_min = fracdiff::kDefaultSigmaMin;
  double sigma_max = fracdiff::kDefaultSigmaMax;
};

/// Runs the validated config to t_final. Samples energy at t = 0, on a
/// log-spaced schedule and at t_final.
EnergyTrace simulate(const model::ProblemConfig& config, const SimulateOptions& options);

}  // namespace degenwave::timestep
