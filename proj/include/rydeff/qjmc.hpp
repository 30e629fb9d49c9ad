#pragma once

#include <cstdint>
#include <vector>

#include "rydeff/lattice.hpp"
#include "rydeff/observables.hpp"
#include "rydeff/ode.hpp"
#include "rydeff/record.hpp"

namespace rydeff {

// Quantum-jump unravelling of the two-level master equation. The
// non-Hermitian effective Hamiltonian and the jump channels (dephasing
// sqrt(gamma) n_k, decay sqrt(Gamma_ryd) sigma^-_k) are derived from the
// model parameters; a 64-bit seed fully determines a trajectory.
struct JumpUnravelling {
  int n_sites = 0;
  DephasingParams params;
  Eigen::VectorXd energies;  // H0 diagonal over configurations

  std::size_t dim() const { return std::size_t{1} << n_sites; }
};

JumpUnravelling make_unravelling(const DephasingParams& params, const InteractionMatrix& interactions);

struct QjmcOptions {
  OdeOptions ode{1e-8, 1e-10};
  bool keep_final_state = false;  // accumulate |psi><psi| at the last sample
};

TrajectoryRecord sample_trajectory(const JumpUnravelling& unravelling, const Eigen::VectorXcd& psi0,
                                   const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                   std::uint64_t seed, const QjmcOptions& opts = {});

// Jump times of a single trajectory (diagnostics / statistical tests).
std::vector<double> trajectory_jump_times(const JumpUnravelling& unravelling, const Eigen::VectorXcd& psi0,
                                          double t_end, std::uint64_t seed, const QjmcOptions& opts = {});

// Trajectory average with standard errors; trajectory i uses seed
// base_seed + i and the aggregation is performed in fixed index order, so the
// result is reproducible and independent of the execution schedule.
TrajectoryRecord average_trajectories(const JumpUnravelling& unravelling, const Eigen::VectorXcd& psi0,
                                      const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                      int n_traj, std::uint64_t base_seed, const QjmcOptions& opts = {});

}  // namespace rydeff
