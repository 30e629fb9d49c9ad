#pragma once

#include <vector>

#include "rydeff/liouvillian.hpp"
#include "rydeff/observables.hpp"
#include "rydeff/ode.hpp"
#include "rydeff/record.hpp"

namespace rydeff {

// Raised when a solver fails to converge or conservation laws drift beyond
// tolerance; the CLI maps it (and StiffnessError) to a dedicated exit code.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integrate rho_dot = L rho and record observables on the sample grid.
// The trace is monitored; drifts beyond tolerance are renormalized away with
// a warning, and a persistent drift raises a numerical error.
TrajectoryRecord integrate(const Liouvillian& liouvillian, const DensityMatrix& rho0, const TimeGrid& grid,
                           const std::vector<ObservableSpec>& observables, const OdeOptions& opts = {},
                           bool keep_states = false);

DensityMatrix integrate_to(const Liouvillian& liouvillian, const DensityMatrix& rho0, double t_end,
                           const OdeOptions& opts = {});

struct SteadyStateOptions {
  double zero_tol = 1e-9;       // |eigenvalue| below this counts as zero
  double residual_tol = 1e-9;   // required ||L rho_ss||
  bool allow_fallback = true;   // long-time integration when algebra fails
  double fallback_time = 200;   // horizon for the fallback, in model units
};

struct SteadyStateResult {
  DensityMatrix rho;
  int multiplicity = 1;   // dimension of the detected kernel
  double residual = 0;    // ||L rho_ss||_F after normalization
  std::string method;     // "dense-kernel", "sparse-lu", "long-time"
};

SteadyStateResult steady_state(const Liouvillian& liouvillian, const SteadyStateOptions& opts = {});

// Steady state of an explicit superoperator (column-major vectorization of a
// dim x dim density matrix). Used for reduced models solved on a subspace.
SteadyStateResult steady_state_superop(const SpMat& superop, std::size_t dim,
                                       const SteadyStateOptions& opts = {});

// (1/2) || rho - sigma ||_1 for Hermitian arguments.
double trace_distance(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma);

// exp(t S) v via a dense matrix exponential; intended for small generators.
Eigen::VectorXcd expm_apply(const Eigen::MatrixXcd& generator, double t, const Eigen::VectorXcd& v);
Eigen::VectorXd expm_apply(const Eigen::MatrixXd& generator, double t, const Eigen::VectorXd& v);

// exp(t S) v for a large sparse generator by an adaptive Arnoldi (Krylov)
// propagator with the standard a-posteriori error estimate. Much faster than
// explicit time stepping when the generator is stiff, i.e. the step size is
// limited by stability rather than accuracy. `tol` is the accumulated error
// budget relative to ||v||.
Eigen::VectorXcd krylov_expm_apply(const SpMat& generator, double t, const Eigen::VectorXcd& v,
                                   double tol = 1e-8, int krylov_dim = 30);

// integrate() through the explicit superoperator with the Krylov propagator;
// requires a Liouvillian with a structured superoperator.
TrajectoryRecord integrate_krylov(const Liouvillian& liouvillian, const DensityMatrix& rho0,
                                  const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                  double tol = 1e-8, int krylov_dim = 30, bool keep_states = false);

}  // namespace rydeff
