#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rydeff/basis.hpp"
#include "rydeff/lattice.hpp"

namespace rydeff {

using SpMat = Eigen::SparseMatrix<std::complex<double>>;
using DensityMatrix = Eigen::MatrixXcd;

// Trace-1 Hermitian PSD checks, used by tests and the integrator guards.
bool is_hermitian(const Eigen::MatrixXcd& m, double tol = 1e-10);
double min_eigenvalue(const Eigen::MatrixXcd& hermitian);

// A master-equation right-hand side rho -> drho/dt. Always applicable
// matrix-free; an explicit (sparse) superoperator is available either from
// the Lindblad structure or, for small dimensions, by applying the map to
// every matrix unit.
class Liouvillian {
 public:
  using ApplyFn = std::function<void(const Eigen::Ref<const DensityMatrix>&, Eigen::Ref<DensityMatrix>)>;
  using SuperopFn = std::function<SpMat()>;

  Liouvillian(Basis basis, ApplyFn apply, SuperopFn superop = nullptr)
      : basis_(std::move(basis)), apply_(std::move(apply)), superop_(std::move(superop)) {}

  const Basis& basis() const { return basis_; }
  std::size_t dim() const { return basis_.dim(); }

  void apply(const Eigen::Ref<const DensityMatrix>& rho, Eigen::Ref<DensityMatrix> out) const {
    apply_(rho, out);
  }
  DensityMatrix operator()(const DensityMatrix& rho) const {
    DensityMatrix out(rho.rows(), rho.cols());
    apply_(rho, out);
    return out;
  }

  bool has_structured_superoperator() const { return static_cast<bool>(superop_); }
  // Cached; falls back to matrix-unit application when no structural builder
  // was provided (guarded to small dimensions).
  const SpMat& superoperator() const;
  Eigen::MatrixXcd dense_superoperator() const;

 private:
  Basis basis_;
  ApplyFn apply_;
  SuperopFn superop_;
  mutable std::shared_ptr<SpMat> cache_;
};

// Hamiltonian + jump-operator representation; sqrt(rate) is absorbed into
// each jump operator.
struct LindbladModel {
  Basis basis;
  SpMat hamiltonian;
  std::vector<SpMat> jumps;

  Liouvillian liouvillian() const;
  SpMat superoperator() const;
};

// Generic superoperator assembly for an arbitrary map (column-major
// vectorization), guarded to dim <= 256.
SpMat superoperator_from_apply(const Liouvillian::ApplyFn& apply, std::size_t dim);

// rho_dot = -i[H0 + H1, rho] + gamma D_deph + Gamma_ryd D_dec
LindbladModel build_two_level_model(const DephasingParams& params, const InteractionMatrix& interactions);
Liouvillian build_two_level_liouvillian(const DephasingParams& params, const InteractionMatrix& interactions);

// rho_dot = -i[H0 + H1, rho] + Gamma D (intermediate-state decay), basis
// ordering (up, mid, down) per site
LindbladModel build_three_level_model(const EitParams& params, const InteractionMatrix& interactions);
Liouvillian build_three_level_liouvillian(const EitParams& params, const InteractionMatrix& interactions);

// Diagonal of the classical Hamiltonian H0 over the given basis.
Eigen::VectorXd classical_energies(const Basis& basis, const InteractionMatrix& interactions, double detuning);

}  // namespace rydeff
