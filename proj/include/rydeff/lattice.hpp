#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace rydeff {

enum class Boundary { periodic, open };

// One-dimensional chain of atoms with power-law pair interactions.
// Energies are measured in units of the drive Rabi frequency, times in its
// inverse; hbar = 1.
struct LatticeSpec {
  int n_sites = 1;
  int exponent_p = 6;       // 3 = dipole-dipole, 6 = van der Waals
  double nn_strength_V = 0; // nearest-neighbour coupling
  Boundary boundary = Boundary::periodic;

  void validate() const;
};

// Chain distance respecting the boundary condition.
int chain_distance(int k, int m, int n_sites, Boundary boundary);

// Symmetric pair-coupling matrix with zero diagonal. Arbitrary geometries are
// supported by constructing from a user-supplied symmetric matrix.
class InteractionMatrix {
 public:
  InteractionMatrix() : values_(Eigen::MatrixXd::Zero(1, 1)) {}
  explicit InteractionMatrix(Eigen::MatrixXd values);

  int n_sites() const { return static_cast<int>(values_.rows()); }
  double operator()(int k, int m) const { return values_(k, m); }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
};

InteractionMatrix build_chain_interactions(const LatticeSpec& spec);

// Two-level model parameters (drive + dephasing + optional radiative decay).
struct DephasingParams {
  double rabi_omega = 1.0;
  double detuning = 0.0;
  double dephasing_gamma = 0.0;
  double decay_gamma_ryd = 0.0;

  void validate() const;
  bool perturbative_regime() const { return dephasing_gamma >= 5.0 * rabi_omega; }
  bool decay_regime_ok() const { return decay_gamma_ryd <= dephasing_gamma / 10.0; }
};

// Three-level EIT model parameters. Energies in units of the control Rabi
// frequency.
struct EitParams {
  double omega_p = 0.0;
  double omega_c = 1.0;
  double detuning = 0.0;
  double decay_Gamma = 1.0;

  void validate() const;
  bool perturbative_regime() const {
    return decay_Gamma >= 10.0 * std::max(omega_p, omega_c);
  }
};

}  // namespace rydeff
