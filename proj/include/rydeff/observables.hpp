#pragma once

#include <Eigen/Dense>
#include <string>

#include "rydeff/basis.hpp"

namespace rydeff {

// Intensive observables matching the per-site normalization of the model:
//   mean_density:          <n> with n = (1/N) sum_k n_k
//   density_fluctuations:  <n^2> - <n>^2
//   g2(d):                 (1/N) sum_k <n_k n_{k+d}>   (periodic index)
//   sigma_x_mean:          <(1/N) sum_k sigma^x_k>     (off-diagonal)
//   custom_diagonal:       user-supplied diagonal weights per configuration
struct ObservableSpec {
  enum class Kind { mean_density, density_fluctuations, g2, sigma_x_mean, custom_diagonal };

  Kind kind = Kind::mean_density;
  int g2_distance = 1;
  Eigen::VectorXd custom_diag;       // length = basis dim, for custom_diagonal
  std::string custom_name = "custom";

  std::string name() const;
  bool diagonal() const { return kind != Kind::sigma_x_mean; }

  static ObservableSpec parse(const std::string& name, int n_sites);
};

double evaluate(const ObservableSpec& spec, const Eigen::MatrixXcd& rho, const Basis& basis);
double evaluate(const ObservableSpec& spec, const Eigen::VectorXcd& psi, const Basis& basis);
double evaluate(const ObservableSpec& spec, const Eigen::VectorXd& prob, int n_sites);

// Dense matrix representation, for small systems.
Eigen::MatrixXcd observable_matrix(const ObservableSpec& spec, const Basis& basis);

// Per-configuration excitation density (1/N) sum_k n_k.
Eigen::VectorXd density_diagonal(const Basis& basis);

// Reduced-space admissibility: O = P^dag O, with P the superoperator projector
// onto the retained subspace.
bool is_reduced_admissible(const Eigen::MatrixXcd& observable, const Eigen::MatrixXcd& projector_superop);

}  // namespace rydeff
