#pragma once

#include <Eigen/Dense>

#include "rydeff/liouvillian.hpp"
#include "rydeff/rates.hpp"

namespace rydeff {

// Fast/slow splitting of a Liouvillian into L0 (relaxing part, defines the
// projector P onto its stationary subspace) and the perturbation L1, both as
// explicit superoperators in column-major vectorization.
struct SuperoperatorSplit {
  std::size_t hilbert_dim = 0;
  SpMat l0;
  SpMat l1;
  bool l0_diagonal = false;     // L0 diagonal in the matrix-unit basis
  Eigen::VectorXcd l0_diag;     // its eigenvalues, when diagonal
};

// Dephasing model: L0 = -i[H0,.] + gamma*D (diagonal in matrix units),
// L1 = -i*Omega*sum_k [sigma^x_k, .].
SuperoperatorSplit make_dephasing_split(const DephasingParams& params, const InteractionMatrix& interactions);

// EIT model: L0 = Gamma*D (intermediate-state decay), L1 = -i[H0 + H1, .].
SuperoperatorSplit make_eit_split(const EitParams& params, const InteractionMatrix& interactions);

// Spectral projector onto the kernel of a generator, built from
// biorthonormalized (right, left) eigenvector pairs of the zero eigenvalues.
// Throws on eigenvalues with positive real part or nonzero purely imaginary
// eigenvalues.
Eigen::MatrixXcd build_projector(const Eigen::MatrixXcd& l0);

// Dense brute-force evaluation of the projection-operator perturbation
// series: resolvent R = int_0^inf e^{tau L0} Q dtau obtained by a deflated
// linear solve, and the effective generators order by order.
class NzOracle {
 public:
  explicit NzOracle(const SuperoperatorSplit& split);

  const Eigen::MatrixXcd& projector() const { return p_; }
  const Eigen::MatrixXcd& resolvent() const { return r_; }

  // Single-order term; orders carrying an ambiguous tail in "P L1 P" require
  // P L1 P = 0 and throw otherwise.
  Eigen::MatrixXcd effective_generator(int order) const;
  // Sum of orders 1..max_order.
  Eigen::MatrixXcd effective_generator_sum(int max_order) const;

  // Order-2 generator with the tau-integral truncated at t_cut and evaluated
  // by the trapezoid rule on matrix exponentials.
  Eigen::MatrixXcd quadrature_generator(double t_cut, int n_steps) const;

 private:
  Eigen::MatrixXcd l0_, l1_, p_, q_, r_, pl1p_;
  double scale_ = 1;
};

// Classical generator on configuration space extracted from a diagonal-L0
// split (kernel = diagonal matrix units), computed column-by-column with
// sparse matvecs. order 2 -> L^(2); order 4 -> L^(2) + L^(4).
Eigen::MatrixXd oracle_classical_generator(const SuperoperatorSplit& split, int order);

// Norm of the odd-order generator (order 1 or 3) on the diagonal subspace;
// vanishes for the dephasing model.
double oracle_odd_order_norm(const SuperoperatorSplit& split, int order);

}  // namespace rydeff
