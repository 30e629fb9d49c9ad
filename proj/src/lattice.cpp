#include "rydeff/lattice.hpp"

#include <cmath>
#include <cstdio>

namespace rydeff {

void LatticeSpec::validate() const {
  if (n_sites < 1) throw std::invalid_argument("LatticeSpec: n_sites must be >= 1");
  if (nn_strength_V < 0) throw std::invalid_argument("LatticeSpec: nn_strength_V must be >= 0");
  if (exponent_p != 3 && exponent_p != 6) {
    std::fprintf(stderr, "warning: interaction exponent p=%d is neither dipolar (3) nor van der Waals (6)\n",
                 exponent_p);
  }
}

int chain_distance(int k, int m, int n_sites, Boundary boundary) {
  const int d = std::abs(k - m);
  if (boundary == Boundary::periodic) return std::min(d, n_sites - d);
  return d;
}

InteractionMatrix::InteractionMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) throw std::invalid_argument("InteractionMatrix: matrix must be square");
  const int n = static_cast<int>(values_.rows());
  for (int k = 0; k < n; ++k) {
    if (values_(k, k) != 0.0) throw std::invalid_argument("InteractionMatrix: diagonal must be zero");
    for (int m = k + 1; m < n; ++m) {
      if (std::abs(values_(k, m) - values_(m, k)) > 1e-12 * (1.0 + std::abs(values_(k, m))))
        throw std::invalid_argument("InteractionMatrix: matrix must be symmetric");
    }
  }
}

InteractionMatrix build_chain_interactions(const LatticeSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (int m = 0; m < n; ++m) {
      if (k == m) continue;
      const int d = chain_distance(k, m, n, spec.boundary);
      v(k, m) = spec.nn_strength_V / std::pow(static_cast<double>(d), spec.exponent_p);
    }
  }
  return InteractionMatrix(std::move(v));
}

void DephasingParams::validate() const {
  if (rabi_omega < 0) throw std::invalid_argument("DephasingParams: rabi_omega must be >= 0");
  if (dephasing_gamma < 0) throw std::invalid_argument("DephasingParams: dephasing_gamma must be >= 0");
  if (decay_gamma_ryd < 0) throw std::invalid_argument("DephasingParams: decay_gamma_ryd must be >= 0");
  if (!perturbative_regime()) {
    std::fprintf(stderr, "warning: dephasing_gamma < 5*rabi_omega, outside the strong-dephasing regime\n");
  }
  if (decay_gamma_ryd > 0 && !decay_regime_ok()) {
    std::fprintf(stderr, "warning: decay_gamma_ryd > dephasing_gamma/10, decay is not a weak perturbation\n");
  }
}

void EitParams::validate() const {
  if (omega_p < 0) throw std::invalid_argument("EitParams: omega_p must be >= 0");
  if (omega_c < 0) throw std::invalid_argument("EitParams: omega_c must be >= 0");
  if (decay_Gamma <= 0) throw std::invalid_argument("EitParams: decay_Gamma must be > 0");
  if (!perturbative_regime()) {
    std::fprintf(stderr, "warning: decay_Gamma < 10*max(omega_p, omega_c), outside the fast-decay regime\n");
  }
}

}  // namespace rydeff
