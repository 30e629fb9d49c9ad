#pragma once

#include <Eigen/Sparse>
#include <complex>
#include <string>
#include <vector>

#include "rydeff/fields.hpp"
#include "rydeff/observables.hpp"
#include "rydeff/record.hpp"

namespace rydeff {

// Complex coefficients entering the fourth-order rates. All are evaluated on
// a classical configuration; the digits at the distinguished sites never
// enter (k for gamma1; k and m for gamma2/gamma3).
std::complex<double> gamma1(ConfigIndex config, int k, const DephasingParams& params,
                            const InteractionMatrix& interactions);
std::complex<double> gamma2(ConfigIndex config, int k, int m, const DephasingParams& params,
                            const InteractionMatrix& interactions);
std::complex<double> gamma3(ConfigIndex config, int k, int m, const DephasingParams& params,
                            const InteractionMatrix& interactions);

// Second-order single-flip rate Gamma_k = Omega^2 gamma / [(gamma/2)^2 + h_k(1)^2].
double rate2(ConfigIndex config, int k, const DephasingParams& params, const InteractionMatrix& interactions);

// Fourth-order on-site correction beta_k = 64 Omega^4 gamma (gamma^2 - 4h^2)/(gamma^2 + 4h^2)^3.
double rate4_beta(ConfigIndex config, int k, const DephasingParams& params,
                  const InteractionMatrix& interactions);

// Full fourth-order single-flip rate Gamma_k^s (includes rate2 and beta_k).
double rate4_single(ConfigIndex config, int k, const DephasingParams& params,
                    const InteractionMatrix& interactions);

// Fourth-order correlated double-flip rate for the simultaneous flip of k and
// m out of `config` (symmetric in k,m); vanishes identically at V=0.
double rate4_double(ConfigIndex config, int k, int m, const DephasingParams& params,
                    const InteractionMatrix& interactions);

struct ClassicalGenerator {
  int n_sites = 0;
  int order = 2;
  bool with_decay = false;
  bool has_negative_rates = false;
  Eigen::SparseMatrix<double> matrix;  // columns sum to zero

  std::size_t dim() const { return std::size_t{1} << n_sites; }
};

ClassicalGenerator build_generator(const DephasingParams& params, const InteractionMatrix& interactions,
                                   int order, bool with_decay = false);

// v(t) = exp(tM) v0, by dense matrix exponential for dim <= 1024 and the
// shared adaptive integrator above that. Entries are recorded as-is (a
// flagged generator may produce slightly negative probabilities).
TrajectoryRecord integrate_rate_equation(const ClassicalGenerator& generator, const Eigen::VectorXd& v0,
                                         const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                         bool keep_distributions = false);

struct PositivityMap {
  std::vector<double> v_values;
  std::vector<double> delta_values;
  // all_rates_nonnegative(i, j) for (v_values[i], delta_values[j])
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> all_rates_nonnegative;

  void to_csv(const std::string& path) const;
};

// Scan the order-4 rates over a (V, Delta) grid; a cell fails when any
// single- or double-flip rate over all configurations is below -1e-12.
PositivityMap scan_positivity(const DephasingParams& params, const LatticeSpec& lattice_template,
                              double v_min, double v_max, double delta_min, double delta_max,
                              int v_resolution, int delta_resolution);

}  // namespace rydeff
