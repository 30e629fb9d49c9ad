#pragma once

#include <vector>

#include "rydeff/evolution.hpp"
#include "rydeff/liouvillian.hpp"

namespace rydeff {

// Reduced 2^N description of the three-level gas after adiabatic elimination
// of the intermediate state:
//   second_order:    mu_dot = -i[H0,mu] + sum_k D[L_k],
//                    L_k = (2/sqrt(Gamma)) (Omega_c sigma^-_k + Omega_p p_k)
//   nn_exclusion:    purely dissipative, J_k = (2/sqrt(Gamma))
//                    (Omega_c P_k sigma^-_k + Omega_p p_k), P_k = p_{k-1} p_{k+1}
//   nonperturbative: H0 resummed into diagonal site factors
//                    F_k = 1 / (1 - i (2/Gamma) h_k(1))
enum class ReducedVariant { second_order, nn_exclusion, nonperturbative };

// --- nearest-neighbour exclusion subspace ---

bool has_adjacent_excitations(ConfigIndex config, int n_sites, Boundary boundary);
std::vector<ConfigIndex> allowed_configurations(int n_sites, Boundary boundary);

// Zeroes every row/column indexed by a configuration with adjacent
// excitations; removed_weight reports the trace taken out.
DensityMatrix exclusion_project(const DensityMatrix& rho, int n_sites, Boundary boundary,
                                double* removed_weight = nullptr);

// Per-site jump operators of the second_order / nn_exclusion variants.
std::vector<SpMat> reduced_jump_operators(const EitParams& params, int n_sites, Boundary boundary,
                                          ReducedVariant variant);

Liouvillian build_reduced_liouvillian(const EitParams& params, const InteractionMatrix& interactions,
                                      ReducedVariant variant, Boundary boundary = Boundary::periodic);

// 3^N -> 2^N: apply the per-site stationary projector (keeps the up/down
// block, moves mid-level population to down), then drop the mid level.
DensityMatrix project_and_reduce(const DensityMatrix& rho_full, int n_sites);

// 2^N -> 3^N injection with no mid-level weight; a left inverse of
// project_and_reduce and the identity composition on the projected range.
DensityMatrix embed_reduced(const DensityMatrix& mu, int n_sites);

// Integration entry point; nn_exclusion rejects initial states carrying more
// than 1e-10 weight on forbidden configurations.
TrajectoryRecord integrate_reduced(const EitParams& params, const InteractionMatrix& interactions,
                                   ReducedVariant variant, Boundary boundary, const DensityMatrix& mu0,
                                   const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                   const OdeOptions& opts = {});

// Steady state; nn_exclusion solves on the allowed subspace only (the full
// generator is blind to forbidden configurations by construction).
SteadyStateResult reduced_steady_state(const EitParams& params, const InteractionMatrix& interactions,
                                       ReducedVariant variant, Boundary boundary = Boundary::periodic,
                                       const SteadyStateOptions& opts = {});

}  // namespace rydeff
