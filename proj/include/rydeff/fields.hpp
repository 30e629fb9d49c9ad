#pragma once

#include "rydeff/basis.hpp"
#include "rydeff/lattice.hpp"

namespace rydeff {

// Local energy shift seen by site k when it is excited:
//   h_k(1) = Delta + sum_{q != k} V_{kq} n_q.
// The occupation of site k itself never enters.
inline double interaction_field_h(ConfigIndex config, int site, const InteractionMatrix& interactions,
                                  double detuning) {
  const int n = interactions.n_sites();
  if (site < 0 || site >= n) throw std::out_of_range("interaction_field_h: site out of range");
  double h = detuning;
  for (int q = 0; q < n; ++q) {
    if (q == site) continue;
    if (occ2(config, q, n)) h += interactions(site, q);
  }
  return h;
}

// Two-site restriction of the classical Hamiltonian:
//   h_{k,m}(n_k, n_m) = H0 with sites k,m forced to (n_k, n_m), minus the
//   all-zero reference H0|n_k=n_m=0. Other sites are read from `config`.
inline double pair_field_h(ConfigIndex config, int k, int m, int n_k, int n_m,
                           const InteractionMatrix& interactions, double detuning) {
  const int n = interactions.n_sites();
  if (k == m) throw std::invalid_argument("pair_field_h: k and m must differ");
  if (k < 0 || k >= n || m < 0 || m >= n) throw std::out_of_range("pair_field_h: site out of range");
  double h = detuning * (n_k + n_m) + interactions(k, m) * n_k * n_m;
  for (int q = 0; q < n; ++q) {
    if (q == k || q == m) continue;
    if (occ2(config, q, n)) h += n_k * interactions(k, q) + n_m * interactions(m, q);
  }
  return h;
}

}  // namespace rydeff
