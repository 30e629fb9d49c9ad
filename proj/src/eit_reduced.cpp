#include "rydeff/eit_reduced.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "rydeff/fields.hpp"

namespace rydeff {

using std::complex;
namespace {
constexpr complex<double> kI{0.0, 1.0};
}

bool has_adjacent_excitations(ConfigIndex config, int n_sites, Boundary boundary) {
  if (n_sites < 2) return false;
  for (int k = 0; k + 1 < n_sites; ++k)
    if (occ2(config, k, n_sites) && occ2(config, k + 1, n_sites)) return true;
  if (boundary == Boundary::periodic && occ2(config, n_sites - 1, n_sites) && occ2(config, 0, n_sites))
    return true;
  return false;
}

std::vector<ConfigIndex> allowed_configurations(int n_sites, Boundary boundary) {
  std::vector<ConfigIndex> allowed;
  for (ConfigIndex c = 0; c < two_level_dim(n_sites); ++c)
    if (!has_adjacent_excitations(c, n_sites, boundary)) allowed.push_back(c);
  return allowed;
}

DensityMatrix exclusion_project(const DensityMatrix& rho, int n_sites, Boundary boundary,
                                double* removed_weight) {
  const std::size_t dim = two_level_dim(n_sites);
  if (rho.rows() != static_cast<Eigen::Index>(dim) || rho.cols() != static_cast<Eigen::Index>(dim))
    throw std::invalid_argument("exclusion_project: dimension mismatch");
  DensityMatrix out = rho;
  for (ConfigIndex c = 0; c < dim; ++c) {
    if (!has_adjacent_excitations(c, n_sites, boundary)) continue;
    out.row(c).setZero();
    out.col(c).setZero();
  }
  if (removed_weight) *removed_weight = (rho.trace() - out.trace()).real();
  return out;
}

std::vector<SpMat> reduced_jump_operators(const EitParams& params, int n_sites, Boundary boundary,
                                          ReducedVariant variant) {
  params.validate();
  if (variant == ReducedVariant::nonperturbative)
    throw std::invalid_argument("reduced_jump_operators: the nonperturbative variant has no jump form");
  const std::size_t dim = two_level_dim(n_sites);
  const double pref = 2.0 / std::sqrt(params.decay_Gamma);
  std::vector<SpMat> jumps;
  jumps.reserve(n_sites);
  for (int k = 0; k < n_sites; ++k) {
    std::vector<Eigen::Triplet<complex<double>>> trip;
    for (ConfigIndex c = 0; c < dim; ++c) {
      if (occ2(c, k, n_sites)) {
        bool blocked = false;
        if (variant == ReducedVariant::nn_exclusion) {
          const ConfigIndex lowered = flip2(c, k, n_sites);
          // P_k = p_{k-1} p_{k+1}; missing neighbours at open boundaries
          // count as down
          const int left = k - 1, right = k + 1;
          if (left >= 0 && occ2(lowered, left, n_sites)) blocked = true;
          if (right < n_sites && occ2(lowered, right, n_sites)) blocked = true;
          if (boundary == Boundary::periodic && n_sites > 1) {
            if (occ2(lowered, (k - 1 + n_sites) % n_sites, n_sites)) blocked = true;
            if (occ2(lowered, (k + 1) % n_sites, n_sites)) blocked = true;
          }
        }
        if (!blocked) trip.emplace_back(flip2(c, k, n_sites), c, pref * params.omega_c);
      } else {
        trip.emplace_back(c, c, pref * params.omega_p);
      }
    }
    SpMat l(dim, dim);
    l.setFromTriplets(trip.begin(), trip.end());
    jumps.push_back(std::move(l));
  }
  return jumps;
}

namespace {

SpMat diagonal_sparse(const Eigen::VectorXcd& d) {
  SpMat m(d.size(), d.size());
  std::vector<Eigen::Triplet<complex<double>>> trip;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d(i) != 0.0) trip.emplace_back(i, i, d(i));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat site_lowering(int k, int n_sites) {
  const std::size_t dim = two_level_dim(n_sites);
  std::vector<Eigen::Triplet<complex<double>>> trip;
  for (ConfigIndex c = 0; c < dim; ++c)
    if (occ2(c, k, n_sites)) trip.emplace_back(flip2(c, k, n_sites), c, 1.0);
  SpMat m(dim, dim);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat site_diag(int k, int n_sites, bool excited) {
  const std::size_t dim = two_level_dim(n_sites);
  Eigen::VectorXcd d(dim);
  for (ConfigIndex c = 0; c < dim; ++c) d(c) = (occ2(c, k, n_sites) == (excited ? 1 : 0)) ? 1.0 : 0.0;
  return diagonal_sparse(d);
}

// The nonperturbative variant keeps H0 resummed through the diagonal factors
// F_k. Every term is of the sandwich form A mu B; pure left/right products
// are accumulated into two matrices.
Liouvillian build_nonperturbative(const EitParams& params, const InteractionMatrix& interactions) {
  const int n = interactions.n_sites();
  const Basis basis(n, 2);
  const std::size_t dim = basis.dim();
  const double g = params.decay_Gamma;
  const double lcc = 2.0 * params.omega_c * params.omega_c / g;
  const double lcp = 2.0 * params.omega_c * params.omega_p / g;
  const double lpp = 2.0 * params.omega_p * params.omega_p / g;

  const Eigen::VectorXd energies = classical_energies(basis, interactions, params.detuning);
  SpMat left = diagonal_sparse(-kI * energies.cast<complex<double>>());
  SpMat right = diagonal_sparse(kI * energies.cast<complex<double>>());
  std::vector<std::pair<SpMat, SpMat>> sandwiches;

  for (int k = 0; k < n; ++k) {
    const SpMat sm = site_lowering(k, n);
    const SpMat sp = SpMat(sm.adjoint());
    const SpMat pk = site_diag(k, n, false);
    const SpMat nk = site_diag(k, n, true);
    Eigen::VectorXcd fdiag(dim);
    for (ConfigIndex c = 0; c < dim; ++c)
      fdiag(c) = 1.0 / (1.0 - kI * (2.0 / g) * interaction_field_h(c, k, interactions, params.detuning));
    const SpMat f = diagonal_sparse(fdiag);
    const SpMat fd = SpMat(f.adjoint());

    sandwiches.emplace_back(lcc * SpMat(sm * f), sp);
    sandwiches.emplace_back(lcc * sm, SpMat(fd * sp));
    left += -lcc * SpMat(f * nk);
    right += -lcc * SpMat(nk * fd);

    sandwiches.emplace_back(lcp * SpMat(sm * f), pk);
    sandwiches.emplace_back(lcp * pk, SpMat(sp * fd));
    sandwiches.emplace_back(lcp * sm, pk);
    sandwiches.emplace_back(lcp * pk, sp);
    left += -lcp * sp;
    right += -lcp * sm;
    left += -lcp * SpMat(sm * f);
    right += -lcp * SpMat(sp * fd);

    sandwiches.emplace_back(2.0 * lpp * pk, pk);
    left += -lpp * pk;
    right += -lpp * pk;
  }

  auto apply = [left, right, sandwiches](const Eigen::Ref<const DensityMatrix>& mu,
                                         Eigen::Ref<DensityMatrix> out) {
    out = left * mu + mu * right;
    for (const auto& [a, b] : sandwiches) out += a * mu * b;
  };
  auto superop = [left, right, sandwiches, dim]() {
    SpMat id(dim, dim);
    id.setIdentity();
    SpMat s = SpMat(Eigen::kroneckerProduct(id, left));
    s += SpMat(Eigen::kroneckerProduct(SpMat(right.transpose()), id));
    for (const auto& [a, b] : sandwiches) s += SpMat(Eigen::kroneckerProduct(SpMat(b.transpose()), a));
    return s;
  };
  return Liouvillian(basis, std::move(apply), std::move(superop));
}

}  // namespace

Liouvillian build_reduced_liouvillian(const EitParams& params, const InteractionMatrix& interactions,
                                      ReducedVariant variant, Boundary boundary) {
  params.validate();
  const int n = interactions.n_sites();
  if (n > 14) throw std::invalid_argument("build_reduced_liouvillian: n_sites > 14 is not supported");
  if (variant == ReducedVariant::nonperturbative) return build_nonperturbative(params, interactions);
  const Basis basis(n, 2);
  LindbladModel model{basis, SpMat(basis.dim(), basis.dim()),
                      reduced_jump_operators(params, n, boundary, variant)};
  if (variant == ReducedVariant::second_order) {
    const Eigen::VectorXd e = classical_energies(basis, interactions, params.detuning);
    model.hamiltonian = diagonal_sparse(e.cast<complex<double>>());
  }
  return model.liouvillian();
}

DensityMatrix project_and_reduce(const DensityMatrix& rho_full, int n_sites) {
  if (n_sites < 1 || n_sites > 8) throw std::invalid_argument("project_and_reduce: n_sites out of range");
  const Basis b3(n_sites, 3);
  const std::size_t dim3 = b3.dim();
  const std::size_t dim2 = two_level_dim(n_sites);
  if (rho_full.rows() != static_cast<Eigen::Index>(dim3) || rho_full.cols() != static_cast<Eigen::Index>(dim3))
    throw std::invalid_argument("project_and_reduce: dimension mismatch");
  DensityMatrix out = DensityMatrix::Zero(dim2, dim2);
  for (std::size_t i = 0; i < dim3; ++i) {
    for (std::size_t j = 0; j < dim3; ++j) {
      if (rho_full(i, j) == 0.0) continue;
      std::size_t ri = 0, rj = 0;
      bool keep = true;
      for (int s = 0; s < n_sites; ++s) {
        const int di = b3.digit(i, s);
        const int dj = b3.digit(j, s);
        const int shift = n_sites - 1 - s;
        if (di == kThreeLevelMid && dj == kThreeLevelMid) {
          // mid-level population moves to down (reduced bit 0)
        } else if (di != kThreeLevelMid && dj != kThreeLevelMid) {
          if (di == kThreeLevelUp) ri |= std::size_t{1} << shift;
          if (dj == kThreeLevelUp) rj |= std::size_t{1} << shift;
        } else {
          keep = false;
          break;
        }
      }
      if (keep) out(ri, rj) += rho_full(i, j);
    }
  }
  return out;
}

DensityMatrix embed_reduced(const DensityMatrix& mu, int n_sites) {
  if (n_sites < 1 || n_sites > 8) throw std::invalid_argument("embed_reduced: n_sites out of range");
  const Basis b3(n_sites, 3);
  const std::size_t dim2 = two_level_dim(n_sites);
  if (mu.rows() != static_cast<Eigen::Index>(dim2) || mu.cols() != static_cast<Eigen::Index>(dim2))
    throw std::invalid_argument("embed_reduced: dimension mismatch");
  auto full_index = [&](std::size_t r) {
    std::vector<int> word(n_sites);
    for (int s = 0; s < n_sites; ++s)
      word[s] = occ2(r, s, n_sites) ? kThreeLevelUp : kThreeLevelDown;
    return b3.encode(word);
  };
  DensityMatrix out = DensityMatrix::Zero(b3.dim(), b3.dim());
  for (std::size_t i = 0; i < dim2; ++i)
    for (std::size_t j = 0; j < dim2; ++j)
      if (mu(i, j) != 0.0) out(full_index(i), full_index(j)) = mu(i, j);
  return out;
}

TrajectoryRecord integrate_reduced(const EitParams& params, const InteractionMatrix& interactions,
                                   ReducedVariant variant, Boundary boundary, const DensityMatrix& mu0,
                                   const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                   const OdeOptions& opts) {
  if (variant == ReducedVariant::nn_exclusion) {
    double removed = 0;
    exclusion_project(mu0, interactions.n_sites(), boundary, &removed);
    if (removed > 1e-10)
      throw std::invalid_argument(
          "integrate_reduced: initial state has weight on configurations with adjacent excitations");
  }
  const Liouvillian liou = build_reduced_liouvillian(params, interactions, variant, boundary);
  return integrate(liou, mu0, grid, observables, opts);
}

SteadyStateResult reduced_steady_state(const EitParams& params, const InteractionMatrix& interactions,
                                       ReducedVariant variant, Boundary boundary,
                                       const SteadyStateOptions& opts) {
  const Liouvillian liou = build_reduced_liouvillian(params, interactions, variant, boundary);
  if (variant != ReducedVariant::nn_exclusion) return steady_state(liou, opts);

  // Solve on the allowed subspace only: the exclusion generator never maps
  // weight into forbidden configurations, which would otherwise contribute
  // spurious kernel directions.
  const int n = interactions.n_sites();
  const std::size_t dim = two_level_dim(n);
  const auto allowed = allowed_configurations(n, boundary);
  const std::size_t da = allowed.size();
  std::vector<Eigen::Index> pos(dim, -1);
  for (std::size_t a = 0; a < da; ++a) pos[allowed[a]] = static_cast<Eigen::Index>(a);

  const SpMat& s = liou.superoperator();
  std::vector<Eigen::Triplet<complex<double>>> trip;
  for (int outer = 0; outer < s.outerSize(); ++outer) {
    for (SpMat::InnerIterator it(s, outer); it; ++it) {
      const std::size_t ci = it.col() % dim, cj = it.col() / dim;
      const std::size_t ri = it.row() % dim, rj = it.row() / dim;
      if (pos[ci] < 0 || pos[cj] < 0 || pos[ri] < 0 || pos[rj] < 0) continue;
      trip.emplace_back(pos[rj] * da + pos[ri], pos[cj] * da + pos[ci], it.value());
    }
  }
  SpMat restricted(da * da, da * da);
  restricted.setFromTriplets(trip.begin(), trip.end());
  SteadyStateResult sub = steady_state_superop(restricted, da, opts);

  SteadyStateResult result = sub;
  result.rho = DensityMatrix::Zero(dim, dim);
  for (std::size_t a = 0; a < da; ++a)
    for (std::size_t b = 0; b < da; ++b) result.rho(allowed[a], allowed[b]) = sub.rho(a, b);
  return result;
}

}  // namespace rydeff
