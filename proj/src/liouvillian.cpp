#include "rydeff/liouvillian.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace rydeff {

using std::complex;
using Triplet = Eigen::Triplet<complex<double>>;

bool is_hermitian(const Eigen::MatrixXcd& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Eigen::MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

const SpMat& Liouvillian::superoperator() const {
  if (!cache_) {
    if (superop_) {
      cache_ = std::make_shared<SpMat>(superop_());
    } else {
      cache_ = std::make_shared<SpMat>(superoperator_from_apply(apply_, dim()));
    }
  }
  return *cache_;
}

Eigen::MatrixXcd Liouvillian::dense_superoperator() const { return Eigen::MatrixXcd(superoperator()); }

SpMat superoperator_from_apply(const Liouvillian::ApplyFn& apply, std::size_t dim) {
  if (dim > 256)
    throw std::invalid_argument("superoperator_from_apply: dimension " + std::to_string(dim) +
                                " too large for matrix-unit assembly");
  const Eigen::Index d = static_cast<Eigen::Index>(dim);
  DensityMatrix unit = DensityMatrix::Zero(d, d), image(d, d);
  std::vector<Triplet> trips;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      unit(i, j) = 1.0;
      apply(unit, image);
      unit(i, j) = 0.0;
      const Eigen::Index col = j * d + i;
      for (Eigen::Index jj = 0; jj < d; ++jj)
        for (Eigen::Index ii = 0; ii < d; ++ii)
          if (image(ii, jj) != 0.0) trips.emplace_back(jj * d + ii, col, image(ii, jj));
    }
  }
  SpMat s(d * d, d * d);
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

Liouvillian LindbladModel::liouvillian() const {
  struct Closure {
    SpMat h;
    std::vector<SpMat> jumps;
    std::vector<SpMat> jumps_dag;
    SpMat jump_norm;  // sum_j L_j^dag L_j
  };
  auto cl = std::make_shared<Closure>();
  cl->h = hamiltonian;
  cl->jumps = jumps;
  const Eigen::Index d = hamiltonian.rows();
  cl->jump_norm = SpMat(d, d);
  for (const auto& l : jumps) {
    cl->jumps_dag.push_back(SpMat(l.adjoint()));
    cl->jump_norm += SpMat(l.adjoint() * l);
  }
  auto apply = [cl](const Eigen::Ref<const DensityMatrix>& rho, Eigen::Ref<DensityMatrix> out) {
    const complex<double> mi(0, -1);
    out.noalias() = mi * (cl->h * rho);
    out.noalias() += complex<double>(0, 1) * (rho * cl->h);
    for (std::size_t j = 0; j < cl->jumps.size(); ++j)
      out.noalias() += cl->jumps[j] * rho * cl->jumps_dag[j];
    out.noalias() -= 0.5 * (cl->jump_norm * rho);
    out.noalias() -= 0.5 * (rho * cl->jump_norm);
  };
  LindbladModel copy = *this;
  auto superop = [copy]() { return copy.superoperator(); };
  return Liouvillian(basis, std::move(apply), std::move(superop));
}

SpMat LindbladModel::superoperator() const {
  const Eigen::Index d = hamiltonian.rows();
  SpMat id(d, d);
  id.setIdentity();
  const complex<double> mi(0, -1);
  SpMat s = mi * SpMat(Eigen::kroneckerProduct(id, hamiltonian)) -
            mi * SpMat(Eigen::kroneckerProduct(SpMat(hamiltonian.transpose()), id));
  for (const auto& l : jumps) {
    SpMat ldl = SpMat(l.adjoint() * l);
    s += SpMat(Eigen::kroneckerProduct(SpMat(l.conjugate()), l));
    s -= 0.5 * SpMat(Eigen::kroneckerProduct(id, ldl));
    s -= 0.5 * SpMat(Eigen::kroneckerProduct(SpMat(ldl.transpose()), id));
  }
  s.makeCompressed();
  return s;
}

Eigen::VectorXd classical_energies(const Basis& basis, const InteractionMatrix& interactions, double detuning) {
  if (interactions.n_sites() != basis.n_sites())
    throw std::invalid_argument("classical_energies: interaction matrix does not match basis");
  const std::size_t dim = basis.dim();
  const int n = basis.n_sites();
  Eigen::VectorXd e(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    double acc = 0;
    for (int k = 0; k < n; ++k) {
      if (!basis.occupation(c, k)) continue;
      acc += detuning;
      for (int m = k + 1; m < n; ++m)
        if (basis.occupation(c, m)) acc += interactions(k, m);
    }
    e(c) = acc;
  }
  return e;
}

LindbladModel build_two_level_model(const DephasingParams& params, const InteractionMatrix& interactions) {
  params.validate();
  const int n = interactions.n_sites();
  if (n > 14) throw std::invalid_argument("build_two_level_model: n_sites > 14 is not supported");
  Basis basis(n, 2);
  const Eigen::Index d = static_cast<Eigen::Index>(basis.dim());

  std::vector<Triplet> ht;
  const Eigen::VectorXd e0 = classical_energies(basis, interactions, params.detuning);
  for (Eigen::Index c = 0; c < d; ++c) {
    if (e0(c) != 0.0) ht.emplace_back(c, c, e0(c));
    for (int k = 0; k < n; ++k)
      ht.emplace_back(static_cast<Eigen::Index>(flip2(c, k, n)), c, params.rabi_omega);
  }
  LindbladModel model{basis, SpMat(d, d), {}};
  model.hamiltonian.setFromTriplets(ht.begin(), ht.end());

  if (params.dephasing_gamma > 0) {
    const double sg = std::sqrt(params.dephasing_gamma);
    for (int k = 0; k < n; ++k) {
      std::vector<Triplet> lt;
      for (Eigen::Index c = 0; c < d; ++c)
        if (occ2(c, k, n)) lt.emplace_back(c, c, sg);
      SpMat l(d, d);
      l.setFromTriplets(lt.begin(), lt.end());
      model.jumps.push_back(std::move(l));
    }
  }
  if (params.decay_gamma_ryd > 0) {
    const double sg = std::sqrt(params.decay_gamma_ryd);
    for (int k = 0; k < n; ++k) {
      std::vector<Triplet> lt;
      for (Eigen::Index c = 0; c < d; ++c)
        if (occ2(c, k, n)) lt.emplace_back(static_cast<Eigen::Index>(flip2(c, k, n)), c, sg);
      SpMat l(d, d);
      l.setFromTriplets(lt.begin(), lt.end());
      model.jumps.push_back(std::move(l));
    }
  }
  return model;
}

Liouvillian build_two_level_liouvillian(const DephasingParams& params, const InteractionMatrix& interactions) {
  return build_two_level_model(params, interactions).liouvillian();
}

LindbladModel build_three_level_model(const EitParams& params, const InteractionMatrix& interactions) {
  params.validate();
  const int n = interactions.n_sites();
  if (n > 8) throw std::invalid_argument("build_three_level_model: n_sites > 8 is not supported");
  Basis basis(n, 3);
  const Eigen::Index d = static_cast<Eigen::Index>(basis.dim());

  std::vector<Triplet> ht;
  const Eigen::VectorXd e0 = classical_energies(basis, interactions, params.detuning);
  for (Eigen::Index c = 0; c < d; ++c) {
    if (e0(c) != 0.0) ht.emplace_back(c, c, e0(c));
    for (int k = 0; k < n; ++k) {
      const int dk = basis.digit(c, k);
      // probe: down <-> mid, control: mid <-> up (upper triangle only; add h.c.)
      if (dk == kThreeLevelDown && params.omega_p != 0) {
        const auto c2 = static_cast<Eigen::Index>(basis.with_digit(c, k, kThreeLevelMid));
        ht.emplace_back(c2, c, params.omega_p);
        ht.emplace_back(c, c2, params.omega_p);
      }
      if (dk == kThreeLevelMid && params.omega_c != 0) {
        const auto c2 = static_cast<Eigen::Index>(basis.with_digit(c, k, kThreeLevelUp));
        ht.emplace_back(c2, c, params.omega_c);
        ht.emplace_back(c, c2, params.omega_c);
      }
    }
  }
  LindbladModel model{basis, SpMat(d, d), {}};
  model.hamiltonian.setFromTriplets(ht.begin(), ht.end());

  const double sg = std::sqrt(params.decay_Gamma);
  for (int k = 0; k < n; ++k) {
    std::vector<Triplet> lt;
    for (Eigen::Index c = 0; c < d; ++c)
      if (basis.digit(c, k) == kThreeLevelMid)
        lt.emplace_back(static_cast<Eigen::Index>(basis.with_digit(c, k, kThreeLevelDown)), c, sg);
    SpMat l(d, d);
    l.setFromTriplets(lt.begin(), lt.end());
    model.jumps.push_back(std::move(l));
  }
  return model;
}

Liouvillian build_three_level_liouvillian(const EitParams& params, const InteractionMatrix& interactions) {
  return build_three_level_model(params, interactions).liouvillian();
}

}  // namespace rydeff
