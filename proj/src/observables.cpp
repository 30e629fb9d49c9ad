#include "rydeff/observables.hpp"

#include <stdexcept>

namespace rydeff {

namespace {

double config_density(std::size_t idx, const Basis& basis) {
  int total = 0;
  for (int k = 0; k < basis.n_sites(); ++k) total += basis.occupation(idx, k);
  return static_cast<double>(total) / basis.n_sites();
}

double config_g2(std::size_t idx, const Basis& basis, int d) {
  const int n = basis.n_sites();
  double acc = 0;
  for (int k = 0; k < n; ++k) acc += basis.occupation(idx, k) * basis.occupation(idx, (k + d) % n);
  return acc / n;
}

// site index of the sigma^x partner of `idx` at `site`, or idx itself if the
// site is in the intermediate level (three-level case)
bool sigma_x_partner(std::size_t idx, int site, const Basis& basis, std::size_t* partner) {
  if (basis.base() == 2) {
    *partner = basis.with_digit(idx, site, 1 - basis.digit(idx, site));
    return true;
  }
  const int d = basis.digit(idx, site);
  if (d == kThreeLevelMid) return false;
  *partner = basis.with_digit(idx, site, d == kThreeLevelUp ? kThreeLevelDown : kThreeLevelUp);
  return true;
}

template <class Pop>
double diagonal_expectation(const ObservableSpec& spec, const Basis& basis, Pop&& p) {
  const std::size_t dim = basis.dim();
  double acc = 0;
  switch (spec.kind) {
    case ObservableSpec::Kind::mean_density:
      for (std::size_t i = 0; i < dim; ++i) acc += p(i) * config_density(i, basis);
      return acc;
    case ObservableSpec::Kind::density_fluctuations: {
      double m1 = 0, m2 = 0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double nd = config_density(i, basis);
        m1 += p(i) * nd;
        m2 += p(i) * nd * nd;
      }
      return m2 - m1 * m1;
    }
    case ObservableSpec::Kind::g2:
      for (std::size_t i = 0; i < dim; ++i) acc += p(i) * config_g2(i, basis, spec.g2_distance);
      return acc;
    case ObservableSpec::Kind::custom_diagonal:
      if (spec.custom_diag.size() != static_cast<Eigen::Index>(dim))
        throw std::invalid_argument("custom_diagonal: weight vector does not match state dimension");
      for (std::size_t i = 0; i < dim; ++i) acc += p(i) * spec.custom_diag(i);
      return acc;
    default:
      throw std::logic_error("diagonal_expectation: non-diagonal observable");
  }
}

}  // namespace

std::string ObservableSpec::name() const {
  switch (kind) {
    case Kind::mean_density: return "mean_density";
    case Kind::density_fluctuations: return "fluctuations";
    case Kind::g2: return "g2_" + std::to_string(g2_distance);
    case Kind::sigma_x_mean: return "sigma_x";
    case Kind::custom_diagonal: return custom_name;
  }
  return "?";
}

ObservableSpec ObservableSpec::parse(const std::string& name, int n_sites) {
  ObservableSpec spec;
  if (name == "mean_density") {
    spec.kind = Kind::mean_density;
  } else if (name == "fluctuations") {
    spec.kind = Kind::density_fluctuations;
  } else if (name == "sigma_x") {
    spec.kind = Kind::sigma_x_mean;
  } else if (name.rfind("g2_", 0) == 0) {
    spec.kind = Kind::g2;
    spec.g2_distance = std::stoi(name.substr(3));
    if (spec.g2_distance < 1 || spec.g2_distance >= n_sites)
      throw std::invalid_argument("g2 distance out of range: " + name);
  } else {
    throw std::invalid_argument("unknown observable: " + name);
  }
  return spec;
}

double evaluate(const ObservableSpec& spec, const Eigen::MatrixXcd& rho, const Basis& basis) {
  const std::size_t dim = basis.dim();
  if (rho.rows() != static_cast<Eigen::Index>(dim) || rho.cols() != static_cast<Eigen::Index>(dim))
    throw std::invalid_argument("evaluate: state dimension mismatch");
  if (spec.kind == ObservableSpec::Kind::sigma_x_mean) {
    double acc = 0;
    for (int k = 0; k < basis.n_sites(); ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        std::size_t j;
        if (sigma_x_partner(i, k, basis, &j)) acc += rho(j, i).real();
      }
    }
    return acc / basis.n_sites();
  }
  return diagonal_expectation(spec, basis, [&](std::size_t i) { return rho(i, i).real(); });
}

double evaluate(const ObservableSpec& spec, const Eigen::VectorXcd& psi, const Basis& basis) {
  const std::size_t dim = basis.dim();
  if (psi.size() != static_cast<Eigen::Index>(dim))
    throw std::invalid_argument("evaluate: state dimension mismatch");
  if (spec.kind == ObservableSpec::Kind::sigma_x_mean) {
    std::complex<double> acc = 0;
    for (int k = 0; k < basis.n_sites(); ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        std::size_t j;
        if (sigma_x_partner(i, k, basis, &j)) acc += std::conj(psi(i)) * psi(j);
      }
    }
    return acc.real() / basis.n_sites();
  }
  return diagonal_expectation(spec, basis, [&](std::size_t i) { return std::norm(psi(i)); });
}

double evaluate(const ObservableSpec& spec, const Eigen::VectorXd& prob, int n_sites) {
  if (spec.kind == ObservableSpec::Kind::sigma_x_mean)
    throw std::invalid_argument("sigma_x is incompatible with a probability vector: diagonal states carry no coherence");
  const Basis basis(n_sites, 2);
  if (prob.size() != static_cast<Eigen::Index>(basis.dim()))
    throw std::invalid_argument("evaluate: probability vector dimension mismatch");
  return diagonal_expectation(spec, basis, [&](std::size_t i) { return prob(i); });
}

Eigen::MatrixXcd observable_matrix(const ObservableSpec& spec, const Basis& basis) {
  const std::size_t dim = basis.dim();
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(dim, dim);
  if (spec.kind == ObservableSpec::Kind::sigma_x_mean) {
    for (int k = 0; k < basis.n_sites(); ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        std::size_t j;
        if (sigma_x_partner(i, k, basis, &j)) op(i, j) += 1.0 / basis.n_sites();
      }
    }
    return op;
  }
  for (std::size_t i = 0; i < dim; ++i) {
    switch (spec.kind) {
      case ObservableSpec::Kind::mean_density: op(i, i) = config_density(i, basis); break;
      case ObservableSpec::Kind::g2: op(i, i) = config_g2(i, basis, spec.g2_distance); break;
      case ObservableSpec::Kind::custom_diagonal: op(i, i) = spec.custom_diag(i); break;
      case ObservableSpec::Kind::density_fluctuations: {
        const double nd = config_density(i, basis);
        op(i, i) = nd * nd;  // fluctuations are evaluated as <n^2> - <n>^2; matrix form is n^2
        break;
      }
      default: break;
    }
  }
  return op;
}

Eigen::VectorXd density_diagonal(const Basis& basis) {
  Eigen::VectorXd d(basis.dim());
  for (std::size_t i = 0; i < basis.dim(); ++i) d(i) = config_density(i, basis);
  return d;
}

bool is_reduced_admissible(const Eigen::MatrixXcd& observable, const Eigen::MatrixXcd& projector_superop) {
  const Eigen::Index dim = observable.rows();
  if (observable.cols() != dim) throw std::invalid_argument("is_reduced_admissible: observable must be square");
  if (projector_superop.rows() != dim * dim || projector_superop.cols() != dim * dim)
    throw std::invalid_argument("is_reduced_admissible: projector dimension mismatch");
  Eigen::Map<const Eigen::VectorXcd> o(observable.data(), dim * dim);
  const Eigen::VectorXcd residual = o - projector_superop.adjoint() * o;
  return residual.norm() < 1e-10 * std::max(1.0, o.norm());
}

}  // namespace rydeff
