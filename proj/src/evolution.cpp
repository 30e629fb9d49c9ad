#include "rydeff/evolution.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <cstdio>
#include <unsupported/Eigen/MatrixFunctions>

namespace rydeff {

namespace {

Dopri5::Rhs vectorized_rhs(const Liouvillian& liouvillian) {
  const Eigen::Index d = static_cast<Eigen::Index>(liouvillian.dim());
  return [&liouvillian, d](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
    Eigen::Map<const DensityMatrix> rho(y.data(), d, d);
    Eigen::Map<DensityMatrix> out(dy.data(), d, d);
    liouvillian.apply(rho, out);
  };
}

double trace_of(const Eigen::VectorXcd& y, Eigen::Index d) {
  double tr = 0;
  for (Eigen::Index i = 0; i < d; ++i) tr += y(i * d + i).real();
  return tr;
}

DensityMatrix hermitized_unit_trace(const Eigen::VectorXcd& v, Eigen::Index d) {
  Eigen::Map<const DensityMatrix> m(v.data(), d, d);
  DensityMatrix rho = 0.5 * (m + m.adjoint());
  const double tr = rho.trace().real();
  if (std::abs(tr) < 1e-14) throw NumericalError("steady state candidate is traceless");
  rho /= tr;
  return rho;
}

}  // namespace

TrajectoryRecord integrate(const Liouvillian& liouvillian, const DensityMatrix& rho0, const TimeGrid& grid,
                           const std::vector<ObservableSpec>& observables, const OdeOptions& opts,
                           bool keep_states) {
  grid.validate();
  const Eigen::Index d = static_cast<Eigen::Index>(liouvillian.dim());
  if (rho0.rows() != d || rho0.cols() != d) throw std::invalid_argument("integrate: state dimension mismatch");
  if (!is_hermitian(rho0, 1e-9)) throw std::invalid_argument("integrate: initial state is not Hermitian");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-9)
    throw std::invalid_argument("integrate: initial state is not normalized");

  TrajectoryRecord rec;
  for (const auto& spec : observables) rec.observables[spec.name()];
  bool warned = false;

  auto record_sample = [&](double t, const Eigen::VectorXcd& y) {
    Eigen::VectorXcd yy = y;
    const double tr = trace_of(yy, d);
    if (std::abs(tr - 1.0) > 1e-8) {
      if (!warned) {
        std::fprintf(stderr, "warning: trace drift %.3e at t=%g, renormalizing samples\n", tr - 1.0, t);
        warned = true;
      }
      yy /= tr;
    }
    const DensityMatrix rho = Eigen::Map<const DensityMatrix>(yy.data(), d, d);
    rec.times.push_back(t);
    for (const auto& spec : observables) rec.observables[spec.name()].push_back(evaluate(spec, rho, liouvillian.basis()));
    if (keep_states) rec.states.push_back(rho);
  };

  Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
  const auto rhs = vectorized_rhs(liouvillian);
  if (grid.t_start() > 0) {
    Dopri5 solver(rhs, y, 0.0, opts);
    solver.advance_to(grid.t_start());
    y = solver.y();
  }
  integrate_sampled(rhs, y, grid.t_start(), grid.sample_times, record_sample, opts);

  const double final_drift = std::abs(trace_of(y, d) - 1.0);
  if (final_drift > std::max(1e-8, 10 * opts.abs_tol * std::sqrt(static_cast<double>(d))))
    throw NumericalError("trace drift " + std::to_string(final_drift) + " exceeds tolerance");
  return rec;
}

DensityMatrix integrate_to(const Liouvillian& liouvillian, const DensityMatrix& rho0, double t_end,
                           const OdeOptions& opts) {
  const Eigen::Index d = static_cast<Eigen::Index>(liouvillian.dim());
  if (rho0.rows() != d || rho0.cols() != d) throw std::invalid_argument("integrate_to: state dimension mismatch");
  Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
  if (t_end > 0) {
    Dopri5 solver(vectorized_rhs(liouvillian), y, 0.0, opts);
    solver.advance_to(t_end);
    y = solver.y();
  }
  return Eigen::Map<const DensityMatrix>(y.data(), d, d);
}

namespace {

double superop_residual(const SpMat& superop, const DensityMatrix& rho) {
  Eigen::Map<const Eigen::VectorXcd> v(rho.data(), rho.size());
  return (superop * v).norm();
}

SteadyStateResult dense_kernel_steady_state(const Eigen::MatrixXcd& superop, Eigen::Index d,
                                            const SteadyStateOptions& opts) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(superop);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of the generator failed");
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  SteadyStateResult result;
  result.method = "dense-kernel";
  result.multiplicity = 0;
  Eigen::Index best = -1;
  double best_trace = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) > opts.zero_tol * scale) continue;
    ++result.multiplicity;
    const double tr = std::abs(trace_of(es.eigenvectors().col(i), d));
    if (tr > best_trace) {
      best_trace = tr;
      best = i;
    }
  }
  if (best < 0) throw NumericalError("no kernel vector found: generator has no steady state at this tolerance");
  result.rho = hermitized_unit_trace(es.eigenvectors().col(best), d);
  return result;
}

// Ruiz equilibration: diagonal scalings that bring every row and column of
// r.asDiagonal() * m * c.asDiagonal() to unit max magnitude. Essential for
// generators mixing very different energy scales (large V against small
// effective rates), where an unscaled solve loses the kernel direction.
void ruiz_scales(const SpMat& m, Eigen::VectorXd* r, Eigen::VectorXd* c) {
  const Eigen::Index n = m.rows();
  *r = Eigen::VectorXd::Ones(n);
  *c = Eigen::VectorXd::Ones(n);
  for (int pass = 0; pass < 6; ++pass) {
    Eigen::VectorXd rowmax = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd colmax = Eigen::VectorXd::Zero(n);
    for (int col = 0; col < m.outerSize(); ++col)
      for (SpMat::InnerIterator it(m, col); it; ++it) {
        const double a = std::abs(it.value()) * (*r)(it.row()) * (*c)(col);
        rowmax(it.row()) = std::max(rowmax(it.row()), a);
        colmax(col) = std::max(colmax(col), a);
      }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (rowmax(i) > 0) (*r)(i) /= std::sqrt(rowmax(i));
      if (colmax(i) > 0) (*c)(i) /= std::sqrt(colmax(i));
    }
  }
}

bool trace_row_steady_state(const SpMat& superop, Eigen::Index d, SteadyStateResult* result) {
  // Rows of the generator are linearly dependent through trace preservation;
  // replace row 0 with the trace functional and solve M x = e_0 on the
  // equilibrated system.
  std::vector<Eigen::Triplet<std::complex<double>>> trips;
  trips.reserve(superop.nonZeros() + d);
  for (int col = 0; col < superop.outerSize(); ++col)
    for (SpMat::InnerIterator it(superop, col); it; ++it)
      if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < d; ++i) trips.emplace_back(0, i * d + i, 1.0);
  SpMat m(superop.rows(), superop.cols());
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();

  Eigen::VectorXd r, c;
  ruiz_scales(m, &r, &c);
  for (int col = 0; col < m.outerSize(); ++col)
    for (SpMat::InnerIterator it(m, col); it; ++it) it.valueRef() *= r(it.row()) * c(col);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(superop.rows());
  rhs(0) = r(0);

  Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<std::complex<double>>> solver;
  solver.preconditioner().setDroptol(1e-6);
  solver.preconditioner().setFillfactor(40);
  solver.setTolerance(1e-13);
  solver.setMaxIterations(5000);
  solver.compute(m);
  Eigen::VectorXcd x;
  bool ok = solver.info() == Eigen::Success;
  if (ok) {
    x = solver.solve(rhs);
    ok = x.allFinite() && solver.error() < 1e-10;
  }
  if (!ok) {
    // Direct LU suffers catastrophic fill-in beyond a few thousand rows.
    if (m.rows() > 20000) return false;
    Eigen::SparseLU<SpMat> lu(m);
    if (lu.info() != Eigen::Success) return false;
    x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) return false;
  }
  x = c.asDiagonal() * x;
  result->rho = hermitized_unit_trace(x, d);
  result->multiplicity = 1;
  result->method = "trace-row";
  return true;
}

}  // namespace

SteadyStateResult steady_state_superop(const SpMat& superop, std::size_t dim, const SteadyStateOptions& opts) {
  const Eigen::Index d = static_cast<Eigen::Index>(dim);
  if (superop.rows() != d * d || superop.cols() != d * d)
    throw std::invalid_argument("steady_state_superop: superoperator dimension mismatch");

  SteadyStateResult result;
  if (d * d <= 4096) {
    result = dense_kernel_steady_state(Eigen::MatrixXcd(superop), d, opts);
    result.residual = superop_residual(superop, result.rho);
    // A unique kernel direction is recomputed by the equilibrated linear
    // solve, which stays accurate when the generator is badly scaled.
    if (result.multiplicity == 1) {
      SteadyStateResult refined;
      if (trace_row_steady_state(superop, d, &refined)) {
        refined.residual = superop_residual(superop, refined.rho);
        if (refined.residual <= opts.residual_tol) return refined;
      }
    }
    if (result.residual <= opts.residual_tol) return result;
  } else if (trace_row_steady_state(superop, d, &result)) {
    result.residual = superop_residual(superop, result.rho);
    if (result.residual <= opts.residual_tol) return result;
  }

  if (!opts.allow_fallback)
    throw NumericalError("steady state solve failed (residual " + std::to_string(result.residual) + ")");

  // Long-time integration from the maximally mixed state.
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) y(i * d + i) = 1.0 / static_cast<double>(d);
  Dopri5 solver([&superop](double, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) { dv = superop * v; }, y,
                0.0, OdeOptions{1e-10, 1e-12});
  solver.advance_to(opts.fallback_time);
  result.rho = hermitized_unit_trace(solver.y(), d);
  result.multiplicity = 1;
  result.method = "long-time";
  result.residual = superop_residual(superop, result.rho);
  if (result.residual > 1e3 * opts.residual_tol)
    throw NumericalError("steady state not reached: residual " + std::to_string(result.residual));
  return result;
}

SteadyStateResult steady_state(const Liouvillian& liouvillian, const SteadyStateOptions& opts) {
  return steady_state_superop(liouvillian.superoperator(), liouvillian.dim(), opts);
}

double trace_distance(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  const Eigen::MatrixXcd diff = 0.5 * ((rho - sigma) + (rho - sigma).adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Eigen::VectorXcd expm_apply(const Eigen::MatrixXcd& generator, double t, const Eigen::VectorXcd& v) {
  return (t * generator).exp() * v;
}

Eigen::VectorXd expm_apply(const Eigen::MatrixXd& generator, double t, const Eigen::VectorXd& v) {
  return (t * generator).exp() * v;
}

Eigen::VectorXcd krylov_expm_apply(const SpMat& generator, double t, const Eigen::VectorXcd& v, double tol,
                                   int krylov_dim) {
  const Eigen::Index n = v.size();
  if (generator.rows() != n || generator.cols() != n)
    throw std::invalid_argument("krylov_expm_apply: dimension mismatch");
  if (t < 0) throw std::invalid_argument("krylov_expm_apply: negative time");
  const double vnorm = v.norm();
  if (t == 0 || vnorm == 0 || n == 0) return v;
  const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, n));

  double anorm = 0;  // 1-norm, only used to seed the step size
  for (int j = 0; j < generator.outerSize(); ++j) {
    double col = 0;
    for (SpMat::InnerIterator it(generator, j); it; ++it) col += std::abs(it.value());
    anorm = std::max(anorm, col);
  }
  const double budget = tol * vnorm / t;  // local error allowance per unit time

  Eigen::VectorXcd w = v;
  Eigen::MatrixXcd basis(n, m + 1);
  Eigen::MatrixXcd h(m + 2, m + 2);
  double t_done = 0;
  double tau = std::min(t, 10.0 / std::max(anorm, 1e-300));
  while (t_done < t) {
    const double beta = w.norm();
    if (beta == 0) break;
    h.setZero();
    basis.col(0) = w / beta;
    int k = m;
    bool breakdown = false;
    double avnorm = 0;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXcd p = generator * basis.col(j);
      for (int pass = 0; pass < 2; ++pass)  // re-orthogonalize once
        for (int i = 0; i <= j; ++i) {
          const std::complex<double> c = basis.col(i).dot(p);
          h(i, j) += c;
          p -= c * basis.col(i);
        }
      const double hnext = p.norm();
      if (hnext <= 1e-14 * std::max(anorm, 1.0)) {  // happy breakdown: subspace is invariant
        k = j + 1;
        breakdown = true;
        break;
      }
      h(j + 1, j) = hnext;
      basis.col(j + 1) = p / hnext;
    }
    if (!breakdown) {
      avnorm = (generator * basis.col(k)).norm();
      h(k + 1, k) = 1.0;  // augmented column: exposes the phi_1/phi_2 error terms
    }

    for (int rejects = 0;; ++rejects) {
      const double step = std::min(tau, t - t_done);
      const int fdim = breakdown ? k : k + 2;
      const Eigen::MatrixXcd f = (step * h.topLeftCorner(fdim, fdim)).exp();
      double err = 0;
      if (!breakdown) {
        const double err1 = beta * std::abs(f(k, 0));
        const double err2 = beta * std::abs(f(k + 1, 0)) * avnorm;
        if (err1 > 10 * err2)
          err = err2;
        else if (err1 > err2)
          err = err1 * err2 / (err1 - err2);
        else
          err = err1;
      }
      const double allowed = budget * step;
      if (std::isfinite(err) && err <= 1.2 * allowed) {
        const int used = breakdown ? k : k + 1;  // corrected scheme includes v_{m+1}
        w = beta * (basis.leftCols(used) * f.col(0).head(used));
        t_done += step;
        const double grow = err > 0 ? 0.9 * std::pow(allowed / err, 1.0 / k) : 5.0;
        tau = step * std::min(5.0, std::max(0.2, grow));
        break;
      }
      tau = std::isfinite(err) ? step * std::min(1.0, std::max(0.1, 0.9 * std::pow(allowed / err, 1.0 / k)))
                               : 0.5 * step;
      if (tau < 1e-14 * t || rejects > 60)
        throw NumericalError("krylov_expm_apply: step size underflow (tau=" + std::to_string(tau) + ")");
    }
  }
  return w;
}

TrajectoryRecord integrate_krylov(const Liouvillian& liouvillian, const DensityMatrix& rho0,
                                  const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                  double tol, int krylov_dim, bool keep_states) {
  grid.validate();
  const Eigen::Index d = static_cast<Eigen::Index>(liouvillian.dim());
  if (rho0.rows() != d || rho0.cols() != d)
    throw std::invalid_argument("integrate_krylov: state dimension mismatch");
  if (!is_hermitian(rho0, 1e-9)) throw std::invalid_argument("integrate_krylov: initial state is not Hermitian");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-9)
    throw std::invalid_argument("integrate_krylov: initial state is not normalized");
  const SpMat& superop = liouvillian.superoperator();

  TrajectoryRecord rec;
  for (const auto& spec : observables) rec.observables[spec.name()];
  bool warned = false;

  Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
  double t_prev = 0;
  for (double ts : grid.sample_times) {
    if (ts > t_prev) y = krylov_expm_apply(superop, ts - t_prev, y, tol, krylov_dim);
    t_prev = ts;
    Eigen::VectorXcd yy = y;
    const double tr = trace_of(yy, d);
    if (std::abs(tr - 1.0) > 1e-8) {
      if (!warned) {
        std::fprintf(stderr, "warning: trace drift %.3e at t=%g, renormalizing samples\n", tr - 1.0, ts);
        warned = true;
      }
      yy /= tr;
    }
    const DensityMatrix rho = Eigen::Map<const DensityMatrix>(yy.data(), d, d);
    rec.times.push_back(ts);
    for (const auto& spec : observables)
      rec.observables[spec.name()].push_back(evaluate(spec, rho, liouvillian.basis()));
    if (keep_states) rec.states.push_back(rho);
  }

  const double final_drift = std::abs(trace_of(y, d) - 1.0);
  if (final_drift > std::max(1e-8, 10 * tol))
    throw NumericalError("trace drift " + std::to_string(final_drift) + " exceeds tolerance");
  return rec;
}

}  // namespace rydeff
