#include "rydeff/qjmc.hpp"

#include <cmath>
#include <random>

#include "ensemble_stats.hpp"
#include "rydeff/evolution.hpp"
#include "rydeff/liouvillian.hpp"
#include "rydeff/threads.hpp"

namespace rydeff {

using std::complex;

JumpUnravelling make_unravelling(const DephasingParams& params, const InteractionMatrix& interactions) {
  params.validate();
  const int n = interactions.n_sites();
  if (n > 14) throw std::invalid_argument("make_unravelling: n_sites > 14 is not supported");
  JumpUnravelling u;
  u.n_sites = n;
  u.params = params;
  u.energies = classical_energies(Basis(n, 2), interactions, params.detuning);
  return u;
}

namespace {

Dopri5::Rhs make_effective_rhs(const JumpUnravelling& u) {
  const int n = u.n_sites;
  const std::size_t dim = u.dim();
  // -i H_eff: diagonal -iE(c) - w(c)/2 with w = (gamma + Gamma_ryd) sum_k n_k,
  // off-diagonal -i Omega on single flips
  Eigen::VectorXcd diag(dim);
  const double wrate = u.params.dephasing_gamma + u.params.decay_gamma_ryd;
  for (std::size_t c = 0; c < dim; ++c)
    diag(c) = complex<double>(-0.5 * wrate * __builtin_popcountll(c), -u.energies(c));
  const complex<double> miw(0, -u.params.rabi_omega);
  return [n, dim, diag, miw](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
    for (std::size_t c = 0; c < dim; ++c) dy(c) = diag(c) * y(c);
    for (int k = 0; k < n; ++k) {
      const std::size_t bit = std::size_t{1} << (n - 1 - k);
      for (std::size_t c = 0; c < dim; ++c) dy(c) += miw * y(c ^ bit);
    }
  };
}

struct ChannelWeights {
  std::vector<double> site_weight;  // sum_{c: n_k=1} |psi(c)|^2 per site
  double total_deph = 0, total_decay = 0;
};

ChannelWeights channel_weights(const Eigen::VectorXcd& psi, const JumpUnravelling& u) {
  const int n = u.n_sites;
  ChannelWeights w;
  w.site_weight.assign(n, 0.0);
  for (std::size_t c = 0; c < u.dim(); ++c) {
    const double a = std::norm(psi(c));
    if (a == 0) continue;
    for (int k = 0; k < n; ++k)
      if (occ2(c, k, n)) w.site_weight[k] += a;
  }
  for (int k = 0; k < n; ++k) {
    w.total_deph += u.params.dephasing_gamma * w.site_weight[k];
    w.total_decay += u.params.decay_gamma_ryd * w.site_weight[k];
  }
  return w;
}

void apply_jump(Eigen::VectorXcd& psi, const JumpUnravelling& u, int site, bool decay) {
  const int n = u.n_sites;
  const std::size_t dim = u.dim();
  if (!decay) {
    for (std::size_t c = 0; c < dim; ++c)
      if (!occ2(c, site, n)) psi(c) = 0;
  } else {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
    for (std::size_t c = 0; c < dim; ++c)
      if (occ2(c, site, n)) out(flip2(c, site, n)) = psi(c);
    psi = std::move(out);
  }
  const double nrm = psi.norm();
  if (nrm < 1e-150) throw NumericalError("quantum jump applied to a channel with vanishing weight");
  psi /= nrm;
}

// Runs one trajectory, invoking on_sample(t, psi_normalized) at sample times
// and on_jump(t) at each jump.
void run_trajectory(const JumpUnravelling& u, const Eigen::VectorXcd& psi0, const std::vector<double>& samples,
                    std::uint64_t seed, const QjmcOptions& opts,
                    const std::function<void(double, const Eigen::VectorXcd&)>& on_sample,
                    const std::function<void(double)>& on_jump) {
  const double t_end = samples.empty() ? 0.0 : samples.back();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(std::numeric_limits<double>::min(), 1.0);

  Eigen::VectorXcd psi = psi0 / psi0.norm();
  std::size_t next = 0;
  while (next < samples.size() && samples[next] <= 1e-15) {
    on_sample(samples[next], psi);
    ++next;
  }
  if (next >= samples.size()) return;

  const Dopri5::Rhs rhs = make_effective_rhs(u);
  Dopri5 solver(rhs, psi, 0.0, opts.ode);
  double threshold = unif(rng);

  while (solver.t() < t_end) {
    if (!solver.step(t_end)) break;
    double t_reached = solver.t();
    const double n2_end = solver.y().squaredNorm();
    bool jumped = false;
    double t_jump = 0;
    if (n2_end < threshold) {
      // norm^2 crossed the threshold inside [t_prev, t]; bisect on the dense output
      double a = solver.t_prev(), b = solver.t();
      for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, b); ++it) {
        const double mid = 0.5 * (a + b);
        if (solver.dense_eval(mid).squaredNorm() >= threshold)
          a = mid;
        else
          b = mid;
      }
      t_jump = 0.5 * (a + b);
      t_reached = t_jump;
      jumped = true;
    }
    while (next < samples.size() && samples[next] <= t_reached + 1e-12) {
      Eigen::VectorXcd ys = solver.dense_eval(std::min(samples[next], solver.t()));
      const double nrm = ys.norm();
      if (nrm < 1e-150) throw NumericalError("state norm underflow between samples");
      on_sample(samples[next], ys / nrm);
      ++next;
    }
    if (jumped) {
      psi = solver.dense_eval(t_jump);
      const ChannelWeights w = channel_weights(psi, u);
      const double total = w.total_deph + w.total_decay;
      if (total <= 0) throw NumericalError("jump triggered with zero total jump rate");
      double pick = unif(rng) * total;
      int site = -1;
      bool decay = false;
      for (int k = 0; k < u.n_sites && site < 0; ++k) {
        pick -= u.params.dephasing_gamma * w.site_weight[k];
        if (pick <= 0) site = k;
      }
      if (site < 0) {
        decay = true;
        for (int k = 0; k < u.n_sites && site < 0; ++k) {
          pick -= u.params.decay_gamma_ryd * w.site_weight[k];
          if (pick <= 0) site = k;
        }
        if (site < 0) site = u.n_sites - 1;
      }
      apply_jump(psi, u, site, decay);
      if (on_jump) on_jump(t_jump);
      solver.reset_state(psi, t_jump);
      threshold = unif(rng);
    }
  }
}

}  // namespace

TrajectoryRecord sample_trajectory(const JumpUnravelling& unravelling, const Eigen::VectorXcd& psi0,
                                   const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                   std::uint64_t seed, const QjmcOptions& opts) {
  grid.validate();
  if (std::abs(psi0.norm() - 1.0) > 1e-9) throw std::invalid_argument("sample_trajectory: psi0 must be normalized");
  const Basis basis(unravelling.n_sites, 2);
  TrajectoryRecord rec;
  for (const auto& spec : observables) rec.observables[spec.name()];
  const double t_final = grid.t_end();
  run_trajectory(
      unravelling, psi0, grid.sample_times, seed, opts,
      [&](double t, const Eigen::VectorXcd& psi) {
        rec.times.push_back(t);
        for (const auto& spec : observables) rec.observables[spec.name()].push_back(evaluate(spec, psi, basis));
        if (opts.keep_final_state && t >= t_final - 1e-12) rec.states.push_back(psi * psi.adjoint());
      },
      nullptr);
  return rec;
}

std::vector<double> trajectory_jump_times(const JumpUnravelling& unravelling, const Eigen::VectorXcd& psi0,
                                          double t_end, std::uint64_t seed, const QjmcOptions& opts) {
  std::vector<double> jumps;
  std::vector<double> samples{0.0, t_end};
  run_trajectory(
      unravelling, psi0 / psi0.norm(), samples, seed, opts, [](double, const Eigen::VectorXcd&) {},
      [&](double t) { jumps.push_back(t); });
  return jumps;
}

TrajectoryRecord average_trajectories(const JumpUnravelling& unravelling, const Eigen::VectorXcd& psi0,
                                      const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                      int n_traj, std::uint64_t base_seed, const QjmcOptions& opts) {
  if (n_traj < 2) throw std::invalid_argument("average_trajectories: n_traj must be >= 2");
  grid.validate();
  const std::size_t n_samples = grid.sample_times.size();
  const Basis basis(unravelling.n_sites, 2);

  // Fluctuations are an ensemble quantity: <n^2> - <n>^2 with both moments
  // trajectory-averaged. Evaluate the two moments per trajectory and combine
  // afterwards instead of averaging per-trajectory variances.
  std::vector<ObservableSpec> eval_specs;
  auto eval_index = [&](const ObservableSpec& spec) -> std::size_t {
    for (std::size_t i = 0; i < eval_specs.size(); ++i)
      if (eval_specs[i].name() == spec.name()) return i;
    eval_specs.push_back(spec);
    return eval_specs.size() - 1;
  };
  std::vector<detail::EnsembleOutput> outputs;
  for (const auto& spec : observables) {
    if (spec.kind == ObservableSpec::Kind::density_fluctuations) {
      ObservableSpec n2;
      n2.kind = ObservableSpec::Kind::custom_diagonal;
      n2.custom_diag = density_diagonal(basis).array().square();
      n2.custom_name = "__density_m2";
      outputs.push_back({spec.name(), true, eval_index(ObservableSpec{}), eval_index(n2)});
    } else {
      outputs.push_back({spec.name(), false, eval_index(spec), 0});
    }
  }

  const std::size_t n_eval = eval_specs.size();
  std::vector<std::vector<std::vector<double>>> per_traj(n_traj);  // [traj][eval][sample]
  std::vector<Eigen::MatrixXcd> per_traj_state(opts.keep_final_state ? n_traj : 0);
  parallel_for(static_cast<std::size_t>(n_traj), [&](std::size_t i) {
    TrajectoryRecord rec = sample_trajectory(unravelling, psi0, grid, eval_specs, base_seed + i, opts);
    per_traj[i].resize(n_eval);
    for (std::size_t o = 0; o < n_eval; ++o) per_traj[i][o] = std::move(rec.observables[eval_specs[o].name()]);
    if (opts.keep_final_state) per_traj_state[i] = std::move(rec.states.at(0));
  });

  TrajectoryRecord out;
  out.times = grid.sample_times;
  detail::reduce_ensemble(outputs, per_traj, n_samples, out);
  if (opts.keep_final_state) {
    Eigen::MatrixXcd rho = per_traj_state[0];
    for (int i = 1; i < n_traj; ++i) rho += per_traj_state[i];
    out.states.push_back(rho / static_cast<double>(n_traj));
  }
  return out;
}

}  // namespace rydeff
