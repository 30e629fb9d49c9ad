#include "rydeff/kmc.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "ensemble_stats.hpp"
#include "rydeff/threads.hpp"

namespace rydeff {

// --- RateTree ---

RateTree::RateTree(int n) : n_(n), values_(n, 0.0), tree_(n + 1, 0.0) {
  if (n < 1) throw std::invalid_argument("RateTree: size must be >= 1");
}

void RateTree::set(int i, double v) {
  const double delta = v - values_[i];
  values_[i] = v;
  for (int j = i + 1; j <= n_; j += j & -j) tree_[j] += delta;
}

void RateTree::rebuild(const std::vector<double>& values) {
  values_ = values;
  std::fill(tree_.begin(), tree_.end(), 0.0);
  for (int i = 1; i <= n_; ++i) {
    tree_[i] += values_[i - 1];
    const int parent = i + (i & -i);
    if (parent <= n_) tree_[parent] += tree_[i];
  }
}

double RateTree::total() const {
  double s = 0;
  for (int i = n_; i > 0; i -= i & -i) s += tree_[i];
  return s;
}

int RateTree::sample(double target) const {
  int pos = 0;
  int step = 1;
  while ((step << 1) <= n_) step <<= 1;
  for (; step > 0; step >>= 1) {
    const int next = pos + step;
    if (next <= n_ && tree_[next] <= target) {
      pos = next;
      target -= tree_[next];
    }
  }
  int idx = std::min(pos, n_ - 1);
  // Guard against landing on a zero-rate site at a cumulative boundary.
  while (idx < n_ - 1 && values_[idx] <= 0) ++idx;
  while (idx > 0 && values_[idx] <= 0) --idx;
  return idx;
}

// --- helpers ---

int interaction_cutoff(const DephasingParams& params, const LatticeSpec& lattice, double eps_rate) {
  lattice.validate();
  if (eps_rate <= 0) throw std::invalid_argument("interaction_cutoff: eps_rate must be > 0");
  const int max_d = std::max(1, lattice.boundary == Boundary::periodic ? lattice.n_sites / 2
                                                                       : lattice.n_sites - 1);
  if (params.rabi_omega <= 0 || lattice.nn_strength_V <= 0 || params.dephasing_gamma <= 0) return 1;
  const double g = params.dephasing_gamma;
  const double threshold = eps_rate * 0.25 * g * g / (params.rabi_omega * params.rabi_omega * g);
  int d = 1;
  while (d < max_d &&
         lattice.nn_strength_V / std::pow(static_cast<double>(d), lattice.exponent_p) >= threshold)
    ++d;
  return d;
}

std::vector<std::uint8_t> config_bits(ConfigIndex config, int n_sites) {
  if (n_sites < 1 || n_sites > 62) throw std::invalid_argument("config_bits: n_sites out of range");
  std::vector<std::uint8_t> bits(n_sites);
  for (int s = 0; s < n_sites; ++s) bits[s] = static_cast<std::uint8_t>(occ2(config, s, n_sites));
  return bits;
}

ConfigIndex config_index(const std::vector<std::uint8_t>& bits) {
  const int n = static_cast<int>(bits.size());
  if (n < 1 || n > 62) throw std::invalid_argument("config_index: size out of range");
  ConfigIndex c = 0;
  for (int s = 0; s < n; ++s) {
    if (bits[s] > 1) throw std::invalid_argument("config_index: bits must be 0 or 1");
    if (bits[s]) c |= ConfigIndex{1} << (n - 1 - s);
  }
  return c;
}

// --- KmcRunner ---

KmcRunner::KmcRunner(const DephasingParams& params, const InteractionMatrix& interactions,
                     std::vector<std::uint8_t> config0, std::uint64_t resync_interval)
    : n_(interactions.n_sites()),
      params_(params),
      resync_interval_(resync_interval),
      tree_(interactions.n_sites()) {
  neighbours_.resize(n_);
  for (int k = 0; k < n_; ++k)
    for (int m = 0; m < n_; ++m)
      if (m != k && interactions(k, m) != 0.0) neighbours_[k].emplace_back(m, interactions(k, m));
  init(std::move(config0));
}

KmcRunner::KmcRunner(const DephasingParams& params, const LatticeSpec& lattice,
                     std::vector<std::uint8_t> config0, const KmcOptions& opts)
    : n_(lattice.n_sites),
      params_(params),
      resync_interval_(opts.resync_interval),
      tree_(std::max(1, lattice.n_sites)) {
  lattice.validate();
  const int cutoff =
      opts.cutoff_distance >= 0 ? opts.cutoff_distance : interaction_cutoff(params, lattice, opts.eps_rate);
  const int max_d = lattice.boundary == Boundary::periodic ? n_ / 2 : n_ - 1;
  const int d_max = std::min(cutoff, max_d);
  neighbours_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    for (int o = 1; o <= d_max; ++o) {
      const double v = lattice.nn_strength_V / std::pow(static_cast<double>(o), lattice.exponent_p);
      if (v == 0.0) continue;
      if (lattice.boundary == Boundary::periodic) {
        const int lo = (k - o + n_) % n_;
        const int hi = (k + o) % n_;
        neighbours_[k].emplace_back(lo, v);
        if (hi != lo) neighbours_[k].emplace_back(hi, v);
      } else {
        if (k - o >= 0) neighbours_[k].emplace_back(k - o, v);
        if (k + o < n_) neighbours_[k].emplace_back(k + o, v);
      }
    }
  }
  init(std::move(config0));
}

void KmcRunner::init(std::vector<std::uint8_t> config0) {
  if (n_ < 1) throw std::invalid_argument("KmcRunner: empty lattice");
  if (static_cast<int>(config0.size()) != n_)
    throw std::invalid_argument("KmcRunner: config0 length does not match the lattice");
  for (auto b : config0)
    if (b > 1) throw std::invalid_argument("KmcRunner: config0 entries must be 0 or 1");
  if (params_.rabi_omega > 0 && params_.dephasing_gamma <= 0)
    throw std::invalid_argument("KmcRunner: order-2 rates require dephasing_gamma > 0");
  if (resync_interval_ == 0) throw std::invalid_argument("KmcRunner: resync_interval must be >= 1");
  state_.config = std::move(config0);
  state_.fields.assign(n_, 0.0);
  state_.rates.assign(n_, 0.0);
  state_.time = 0;
  state_.events = 0;
  resync();
}

double KmcRunner::rate_for(int k) const {
  double r = 0;
  if (params_.rabi_omega > 0) {
    const double g = params_.dephasing_gamma;
    const double h = state_.fields[k];
    r = params_.rabi_omega * params_.rabi_omega * g / (0.25 * g * g + h * h);
  }
  if (state_.config[k]) r += params_.decay_gamma_ryd;
  if (!(r >= 0)) throw std::logic_error("KmcRunner: negative or non-finite rate");
  return r;
}

void KmcRunner::resync() {
  for (int k = 0; k < n_; ++k) {
    double h = params_.detuning;
    for (const auto& [m, v] : neighbours_[k]) h += v * state_.config[m];
    state_.fields[k] = h;
  }
  for (int k = 0; k < n_; ++k) state_.rates[k] = rate_for(k);
  tree_.rebuild(state_.rates);
}

void KmcRunner::apply_flip(int site) {
  state_.config[site] ^= 1;
  const double dn = state_.config[site] ? 1.0 : -1.0;
  for (const auto& [m, v] : neighbours_[site]) {
    state_.fields[m] += dn * v;
    const double r = rate_for(m);
    state_.rates[m] = r;
    tree_.set(m, r);
  }
  // The flipped site's own field is unchanged (no self-interaction) but the
  // decay channel toggles with its occupation.
  const double r = rate_for(site);
  state_.rates[site] = r;
  tree_.set(site, r);
  if (++state_.events % resync_interval_ == 0) resync();
}

void KmcRunner::force_flip(int site) {
  if (site < 0 || site >= n_) throw std::invalid_argument("KmcRunner::force_flip: site out of range");
  apply_flip(site);
}

int KmcRunner::fire_at(double t_event, std::mt19937_64& rng) {
  const double total = tree_.total();
  if (total <= 0) return -1;
  state_.time = t_event;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int site = tree_.sample(uni(rng) * total);
  apply_flip(site);
  return site;
}

int KmcRunner::step(std::mt19937_64& rng) {
  const double total = tree_.total();
  if (total <= 0) return -1;
  std::exponential_distribution<double> waiting(total);
  return fire_at(state_.time + waiting(rng), rng);
}

// --- Gillespie driver and observable evaluation on configurations ---

namespace {

using ConfigEval = std::function<double(const std::vector<std::uint8_t>&)>;

struct EvalPlan {
  std::vector<ConfigEval> evals;
  std::vector<std::string> eval_names;
  std::vector<detail::EnsembleOutput> outputs;
};

EvalPlan make_eval_plan(const std::vector<ObservableSpec>& observables, int n) {
  EvalPlan plan;
  auto add = [&](const std::string& name, ConfigEval f) -> std::size_t {
    for (std::size_t i = 0; i < plan.eval_names.size(); ++i)
      if (plan.eval_names[i] == name) return i;
    plan.eval_names.push_back(name);
    plan.evals.push_back(std::move(f));
    return plan.evals.size() - 1;
  };
  const ConfigEval density = [n](const std::vector<std::uint8_t>& c) {
    long total = 0;
    for (auto b : c) total += b;
    return static_cast<double>(total) / n;
  };
  for (const auto& spec : observables) {
    switch (spec.kind) {
      case ObservableSpec::Kind::mean_density:
        plan.outputs.push_back({spec.name(), false, add("mean_density", density), 0});
        break;
      case ObservableSpec::Kind::density_fluctuations: {
        const ConfigEval m2 = [density](const std::vector<std::uint8_t>& c) {
          const double d = density(c);
          return d * d;
        };
        plan.outputs.push_back({spec.name(), true, add("mean_density", density), add("__density_m2", m2)});
        break;
      }
      case ObservableSpec::Kind::g2: {
        const int d = spec.g2_distance;
        const ConfigEval g = [n, d](const std::vector<std::uint8_t>& c) {
          double acc = 0;
          for (int k = 0; k < n; ++k) acc += c[k] * c[(k + d) % n];
          return acc / n;
        };
        plan.outputs.push_back({spec.name(), false, add(spec.name(), g), 0});
        break;
      }
      case ObservableSpec::Kind::custom_diagonal: {
        if (n > 20 || spec.custom_diag.size() != static_cast<Eigen::Index>(std::size_t{1} << n))
          throw std::invalid_argument("gillespie: custom_diagonal requires N <= 20 and a 2^N weight vector");
        const Eigen::VectorXd diag = spec.custom_diag;
        const ConfigEval f = [diag](const std::vector<std::uint8_t>& c) {
          return diag(static_cast<Eigen::Index>(config_index(c)));
        };
        plan.outputs.push_back({spec.name(), false, add(spec.name(), f), 0});
        break;
      }
      case ObservableSpec::Kind::sigma_x_mean:
        throw std::invalid_argument(
            "sigma_x is incompatible with classical Monte Carlo: configurations carry no coherence");
    }
  }
  return plan;
}

// One run; returns per-eval columns and optionally config snapshots.
std::vector<std::vector<double>> run_columns(KmcRunner runner, const TimeGrid& grid, const EvalPlan& plan,
                                             std::uint64_t seed, std::vector<ConfigIndex>* snapshots) {
  std::mt19937_64 rng(seed);
  const std::size_t n_samples = grid.sample_times.size();
  std::vector<std::vector<double>> cols(plan.evals.size());
  for (auto& c : cols) c.reserve(n_samples);
  auto record = [&]() {
    for (std::size_t e = 0; e < plan.evals.size(); ++e) cols[e].push_back(plan.evals[e](runner.state().config));
    if (snapshots) snapshots->push_back(config_index(runner.state().config));
  };
  std::size_t s = 0;
  while (s < n_samples) {
    const double total = runner.total_rate();
    double t_event = std::numeric_limits<double>::infinity();
    if (total > 0) {
      std::exponential_distribution<double> waiting(total);
      t_event = runner.state().time + waiting(rng);
    }
    while (s < n_samples && grid.sample_times[s] <= t_event) {
      record();
      ++s;
    }
    if (s >= n_samples || !(t_event < std::numeric_limits<double>::infinity())) break;
    runner.fire_at(t_event, rng);
  }
  // Absorbing configuration: remaining samples see the frozen config.
  while (s < n_samples) {
    record();
    ++s;
  }
  return cols;
}

TrajectoryRecord run_single(const KmcRunner& prototype, const TimeGrid& grid,
                            const std::vector<ObservableSpec>& observables, std::uint64_t seed,
                            const KmcOptions& opts) {
  grid.validate();
  const EvalPlan plan = make_eval_plan(observables, prototype.n_sites());
  std::vector<ConfigIndex> snaps;
  const auto cols = run_columns(prototype, grid, plan, seed, opts.record_configs ? &snaps : nullptr);
  TrajectoryRecord rec;
  rec.times = grid.sample_times;
  for (const auto& out : plan.outputs) {
    auto& col = rec.observables[out.name];
    if (!out.is_fluct) {
      col = cols[out.idx_a];
    } else {
      col.resize(cols[out.idx_a].size());
      for (std::size_t i = 0; i < col.size(); ++i)
        col[i] = cols[out.idx_b][i] - cols[out.idx_a][i] * cols[out.idx_a][i];
    }
  }
  rec.config_snapshots = std::move(snaps);
  return rec;
}

TrajectoryRecord run_average(const KmcRunner& prototype, const TimeGrid& grid,
                             const std::vector<ObservableSpec>& observables, int n_runs,
                             std::uint64_t base_seed) {
  grid.validate();
  if (n_runs < 2) throw std::invalid_argument("average_gillespie: n_runs must be >= 2");
  const EvalPlan plan = make_eval_plan(observables, prototype.n_sites());
  std::vector<std::vector<std::vector<double>>> per_run(n_runs);
  parallel_for(static_cast<std::size_t>(n_runs), [&](std::size_t i) {
    per_run[i] = run_columns(prototype, grid, plan, base_seed + i, nullptr);
  });
  TrajectoryRecord out;
  out.times = grid.sample_times;
  detail::reduce_ensemble(plan.outputs, per_run, grid.sample_times.size(), out);
  return out;
}

}  // namespace

TrajectoryRecord gillespie_run(const DephasingParams& params, const InteractionMatrix& interactions,
                               ConfigIndex config0, const TimeGrid& grid,
                               const std::vector<ObservableSpec>& observables, std::uint64_t seed,
                               const KmcOptions& opts) {
  KmcRunner runner(params, interactions, config_bits(config0, interactions.n_sites()), opts.resync_interval);
  return run_single(runner, grid, observables, seed, opts);
}

TrajectoryRecord gillespie_run(const DephasingParams& params, const LatticeSpec& lattice,
                               const std::vector<std::uint8_t>& config0, const TimeGrid& grid,
                               const std::vector<ObservableSpec>& observables, std::uint64_t seed,
                               const KmcOptions& opts) {
  KmcRunner runner(params, lattice, config0, opts);
  return run_single(runner, grid, observables, seed, opts);
}

TrajectoryRecord average_gillespie(const DephasingParams& params, const InteractionMatrix& interactions,
                                   ConfigIndex config0, const TimeGrid& grid,
                                   const std::vector<ObservableSpec>& observables, int n_runs,
                                   std::uint64_t base_seed, const KmcOptions& opts) {
  KmcRunner runner(params, interactions, config_bits(config0, interactions.n_sites()), opts.resync_interval);
  return run_average(runner, grid, observables, n_runs, base_seed);
}

TrajectoryRecord average_gillespie(const DephasingParams& params, const LatticeSpec& lattice,
                                   const std::vector<std::uint8_t>& config0, const TimeGrid& grid,
                                   const std::vector<ObservableSpec>& observables, int n_runs,
                                   std::uint64_t base_seed, const KmcOptions& opts) {
  KmcRunner runner(params, lattice, config0, opts);
  return run_average(runner, grid, observables, n_runs, base_seed);
}

Eigen::VectorXd empirical_distribution(const DephasingParams& params, const InteractionMatrix& interactions,
                                       ConfigIndex config0, double t, int n_runs, std::uint64_t base_seed,
                                       const KmcOptions& opts) {
  const int n = interactions.n_sites();
  if (n > 20) throw std::invalid_argument("empirical_distribution: N > 20 is not supported");
  if (n_runs < 1) throw std::invalid_argument("empirical_distribution: n_runs must be >= 1");
  if (t < 0) throw std::invalid_argument("empirical_distribution: t must be >= 0");
  const KmcRunner prototype(params, interactions, config_bits(config0, n), opts.resync_interval);
  std::vector<std::uint32_t> finals(n_runs);
  parallel_for(static_cast<std::size_t>(n_runs), [&](std::size_t i) {
    KmcRunner runner = prototype;
    std::mt19937_64 rng(base_seed + i);
    while (true) {
      const double total = runner.total_rate();
      if (total <= 0) break;
      std::exponential_distribution<double> waiting(total);
      const double t_event = runner.state().time + waiting(rng);
      if (t_event > t) break;
      runner.fire_at(t_event, rng);
    }
    finals[i] = static_cast<std::uint32_t>(config_index(runner.state().config));
  });
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(std::size_t{1} << n);
  for (auto c : finals) dist(c) += 1.0;
  return dist / static_cast<double>(n_runs);
}

}  // namespace rydeff
