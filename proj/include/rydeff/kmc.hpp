#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rydeff/basis.hpp"
#include "rydeff/lattice.hpp"
#include "rydeff/observables.hpp"
#include "rydeff/record.hpp"

namespace rydeff {

// Binary-indexed (Fenwick) tree over nonnegative per-site rates: O(log N)
// point updates and cumulative sampling for the direct Gillespie method.
class RateTree {
 public:
  explicit RateTree(int n);

  int size() const { return n_; }
  double value(int i) const { return values_[i]; }
  double total() const;

  void set(int i, double v);
  void rebuild(const std::vector<double>& values);

  // Index selected by a cumulative target in [0, total()).
  int sample(double target) const;

 private:
  int n_;
  std::vector<double> values_;
  std::vector<double> tree_;  // 1-based partial sums
};

struct KmcState {
  std::vector<std::uint8_t> config;  // 0 = down, 1 = up, site 0 first
  std::vector<double> fields;        // h_k = Delta + sum_q V_kq n_q (cutoff-truncated)
  std::vector<double> rates;         // current flip rate per site
  double time = 0;
  std::uint64_t events = 0;
};

struct KmcOptions {
  int cutoff_distance = -1;                 // chain overloads: -1 derives it from eps_rate
  double eps_rate = 1e-6;                   // relative rate-error budget for the cutoff
  std::uint64_t resync_interval = 1000000;  // full rate recompute every this many events
  bool record_configs = false;              // per-sample config snapshots (needs N <= 62)
};

// Smallest chain distance beyond which dropped interactions perturb the
// second-order rates by less than eps_rate (relative), capped at the largest
// distance the chain supports.
int interaction_cutoff(const DephasingParams& params, const LatticeSpec& lattice, double eps_rate = 1e-6);

// Bit-vector configuration <-> classical basis index (site 0 = MSB).
std::vector<std::uint8_t> config_bits(ConfigIndex config, int n_sites);
ConfigIndex config_index(const std::vector<std::uint8_t>& bits);

// Continuous-time Monte Carlo state for the order-2 rate equation (with
// optional radiative decay). Flip rates are Gamma_k = Omega^2 gamma /
// ((gamma/2)^2 + h_k^2) for down spins, plus Gamma_ryd for up spins; fields
// are maintained incrementally over an interaction neighbourhood.
class KmcRunner {
 public:
  // All-pairs neighbourhood from an explicit interaction matrix.
  KmcRunner(const DephasingParams& params, const InteractionMatrix& interactions,
            std::vector<std::uint8_t> config0, std::uint64_t resync_interval = 1000000);
  // Power-law chain with a distance cutoff (large N).
  KmcRunner(const DephasingParams& params, const LatticeSpec& lattice, std::vector<std::uint8_t> config0,
            const KmcOptions& opts = {});

  int n_sites() const { return n_; }
  const KmcState& state() const { return state_; }
  double total_rate() const { return tree_.total(); }
  double site_rate(int k) const { return state_.rates[k]; }

  // One Gillespie event: waiting time ~ Exp(total rate), flip site chosen
  // proportionally to its rate. Returns the flipped site, or -1 when the
  // total rate vanishes (absorbing configuration; the clock is not advanced).
  int step(std::mt19937_64& rng);

  // Advance the clock to an externally drawn event time and fire one flip.
  int fire_at(double t_event, std::mt19937_64& rng);

  // Flip a site and propagate the rate update through its interaction
  // neighbourhood without advancing the clock (diagnostics and tests).
  void force_flip(int site);

  // Full recompute of fields, rates and the sampling tree.
  void resync();

 private:
  double rate_for(int k) const;
  void apply_flip(int site);
  void init(std::vector<std::uint8_t> config0);

  int n_ = 0;
  DephasingParams params_;
  std::vector<std::vector<std::pair<int, double>>> neighbours_;  // (site, V)
  std::uint64_t resync_interval_ = 1000000;
  KmcState state_;
  RateTree tree_;
};

TrajectoryRecord gillespie_run(const DephasingParams& params, const InteractionMatrix& interactions,
                               ConfigIndex config0, const TimeGrid& grid,
                               const std::vector<ObservableSpec>& observables, std::uint64_t seed,
                               const KmcOptions& opts = {});
TrajectoryRecord gillespie_run(const DephasingParams& params, const LatticeSpec& lattice,
                               const std::vector<std::uint8_t>& config0, const TimeGrid& grid,
                               const std::vector<ObservableSpec>& observables, std::uint64_t seed,
                               const KmcOptions& opts = {});

// Ensemble average with standard errors; run i uses seed base_seed + i and
// the aggregation is performed in fixed index order.
TrajectoryRecord average_gillespie(const DephasingParams& params, const InteractionMatrix& interactions,
                                   ConfigIndex config0, const TimeGrid& grid,
                                   const std::vector<ObservableSpec>& observables, int n_runs,
                                   std::uint64_t base_seed, const KmcOptions& opts = {});
TrajectoryRecord average_gillespie(const DephasingParams& params, const LatticeSpec& lattice,
                                   const std::vector<std::uint8_t>& config0, const TimeGrid& grid,
                                   const std::vector<ObservableSpec>& observables, int n_runs,
                                   std::uint64_t base_seed, const KmcOptions& opts = {});

// Empirical configuration distribution at time t over independent runs
// (N <= 20; for chi-squared comparisons against the exact rate equation).
Eigen::VectorXd empirical_distribution(const DephasingParams& params, const InteractionMatrix& interactions,
                                       ConfigIndex config0, double t, int n_runs, std::uint64_t base_seed,
                                       const KmcOptions& opts = {});

}  // namespace rydeff
