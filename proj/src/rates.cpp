#include "rydeff/rates.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <unsupported/Eigen/MatrixFunctions>

#include "rydeff/evolution.hpp"
#include "rydeff/ode.hpp"

namespace rydeff {

using std::complex;

namespace {

void require_effective(const DephasingParams& params) {
  if (params.dephasing_gamma <= 0)
    throw std::invalid_argument("effective rates require dephasing_gamma > 0 (the perturbative expansion is around the dephasing fixed point)");
  if (params.rabi_omega <= 0) throw std::invalid_argument("effective rates require rabi_omega > 0");
}

}  // namespace

complex<double> gamma1(ConfigIndex config, int k, const DephasingParams& params,
                       const InteractionMatrix& interactions) {
  require_effective(params);
  const double h = interaction_field_h(config, k, interactions, params.detuning);
  return 1.0 / complex<double>(params.dephasing_gamma / 2, h);
}

complex<double> gamma2(ConfigIndex config, int k, int m, const DephasingParams& params,
                       const InteractionMatrix& interactions) {
  require_effective(params);
  const double h = pair_field_h(config, k, m, 1, 1, interactions, params.detuning);
  return 1.0 / complex<double>(params.dephasing_gamma, h);
}

complex<double> gamma3(ConfigIndex config, int k, int m, const DephasingParams& params,
                       const InteractionMatrix& interactions) {
  require_effective(params);
  const double h = pair_field_h(config, k, m, 0, 1, interactions, params.detuning) -
                   pair_field_h(config, k, m, 1, 0, interactions, params.detuning);
  return 1.0 / complex<double>(params.dephasing_gamma, h);
}

double rate2(ConfigIndex config, int k, const DephasingParams& params, const InteractionMatrix& interactions) {
  require_effective(params);
  const double h = interaction_field_h(config, k, interactions, params.detuning);
  const double g = params.dephasing_gamma;
  const double w = params.rabi_omega;
  return w * w * g / (g * g / 4 + h * h);
}

double rate4_beta(ConfigIndex config, int k, const DephasingParams& params,
                  const InteractionMatrix& interactions) {
  require_effective(params);
  const double h = interaction_field_h(config, k, interactions, params.detuning);
  const double g = params.dephasing_gamma;
  const double w4 = std::pow(params.rabi_omega, 4);
  const double d = g * g + 4 * h * h;
  return 64.0 * w4 * g * (g * g - 4 * h * h) / (d * d * d);
}

namespace {

// The hermitian operator-valued coefficients R_i^{km}, R'_i^{km} (i = 1..4),
// evaluated as scalars on a configuration.
struct RSet {
  double r[5];
  double rp[5];
};

RSet r_set(ConfigIndex config, int k, int m, const DephasingParams& params,
           const InteractionMatrix& interactions) {
  const complex<double> g1k = gamma1(config, k, params, interactions);
  const complex<double> g1m = gamma1(config, m, params, interactions);
  const complex<double> g2 = gamma2(config, k, m, params, interactions);
  const complex<double> g3 = gamma3(config, k, m, params, interactions);
  RSet s{};
  s.r[1] = 1.0;
  s.rp[1] = 2.0 * std::real((std::conj(g1m) * std::conj(g2) + g1m * g3) * std::conj(g1k));
  s.r[2] = std::real(g1k);
  s.rp[2] = 2.0 * std::real(std::conj(g1k) * (std::conj(g2) + g3));
  s.r[3] = -std::imag(g1k);
  s.rp[3] = -2.0 * std::imag(std::conj(g1k) * (std::conj(g2) + g3));
  s.r[4] = -2.0 * std::real(g1m) * std::real(g1m) + 2.0 * std::imag(g1m) * std::imag(g1m);
  s.rp[4] = 2.0 * std::real(g1k);
  return s;
}

// sigma^x_k R^{km} R'^{km} sigma^x_k (i = 1,4) + sigma^x_m R^{km} sigma^x_m R'^{km} (i = 2,3),
// i.e. one ordered (k,m) term of the double-flip rate, without the Omega^4 factor.
double double_flip_ordered(ConfigIndex config, int k, int m, const DephasingParams& params,
                           const InteractionMatrix& interactions) {
  const int n = interactions.n_sites();
  const ConfigIndex ck = flip2(config, k, n);
  const ConfigIndex cm = flip2(config, m, n);
  const RSet at_ck = r_set(ck, k, m, params, interactions);
  const RSet at_cm = r_set(cm, k, m, params, interactions);
  const RSet at_c = r_set(config, k, m, params, interactions);
  return at_ck.r[1] * at_ck.rp[1] + at_ck.r[4] * at_ck.rp[4] + at_cm.r[2] * at_c.rp[2] +
         at_cm.r[3] * at_c.rp[3];
}

}  // namespace

double rate4_double(ConfigIndex config, int k, int m, const DephasingParams& params,
                    const InteractionMatrix& interactions) {
  if (k == m) throw std::invalid_argument("rate4_double: k and m must differ");
  const double w4 = std::pow(params.rabi_omega, 4);
  return w4 * (double_flip_ordered(config, k, m, params, interactions) +
               double_flip_ordered(config, m, k, params, interactions));
}

double rate4_single(ConfigIndex config, int k, const DephasingParams& params,
                    const InteractionMatrix& interactions) {
  const int n = interactions.n_sites();
  const double w4 = std::pow(params.rabi_omega, 4);
  double acc = rate2(config, k, params, interactions) + rate4_beta(config, k, params, interactions);
  const ConfigIndex ck = flip2(config, k, n);
  for (int m = 0; m < n; ++m) {
    if (m == k) continue;
    const RSet km_ck = r_set(ck, k, m, params, interactions);
    const RSet km_c = r_set(config, k, m, params, interactions);
    const RSet mk_ck = r_set(ck, m, k, params, interactions);
    const RSet mk_c = r_set(config, m, k, params, interactions);
    double sum = 0;
    // i = 1,4: sigma^x_k R^{km} R'^{km} sigma^x_k + R^{mk} R'^{mk}
    sum += km_ck.r[1] * km_ck.rp[1] + km_ck.r[4] * km_ck.rp[4];
    sum += mk_c.r[1] * mk_c.rp[1] + mk_c.r[4] * mk_c.rp[4];
    // i = 2,3: sigma^x_k R^{mk} sigma^x_k R'^{mk} + R^{km} R'^{km}
    sum += mk_ck.r[2] * mk_c.rp[2] + mk_ck.r[3] * mk_c.rp[3];
    sum += km_c.r[2] * km_c.rp[2] + km_c.r[3] * km_c.rp[3];
    acc -= w4 * sum;
  }
  return acc;
}

ClassicalGenerator build_generator(const DephasingParams& params, const InteractionMatrix& interactions,
                                   int order, bool with_decay) {
  params.validate();
  require_effective(params);
  if (order != 2 && order != 4) throw std::invalid_argument("build_generator: order must be 2 or 4");
  if (order == 4 && with_decay)
    throw std::invalid_argument("build_generator: radiative decay is only derived together with the order-2 rates");
  const int n = interactions.n_sites();
  if (n > 20) throw std::invalid_argument("build_generator: n_sites > 20 is not supported");

  ClassicalGenerator gen;
  gen.n_sites = n;
  gen.order = order;
  gen.with_decay = with_decay;
  const std::size_t dim = gen.dim();

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> colsum(dim, 0.0);
  bool negative = false;
  for (std::size_t c = 0; c < dim; ++c) {
    for (int k = 0; k < n; ++k) {
      double r = order == 2 ? rate2(c, k, params, interactions) : rate4_single(c, k, params, interactions);
      if (with_decay && occ2(c, k, n)) r += params.decay_gamma_ryd;
      if (r < -1e-12) negative = true;
      trips.emplace_back(static_cast<int>(flip2(c, k, n)), static_cast<int>(c), r);
      colsum[c] += r;
    }
    if (order == 4) {
      for (int k = 0; k < n; ++k) {
        for (int m = k + 1; m < n; ++m) {
          const double r = rate4_double(c, k, m, params, interactions);
          if (r < -1e-12) negative = true;
          trips.emplace_back(static_cast<int>(flip2(flip2(c, k, n), m, n)), static_cast<int>(c), r);
          colsum[c] += r;
        }
      }
    }
  }
  for (std::size_t c = 0; c < dim; ++c)
    trips.emplace_back(static_cast<int>(c), static_cast<int>(c), -colsum[c]);
  gen.matrix.resize(dim, dim);
  gen.matrix.setFromTriplets(trips.begin(), trips.end());
  gen.has_negative_rates = negative;
  return gen;
}

TrajectoryRecord integrate_rate_equation(const ClassicalGenerator& generator, const Eigen::VectorXd& v0,
                                         const TimeGrid& grid, const std::vector<ObservableSpec>& observables,
                                         bool keep_distributions) {
  grid.validate();
  const std::size_t dim = generator.dim();
  if (v0.size() != static_cast<Eigen::Index>(dim))
    throw std::invalid_argument("integrate_rate_equation: initial vector dimension mismatch");
  if (v0.minCoeff() < -1e-12 || std::abs(v0.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("integrate_rate_equation: v0 is not a probability vector");

  TrajectoryRecord rec;
  for (const auto& spec : observables) rec.observables[spec.name()];
  bool warned = false;
  auto record_sample = [&](double t, const Eigen::VectorXd& v) {
    Eigen::VectorXd vv = v;
    const double s = vv.sum();
    if (std::abs(s - 1.0) > 1e-10) {
      if (!warned) {
        std::fprintf(stderr, "warning: probability drift %.3e at t=%g, renormalizing samples\n", s - 1.0, t);
        warned = true;
      }
      vv /= s;
    }
    rec.times.push_back(t);
    for (const auto& spec : observables) rec.observables[spec.name()].push_back(evaluate(spec, vv, generator.n_sites));
    if (keep_distributions) rec.distributions.push_back(vv);
  };

  if (dim <= 1024) {
    const Eigen::MatrixXd m(generator.matrix);
    std::map<long long, Eigen::MatrixXd> propagators;
    Eigen::VectorXd v = v0;
    double t = 0;
    for (double ts : grid.sample_times) {
      const double delta = ts - t;
      if (delta > 0) {
        const long long key = std::llround(delta * 1e12);
        auto it = propagators.find(key);
        if (it == propagators.end()) it = propagators.emplace(key, (delta * m).exp()).first;
        v = it->second * v;
        t = ts;
      }
      record_sample(ts, v);
    }
    return rec;
  }

  Eigen::VectorXcd y = v0.cast<complex<double>>();
  // keep a real sparse matvec in the hot path
  const Eigen::SparseMatrix<double>& m = generator.matrix;
  Dopri5::Rhs rhs = [&m](double, const Eigen::VectorXcd& x, Eigen::VectorXcd& dx) {
    const Eigen::VectorXd dr = m * x.real();
    dx = dr.cast<complex<double>>();
  };
  integrate_sampled(rhs, y, 0.0, grid.sample_times,
                    [&](double t, const Eigen::VectorXcd& yi) { record_sample(t, yi.real()); },
                    OdeOptions{1e-10, 1e-13});
  return rec;
}

void PositivityMap::to_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  std::fprintf(f, "V,Delta,all_rates_nonnegative\n");
  for (std::size_t i = 0; i < v_values.size(); ++i)
    for (std::size_t j = 0; j < delta_values.size(); ++j)
      std::fprintf(f, "%.17g,%.17g,%d\n", v_values[i], delta_values[j], all_rates_nonnegative(i, j));
  std::fclose(f);
}

PositivityMap scan_positivity(const DephasingParams& params, const LatticeSpec& lattice_template,
                              double v_min, double v_max, double delta_min, double delta_max,
                              int v_resolution, int delta_resolution) {
  if (v_resolution < 2 || delta_resolution < 2)
    throw std::invalid_argument("scan_positivity: resolution must be >= 2 per axis");
  require_effective(params);
  PositivityMap map;
  map.v_values.resize(v_resolution);
  map.delta_values.resize(delta_resolution);
  for (int i = 0; i < v_resolution; ++i)
    map.v_values[i] = v_min + (v_max - v_min) * i / (v_resolution - 1);
  for (int j = 0; j < delta_resolution; ++j)
    map.delta_values[j] = delta_min + (delta_max - delta_min) * j / (delta_resolution - 1);
  map.all_rates_nonnegative.resize(v_resolution, delta_resolution);

  const int n = lattice_template.n_sites;
  const std::size_t dim = two_level_dim(n);
  for (int i = 0; i < v_resolution; ++i) {
    LatticeSpec lattice = lattice_template;
    lattice.nn_strength_V = map.v_values[i];
    const InteractionMatrix interactions = build_chain_interactions(lattice);
    for (int j = 0; j < delta_resolution; ++j) {
      DephasingParams p = params;
      p.detuning = map.delta_values[j];
      bool ok = true;
      for (std::size_t c = 0; c < dim && ok; ++c) {
        for (int k = 0; k < n && ok; ++k) {
          if (rate4_single(c, k, p, interactions) < -1e-12) ok = false;
          for (int m = k + 1; m < n && ok; ++m)
            if (rate4_double(c, k, m, p, interactions) < -1e-12) ok = false;
        }
      }
      map.all_rates_nonnegative(i, j) = ok ? 1 : 0;
    }
  }
  return map;
}

}  // namespace rydeff
