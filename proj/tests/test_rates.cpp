#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rydeff/nz_oracle.hpp"
#include "rydeff/rates.hpp"

using namespace rydeff;

namespace {

InteractionMatrix chain(int n, double v, Boundary b = Boundary::periodic, int p = 6) {
  return build_chain_interactions(LatticeSpec{n, p, v, b});
}

// entrywise comparison with a relative tolerance and an absolute floor tied
// to the matrix scale
void check_generator_match(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rel_tol) {
  REQUIRE(a.rows() == b.rows());
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  double worst = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double denom = std::max({std::abs(a(i, j)), std::abs(b(i, j)), 1e-10 * scale});
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / denom);
    }
  CHECK(worst < rel_tol);
}

}  // namespace

TEST_CASE("rate2 closed-form values") {
  DephasingParams p{1.0, 0.0, 10.0, 0.0};
  auto v1 = chain(1, 0.0);
  CHECK(rate2(0, 0, p, v1) == doctest::Approx(0.4).epsilon(1e-14));
  auto v2 = chain(2, 10.0, Boundary::open);
  CHECK(rate2(0b01, 0, p, v2) == doctest::Approx(0.08).epsilon(1e-14));  // one occupied neighbour
  DephasingParams pa{1.0, -10.0, 10.0, 0.0};
  CHECK(rate2(0b01, 0, pa, v2) == doctest::Approx(0.4).epsilon(1e-14));  // anti-blockade
  CHECK(rate2(0b01, 0, p, v2) == rate2(0b11, 0, p, v2));                 // independent of n_k
  DephasingParams bad{1.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(rate2(0, 0, bad, v1), std::invalid_argument);
}

TEST_CASE("rate4_beta closed-form values") {
  auto v1 = chain(1, 0.0);
  DephasingParams p{1.0, 0.0, 10.0, 0.0};
  CHECK(rate4_beta(0, 0, p, v1) == doctest::Approx(0.064).epsilon(1e-14));
  DephasingParams p2{1.0, 5.0, 10.0, 0.0};  // h = gamma/2
  CHECK(rate4_beta(0, 0, p2, v1) == doctest::Approx(0.0));
  DephasingParams p3{1.0, 10.0, 10.0, 0.0};  // h = gamma
  CHECK(rate4_beta(0, 0, p3, v1) == doctest::Approx(-0.001536).epsilon(1e-12));
}

TEST_CASE("oracle: odd orders vanish for the dephasing model") {
  DephasingParams p{1.0, 3.0, 10.0, 0.0};
  auto v = chain(2, 7.0, Boundary::open);
  auto split = make_dephasing_split(p, v);
  CHECK(oracle_odd_order_norm(split, 1) < 1e-10);
  CHECK(oracle_odd_order_norm(split, 3) < 1e-10);
}

TEST_CASE("oracle: dephasing N=1 second order reproduces the closed-form rate") {
  DephasingParams p{1.0, 4.0, 10.0, 0.0};
  auto v = chain(1, 0.0);
  auto gen = oracle_classical_generator(make_dephasing_split(p, v), 2);
  const double gamma_k = 1.0 * 10.0 / (25.0 + 16.0);
  CHECK(gen(1, 0) == doctest::Approx(gamma_k).epsilon(1e-12));
  CHECK(gen(0, 1) == doctest::Approx(gamma_k).epsilon(1e-12));
  CHECK(gen(0, 0) == doctest::Approx(-gamma_k).epsilon(1e-12));
}

TEST_CASE("order-2 generator matches oracle on random parameters, N=1..3") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ug(5.0, 20.0), uv(0.0, 10.0), ud(-10.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3;
    DephasingParams p{1.0, ud(rng), ug(rng), 0.0};
    auto v = chain(n, uv(rng), trial % 2 ? Boundary::periodic : Boundary::open);
    const Eigen::MatrixXd closed = Eigen::MatrixXd(build_generator(p, v, 2).matrix);
    const Eigen::MatrixXd oracle = oracle_classical_generator(make_dephasing_split(p, v), 2);
    check_generator_match(closed, oracle, 1e-8);
  }
}

TEST_CASE("order-4 generator matches oracle on the coarse grid, N=2") {
  for (double g : {5.0, 10.0, 20.0})
    for (double vv : {0.0, 5.0, 10.0})
      for (double dd : {-10.0, 0.0, 10.0}) {
        DephasingParams p{1.0, dd, g, 0.0};
        auto v = chain(2, vv, Boundary::open);
        const Eigen::MatrixXd closed = Eigen::MatrixXd(build_generator(p, v, 4).matrix);
        const Eigen::MatrixXd oracle = oracle_classical_generator(make_dephasing_split(p, v), 4);
        check_generator_match(closed, oracle, 1e-6);
      }
}

TEST_CASE("order-4 generator matches oracle, N=3 spot checks") {
  for (auto [vv, dd] : {std::pair{5.0, 0.0}, std::pair{10.0, -10.0}, std::pair{8.0, 10.0}}) {
    DephasingParams p{1.0, dd, 10.0, 0.0};
    auto v = chain(3, vv);
    const Eigen::MatrixXd closed = Eigen::MatrixXd(build_generator(p, v, 4).matrix);
    const Eigen::MatrixXd oracle = oracle_classical_generator(make_dephasing_split(p, v), 4);
    check_generator_match(closed, oracle, 1e-6);
  }
}

TEST_CASE("rate4 at V=0: no double flips, single = rate2 + beta") {
  DephasingParams p{1.0, 3.0, 10.0, 0.0};
  auto v = chain(3, 0.0);
  for (ConfigIndex c = 0; c < 8; ++c) {
    CHECK(std::abs(rate4_double(c, 0, 1, p, v)) < 1e-14);
    CHECK(rate4_single(c, 0, p, v) ==
          doctest::Approx(rate2(c, 0, p, v) + rate4_beta(c, 0, p, v)).epsilon(1e-10));
  }
  // config-independence at V=0
  CHECK(rate4_single(0b000, 1, p, v) == doctest::Approx(rate4_single(0b101, 1, p, v)).epsilon(1e-12));
}

TEST_CASE("rate4 properties") {
  DephasingParams p{1.0, 0.0, 10.0, 0.0};
  auto v = chain(3, 10.0);
  CHECK_THROWS_AS(rate4_double(0, 1, 1, p, v), std::invalid_argument);
  CHECK(rate4_double(0, 0, 2, p, v) == doctest::Approx(rate4_double(0, 2, 0, p, v)).epsilon(1e-14));
}

TEST_CASE("sigma^x conjugation of diagonal coefficients = occupation substitution") {
  // conjugating a diagonal operator f({n_q}) by sigma^x_k permutes its entries
  // like flipping bit k; check against explicit matrix conjugation at N=3
  DephasingParams p{1.0, 2.0, 10.0, 0.0};
  auto v = chain(3, 6.0);
  const int n = 3, k = 1;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(8, 8);
  for (ConfigIndex c = 0; c < 8; ++c) f(c, c) = rate2(c, 0, p, v);
  Eigen::MatrixXd sx = Eigen::MatrixXd::Zero(8, 8);
  for (ConfigIndex c = 0; c < 8; ++c) sx(flip2(c, k, n), c) = 1.0;
  const Eigen::MatrixXd conj = sx * f * sx;
  for (ConfigIndex c = 0; c < 8; ++c)
    CHECK(conj(c, c) == doctest::Approx(rate2(flip2(c, k, n), 0, p, v)).epsilon(1e-14));
}

TEST_CASE("build_generator structure") {
  DephasingParams p{1.0, 0.0, 10.0, 0.0};
  auto v1 = chain(1, 0.0);
  auto g1 = build_generator(p, v1, 2);
  CHECK(g1.matrix.coeff(1, 0) == doctest::Approx(0.4));
  CHECK(g1.matrix.coeff(0, 1) == doctest::Approx(0.4));
  CHECK_FALSE(g1.has_negative_rates);

  auto v4 = chain(4, 10.0);
  for (int order : {2, 4}) {
    auto g = build_generator(p, v4, order);
    const Eigen::VectorXd colsum = Eigen::MatrixXd(g.matrix).colwise().sum();
    CHECK(colsum.cwiseAbs().maxCoeff() < 1e-12);
    if (order == 2) {
      for (int c = 0; c < g.matrix.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(g.matrix, c); it; ++it)
          if (it.row() != it.col()) CHECK(it.value() >= 0);
    }
  }
  CHECK_THROWS_AS(build_generator(p, v4, 3), std::invalid_argument);
  DephasingParams pd = p;
  pd.decay_gamma_ryd = 0.5;
  CHECK_THROWS_AS(build_generator(pd, v4, 4, true), std::invalid_argument);
  auto gd = build_generator(pd, v1, 2, true);
  CHECK(gd.matrix.coeff(0, 1) == doctest::Approx(0.4 + 0.5));  // decay adds to up->down
  CHECK(gd.matrix.coeff(1, 0) == doctest::Approx(0.4));
}

TEST_CASE("fourth-order correction shrinks with gamma") {
  auto v = chain(3, 10.0);
  auto ratio = [&](double g) {
    DephasingParams p{1.0, 0.0, g, 0.0};
    const Eigen::MatrixXd m2 = Eigen::MatrixXd(build_generator(p, v, 2).matrix);
    const Eigen::MatrixXd m4 = Eigen::MatrixXd(build_generator(p, v, 4).matrix);
    return (m4 - m2).cwiseAbs().sum() / m2.cwiseAbs().sum();
  };
  const double r10 = ratio(10.0), r20 = ratio(20.0);
  CHECK(r10 < 0.5);
  CHECK(r20 < r10);
}

TEST_CASE("integrate_rate_equation") {
  DephasingParams p{1.0, 0.0, 10.0, 0.0};
  auto g = build_generator(p, chain(1, 0.0), 2);
  Eigen::VectorXd v0(2);
  v0 << 1.0, 0.0;
  auto grid = TimeGrid::linspace(0.0, 5.0, 11);
  auto rec = integrate_rate_equation(g, v0, grid, {ObservableSpec{}}, true);
  REQUIRE(rec.times.size() == 11);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const double expect = 0.5 * (1.0 - std::exp(-0.8 * rec.times[i]));
    CHECK(rec.observables.at("mean_density")[i] == doctest::Approx(expect).epsilon(1e-9));
    CHECK(rec.distributions[i].sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // initial slope from all-down at N=9-like setup: d<n>/dt(0) = 0.4
  auto g9 = build_generator(p, chain(3, 10.0), 2);
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(8);
  w0(0) = 1.0;
  auto rec2 = integrate_rate_equation(g9, w0, TimeGrid::linspace(0.0, 1e-5, 2), {ObservableSpec{}});
  CHECK(rec2.observables.at("mean_density")[1] / 1e-5 == doctest::Approx(0.4).epsilon(1e-4));
}

TEST_CASE("oracle quadrature check") {
  DephasingParams p{1.0, 2.0, 10.0, 0.0};
  auto v = chain(1, 0.0);
  NzOracle oracle(make_dephasing_split(p, v));
  const Eigen::MatrixXcd resolvent_route = oracle.effective_generator(2);
  const Eigen::MatrixXcd long_cut = oracle.quadrature_generator(5.0, 80000);  // 50/gamma
  const Eigen::MatrixXcd short_cut = oracle.quadrature_generator(0.1, 400);   // 1/gamma
  const double err_long = (long_cut - resolvent_route).cwiseAbs().maxCoeff();
  const double err_short = (short_cut - resolvent_route).cwiseAbs().maxCoeff();
  CHECK(err_long < 1e-8);
  CHECK(err_short > 1e-3);  // visible truncation error at T_cut = 1/gamma
  // zero perturbation -> zero generator
  auto split0 = make_dephasing_split(p, v);
  split0.l1.setZero();
  NzOracle oracle0(split0);
  CHECK(oracle0.effective_generator(2).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("oracle projector properties (dense route)") {
  DephasingParams p{1.0, 1.0, 10.0, 0.0};
  auto split = make_dephasing_split(p, chain(1, 0.0));
  NzOracle oracle(split);
  const auto& pr = oracle.projector();
  CHECK((pr * pr - pr).cwiseAbs().maxCoeff() < 1e-10);
  // two-level N=1 dephasing: keeps both diagonal units, kills coherences
  CHECK(std::abs(pr(0, 0) - 1.0) < 1e-10);
  CHECK(std::abs(pr(3, 3) - 1.0) < 1e-10);
  CHECK(std::abs(pr(1, 1)) < 1e-10);
  CHECK(std::abs(pr(2, 2)) < 1e-10);
  CHECK(std::abs(pr.trace().real() - 2.0) < 1e-9);
  // dense oracle L^(2) agrees with the sparse diagonal fast path
  const Eigen::MatrixXcd eff = oracle.effective_generator(2);
  const Eigen::MatrixXd fast = oracle_classical_generator(split, 2);
  CHECK(std::abs(eff(0, 0).real() - fast(0, 0)) < 1e-10);
  CHECK(std::abs(eff(3, 0).real() - fast(1, 0)) < 1e-10);
}

TEST_CASE("scan_positivity") {
  DephasingParams p{1.0, 0.0, 10.0, 0.0};
  LatticeSpec lattice{3, 6, 0.0, Boundary::periodic};
  auto map = scan_positivity(p, lattice, 0.0, 30.0, -30.0, 30.0, 7, 9);
  // V=0 column always positive
  for (int j = 0; j < 9; ++j) CHECK(map.all_rates_nonnegative(0, j) == 1);
  // a negative region exists somewhere in the scanned window
  CHECK(map.all_rates_nonnegative.minCoeff() == 0);
  CHECK_THROWS_AS(scan_positivity(p, lattice, 0, 1, 0, 1, 1, 2), std::invalid_argument);
}
