#include <doctest.h>

#include <Eigen/Dense>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "vcm/errors.hpp"
#include "vcm/rng.hpp"
#include "vcm/scenario.hpp"
#include "vcm/solver.hpp"

using namespace vcm;

namespace {

Dataset random_dataset(int n, int p, uint64_t seed, double y_scale = 1.0) {
  rng::Substream st(seed, rng::StreamTag::Generic, 0);
  Eigen::MatrixXd w(n, p);
  Eigen::VectorXd t(n), y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) w(i, j) = st.gaussian();
    w.row(i) /= (w.row(i).norm() + 1.0);
    t[i] = st.uniform();
    y[i] = y_scale * st.gaussian();
  }
  return Dataset(std::move(w), std::move(t), std::move(y));
}

Eigen::MatrixXd random_matrix(int r, int c, uint64_t seed) {
  rng::Substream st(seed, rng::StreamTag::Generic, 1);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = st.gaussian();
  return m;
}

}  // namespace

TEST_CASE("objective: zero matrix, exact fit, two-term oracle") {
  const auto dict = Dictionary::fourier(4);
  const Dataset data = random_dataset(30, 3, 1);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 4);
  CHECK(objective(zero, data, dict, 0.7) ==
        doctest::Approx(data.responses().squaredNorm() / data.n()).epsilon(1e-12));

  // Noise-free data generated by a0: objective(a0, lambda=0) = 0.
  const Eigen::MatrixXd a0 = random_matrix(3, 4, 2);
  Eigen::VectorXd y(data.n());
  for (int i = 0; i < data.n(); ++i)
    y[i] = design_inner(a0, data.observation(i), dict);
  const Dataset exact(data.covariates(), data.times(), y);
  CHECK(objective(a0, exact, dict, 0.0) < 1e-10);

  // Random instance against explicit residual loop + Jacobi nuclear norm.
  const Eigen::MatrixXd a = random_matrix(3, 4, 3);
  const double lam = 0.37;
  const double ref = oracles::smooth_objective(a, data, dict) + lam * oracles::nuclear_norm(a);
  CHECK(objective(a, data, dict, lam) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("gradient: zero residuals, single-observation formula") {
  const auto dict = Dictionary::fourier(4);
  const Eigen::MatrixXd a0 = random_matrix(2, 4, 4);
  Eigen::MatrixXd w(3, 2);
  w << 0.5, 0.1, -0.3, 0.2, 0.0, 0.9;
  Eigen::VectorXd t(3);
  t << 0.1, 0.5, 0.9;
  Eigen::VectorXd y(3);
  for (int i = 0; i < 3; ++i) y[i] = w.row(i) * (a0 * dict.eval(t[i]));
  const Dataset exact(w, t, y);
  CHECK(gradient(a0, exact, dict).cwiseAbs().maxCoeff() < 1e-12);

  // n = 1, w = e1: gradient is a single scaled outer product.
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(1, 2);
  w1(0, 0) = 1.0;
  Eigen::VectorXd t1(1), y1(1);
  t1 << 0.3;
  y1 << 2.0;
  const Dataset single(w1, t1, y1);
  const Eigen::MatrixXd a = random_matrix(2, 4, 5);
  const Eigen::VectorXd phi = dict.eval(0.3);
  const double resid = a.row(0).dot(phi) - 2.0;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 4);
  expected.row(0) = 2.0 * resid * phi.transpose();
  CHECK((gradient(a, single, dict) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gradient matches central finite differences on 20 random instances") {
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 2 + rep % 3;
    const int l = 3 + rep % 3;
    const auto dict = Dictionary::fourier(l);
    const Dataset data = random_dataset(20 + rep, p, 100 + rep);
    const Eigen::MatrixXd a = random_matrix(p, l, 200 + rep);
    const Eigen::MatrixXd g = gradient(a, data, dict);
    const Eigen::MatrixXd fd = oracles::fd_gradient(a, data, dict);
    const double rel = (g - fd).cwiseAbs().maxCoeff() / (1.0 + fd.cwiseAbs().maxCoeff());
    worst = std::max(worst, rel);
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("svt: diagonal soft-threshold, identity cases, oracle match") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 3);
  z.diagonal() << 3.0, 1.0, 0.2;
  const Eigen::MatrixXd out = svt(z, 0.5);
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(3, 3);
  want.diagonal() << 2.5, 0.5, 0.0;
  CHECK((out - want).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(svt(Eigen::MatrixXd::Zero(2, 5), 0.7).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd r = random_matrix(3, 4, 6);
  CHECK((svt(r, 0.0) - r).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd z46 = random_matrix(4, 6, 7);
  CHECK((svt(z46, 0.3) - oracles::svt(z46, 0.3)).norm() < 1e-9);
}

TEST_CASE("svt is the proximal map: beats 100 random candidates") {
  rng::Substream st(8, rng::StreamTag::Generic, 2);
  for (int inst = 0; inst < 5; ++inst) {
    const Eigen::MatrixXd z = random_matrix(4, 5, 300 + inst);
    const double tau = 0.1 + 0.4 * st.uniform();
    const Eigen::MatrixXd prox = svt(z, tau);
    const double prox_value = 0.5 * (prox - z).squaredNorm() + tau * oracles::nuclear_norm(prox);
    for (int k = 0; k < 100; ++k) {
      Eigen::MatrixXd b = prox + 0.5 * st.uniform() * random_matrix(4, 5, 1000 + 100 * inst + k);
      const double value = 0.5 * (b - z).squaredNorm() + tau * oracles::nuclear_norm(b);
      CHECK(prox_value <= value + 1e-10);
    }
  }
}

TEST_CASE("lipschitz_bound: single and duplicated observations") {
  const auto dict = Dictionary::fourier(5);
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(1, 3);
  w1(0, 0) = 1.0;
  Eigen::VectorXd t1(1), y1(1);
  t1 << 0.27;
  y1 << 1.0;
  const Dataset single(w1, t1, y1);
  const double expect = 2.0 * dict.eval(0.27).squaredNorm();
  CHECK(lipschitz_bound(single, dict) == doctest::Approx(expect).epsilon(1e-9));

  const int n = 17;
  Eigen::MatrixXd wn = w1.replicate(n, 1);
  Eigen::VectorXd tn = Eigen::VectorXd::Constant(n, 0.27);
  Eigen::VectorXd yn = Eigen::VectorXd::Ones(n);
  const Dataset repeated(wn, tn, yn);
  CHECK(lipschitz_bound(repeated, dict) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("lipschitz_bound: below the crude bound and matching the dense oracle") {
  for (int rep = 0; rep < 5; ++rep) {
    const int p = 2 + rep % 3, l = 3 + rep % 4;
    const auto dict = Dictionary::fourier(l);
    const Dataset data = random_dataset(50, p, 400 + rep);
    const double lip = lipschitz_bound(data, dict);

    const auto phi = data.basis_values(dict);
    double crude = 0.0;
    for (int i = 0; i < data.n(); ++i)
      crude += 2.0 / data.n() * data.covariates().row(i).squaredNorm() *
               phi->row(i).squaredNorm();
    CHECK(lip <= crude * (1.0 + 1e-12));

    const auto dense = oracles::dense_normal_operator(data, dict);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense.n_mat);
    CHECK(lip == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-6));
  }
}

TEST_CASE("zero_threshold: zero responses, single observation, solver consistency") {
  const auto dict = Dictionary::fourier(4);
  Eigen::MatrixXd w(1, 2);
  w << 0.6, -0.3;
  Eigen::VectorXd t(1), y0(1), y(1);
  t << 0.44;
  y0 << 0.0;
  y << -1.7;
  CHECK(zero_threshold(Dataset(w, t, y0), dict) == 0.0);

  const Dataset single(w, t, y);
  const double expect = 2.0 * 1.7 * w.row(0).norm() * dict.eval(0.44).norm();
  CHECK(zero_threshold(single, dict) == doctest::Approx(expect).epsilon(1e-9));

  const Dataset data = random_dataset(60, 3, 500);
  const double thr = zero_threshold(data, dict);
  SolverConfig cfg;
  cfg.lambda = 1.01 * thr;
  auto [a_zero, rep_zero] = solve(data, dict, cfg);
  CHECK(a_zero.norm() <= 1e-8);
  cfg.lambda = 0.5 * thr;
  auto [a_nonzero, rep_nonzero] = solve(data, dict, cfg);
  CHECK(a_nonzero.norm() > 1e-6);
}

TEST_CASE("solve: lambda=0 matches the dense normal-equations oracle") {
  for (int rep = 0; rep < 3; ++rep) {
    const int p = 3 + rep % 3, l = 3 + (rep + 1) % 3;
    const auto dict = Dictionary::fourier(l);
    const Dataset data = random_dataset(2000, p, 600 + rep, 2.0);
    SolverConfig cfg;
    cfg.lambda = 0.0;
    cfg.max_iter = 20000;
    cfg.rel_tol = 1e-13;
    auto [a_hat, report] = solve(data, dict, cfg);

    const auto dense = oracles::dense_normal_operator(data, dict);
    const Eigen::VectorXd coef = dense.n_mat.ldlt().solve(dense.rhs);
    const Eigen::Map<const Eigen::MatrixXd> a_ref(coef.data(), p, l);
    CHECK((a_hat - a_ref).norm() / a_ref.norm() <= 1e-5);
  }
}

TEST_CASE("solve: reaches the best of 20 random-restart long runs") {
  const auto dict = Dictionary::fourier(3);
  const Dataset data = random_dataset(50, 3, 700, 1.5);
  SolverConfig cfg;
  cfg.lambda = 0.1;
  auto [a_hat, report] = solve(data, dict, cfg);

  SolverConfig long_cfg = cfg;
  long_cfg.max_iter = 100000;
  long_cfg.rel_tol = 1e-15;
  double best = 1e300;
  for (int run = 0; run < 20; ++run) {
    const Eigen::MatrixXd start = random_matrix(3, 3, 800 + run);
    auto [a_run, rep_run] = solve(data, dict, long_cfg, &start);
    best = std::min(best, rep_run.final_objective);
  }
  CHECK(report.final_objective <= best + 1e-7);
}

TEST_CASE("solve: monotone objective trace with restart enabled") {
  const auto dict = Dictionary::fourier(5);
  const Dataset data = random_dataset(200, 4, 900, 1.2);
  SolverConfig cfg;
  cfg.lambda = 0.05;
  auto [a_hat, report] = solve(data, dict, cfg);
  REQUIRE(report.objective_trace.size() > 3);
  for (size_t k = 1; k < report.objective_trace.size(); ++k)
    CHECK(report.objective_trace[k] <= report.objective_trace[k - 1] + 1e-12);
  CHECK(report.converged);
  CHECK(report.rank_hat <= 4);
}

TEST_CASE("solve: re-solving from the solution stays there") {
  const auto dict = Dictionary::fourier(4);
  const Dataset data = random_dataset(150, 3, 1000, 1.1);
  SolverConfig cfg;
  cfg.lambda = 0.08;
  auto [a_hat, report] = solve(data, dict, cfg);
  auto [a_again, report2] = solve(data, dict, cfg, &a_hat);
  CHECK(report2.iterations <= 10);
  // Re-convergence within the stopping tolerance, measured on the objective.
  CHECK(report2.final_objective <=
        report.final_objective + cfg.rel_tol * std::max(1.0, report.final_objective));
  CHECK((a_again - a_hat).norm() <= 1e-4 * (1.0 + a_hat.norm()));
}

TEST_CASE("solve: nuclear norm of the solution is non-increasing in lambda") {
  const auto dict = Dictionary::fourier(5);
  const Dataset data = random_dataset(300, 4, 1100, 1.3);
  const double thr = zero_threshold(data, dict);
  double prev = 1e300;
  for (int k = 0; k < 10; ++k) {
    SolverConfig cfg;
    cfg.lambda = thr * (k + 1) / 10.0;
    auto [a_hat, report] = solve(data, dict, cfg);
    CHECK(report.nuclear_norm_hat <= prev + 1e-8);
    prev = report.nuclear_norm_hat;
  }
}

TEST_CASE("solve: a bad fixed step raises a divergence error") {
  const auto dict = Dictionary::fourier(4);
  const Dataset data = random_dataset(100, 3, 1200, 1.0);
  SolverConfig cfg;
  cfg.lambda = 0.01;
  cfg.fixed_step = 1e6;  // far above 1/L
  cfg.restart = false;   // nothing catches the blow-up
  cfg.accelerate = true;
  CHECK_THROWS_AS(solve(data, dict, cfg), DivergenceError);
}

TEST_CASE("solver config json round trip") {
  SolverConfig cfg;
  cfg.lambda = 0.25;
  cfg.max_iter = 123;
  cfg.rel_tol = 1e-7;
  cfg.fixed_step = 0.5;
  cfg.accelerate = false;
  const auto j = cfg.to_json();
  const auto back = SolverConfig::from_json(j);
  CHECK(back.lambda == cfg.lambda);
  CHECK(back.max_iter == cfg.max_iter);
  CHECK(back.rel_tol == cfg.rel_tol);
  CHECK(back.fixed_step.has_value());
  CHECK(*back.fixed_step == 0.5);
  CHECK(back.accelerate == false);
}
