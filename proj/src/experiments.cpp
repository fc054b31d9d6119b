#include "vcm/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "vcm/errors.hpp"
#include "vcm/kernels.hpp"
#include "vcm/linalg.hpp"
#include "vcm/rng.hpp"
#include "vcm/stats.hpp"

namespace vcm {

namespace {

constexpr double kRademacherMeanBound = 4.6;  // mean spectral-norm constant
constexpr double kNuclearBlowupFactor = 5.0;  // ||A_hat||_* vs ||A0||_*

/// Worst-component expansion remainder of the true functions in a dictionary.
struct Remainder {
  double sup = 0.0;
  double l2 = 0.0;
};

Remainder measure_remainder(const std::vector<std::function<double(double)>>& fns,
                            const Dictionary& dict) {
  Remainder r;
  for (const auto& f : fns) {
    const auto e = dict.expand(f);
    r.sup = std::max(r.sup, e.residual_sup);
    r.l2 = std::max(r.l2, e.residual_l2);
  }
  return r;
}

DesignMoments scenario_moments(const Scenario& sc, int l) {
  switch (sc.design) {
    case DesignKind::CanonicalUniform:
    case DesignKind::SphereUniform:
      // Both designs have E[WW'] = I/p exactly.
      return DesignMoments::canonical_uniform(sc.p, l);
    case DesignKind::CustomTable:
      return DesignMoments::from_samples(sc.design_table, l);
  }
  throw ValidationError("experiments: unknown design kind");
}

/// TuningParams with the remainder term expressed through the measured
/// residual: b is encoded so that b / l^gamma equals the observed sup
/// remainder, keeping the closed-form lambda parameter-free.
TuningParams scenario_tuning(const Scenario& sc, const Dictionary& dict, long n,
                             const Remainder& rem) {
  TuningParams tp;
  tp.noise.sigma = sc.sigma;
  tp.noise.K = noise_orlicz_constant(sc.noise);
  tp.noise.c_star = 6.5;
  tp.approx.gamma = 1.0;
  tp.approx.b = std::max(rem.sup, 1e-300) * dict.l();
  tp.approx.b1 = std::max(rem.l2, 1e-300) * std::pow(double(dict.l()), 1.5);
  tp.approx.empirical = true;
  tp.s = sc.s;
  tp.p = sc.p;
  tp.l = dict.l();
  tp.n = n;
  tp.moments = scenario_moments(sc, dict.l());
  return tp;
}

/// Sigma = (1/n) sum (y_i - <X_i, A0>) X_i, the stochastic term of the
/// normal equations at the truth. Only simulation can form it.
Eigen::MatrixXd sigma_matrix(const Dataset& data, const Dictionary& dict,
                             const CoordinateMatrix& a0) {
  const auto phi = data.basis_values(dict);
  Eigen::VectorXd fitted;
  kernels::design_apply(data.covariates(), *phi, a0, fitted);
  Eigen::MatrixXd sigma;
  kernels::weighted_outer_sum(data.covariates(), *phi,
                              Eigen::VectorXd((data.responses() - fitted) / double(data.n())),
                              sigma);
  return sigma;
}

double theoretical_frobenius_bound(const TuningParams& tp, double lambda, double nn_a0, double C,
                                   double c_phi) {
  const double wmin2 = tp.moments.omega_min * tp.moments.omega_min;
  const double clean = C * tp.s * lambda * lambda / wmin2;
  const auto th = sample_thresholds(tp, C, c_phi);
  if (double(tp.n) >= th.n_star_star) return clean;
  const double logd = std::log(double(tp.d()));
  const double spill = C * tp.s * c_phi * c_phi * tp.l * tp.moments.M * logd * nn_a0 * nn_a0 /
                       (double(tp.n) * wmin2);
  const double flat =
      C * c_phi * nn_a0 * nn_a0 / tp.moments.omega_min * std::sqrt(logd * tp.l / double(tp.n));
  return std::max(clean + spill, flat);
}

}  // namespace

double frobenius_error(const CoordinateMatrix& a_hat, const CoordinateMatrix& a0) {
  if (a_hat.rows() != a0.rows() || a_hat.cols() != a0.cols())
    throw ShapeError("frobenius_error: dimensions differ");
  return (a_hat - a0).squaredNorm();
}

double mse_l2(const VCFunction& fhat, const std::vector<std::function<double(double)>>& f_true) {
  if (int(f_true.size()) != fhat.p())
    throw ShapeError("mse_l2: component counts differ");
  const Dictionary& dict = fhat.dict;
  const Quadrature& quad = dict.quadrature();
  const int p = fhat.p();
  Eigen::VectorXd phi(dict.l());
  double acc = 0.0;
  for (int q = 0; q < quad.size(); ++q) {
    const double t = quad.nodes[q];
    dict.eval_into(t, phi.data());
    const Eigen::VectorXd fh = fhat.coeffs * phi;
    double sq = 0.0;
    for (int i = 0; i < p; ++i) {
      const double diff = fh[i] - f_true[i](t);
      sq += diff * diff;
    }
    acc += quad.weights[q] * dict.measure().g(t) * sq;
  }
  return acc / p;
}

double pointwise_error(const VCFunction& fhat,
                       const std::vector<std::function<double(double)>>& f_true, double t) {
  if (int(f_true.size()) != fhat.p()) throw ShapeError("pointwise_error: component counts differ");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("pointwise_error: t outside [0,1]");
  const Eigen::VectorXd fh = fhat(t);
  double acc = 0.0;
  for (int i = 0; i < fhat.p(); ++i) acc += std::abs(fh[i] - f_true[i](t));
  return acc / fhat.p();
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["metric"] = metric;
  j["n_grid"] = n_grid;
  j["errors"] = errors;
  j["fitted_slope"] = fitted_slope;
  j["slope_stderr"] = slope_stderr;
  j["fit_degenerate"] = fit_degenerate;
  j["bound_values"] = bound_values;
  j["coverage"] = coverage;
  if (!extra.is_null()) j["extra"] = extra;
  return j;
}

void ExperimentReport::write_csv(std::ostream& os) const {
  os << "n,trial,metric,value,bound\n";
  char buf[128];
  for (size_t i = 0; i < n_grid.size(); ++i) {
    for (size_t r = 0; r < errors[i].size(); ++r) {
      double bound = std::numeric_limits<double>::quiet_NaN();
      if (bound_values.size() == n_grid.size())
        bound = bound_values[i];
      else if (n_grid.size() == 1 && bound_values.size() == errors[i].size())
        bound = bound_values[r];
      std::snprintf(buf, sizeof(buf), "%ld,%zu,%s,%.17g,%.17g\n", n_grid[i], r, metric.c_str(),
                    errors[i][r], bound);
      os << buf;
    }
  }
}

nlohmann::json SigmaNormStats::to_json() const {
  return nlohmann::json{{"mean_sigma_R", mean_sigma_R},
                        {"mean_sigma", mean_sigma},
                        {"bound_sigma_R", bound_sigma_R},
                        {"bound_sigma", bound_sigma},
                        {"violation_rate", violation_rate}};
}

SigmaNormStats mc_sigma_norms(const Scenario& sc, const Dictionary& dict, long n, int trials,
                              const ExperimentOptions& opts) {
  if (trials < 30) throw ValidationError("mc_sigma_norms: need at least 30 trials");
  const auto fns = make_coefficients(sc);
  const CoordinateMatrix a0 = ground_truth_matrix(sc, dict);
  const Remainder rem = measure_remainder(fns, dict);
  const TuningParams tp = scenario_tuning(sc, dict, n, rem);

  std::vector<double> norm_R(trials), norm_S(trials);
#pragma omp parallel for schedule(dynamic)
  for (int trial = 0; trial < trials; ++trial) {
    const Dataset data = sample_dataset(sc, n, uint64_t(trial));
    const auto phi = data.basis_values(dict);
    const uint64_t eff_seed = rng::derive_seed(sc.seed, uint64_t(trial));
    Eigen::VectorXd eps(n);
    for (long i = 0; i < n; ++i) {
      rng::Substream st(eff_seed, rng::StreamTag::Rademacher, uint64_t(i));
      eps[i] = st.rademacher();
    }
    Eigen::MatrixXd sigma_r;
    kernels::weighted_outer_sum(data.covariates(), *phi, Eigen::VectorXd(eps / double(n)), sigma_r);
    norm_R[trial] = spectral_norm(sigma_r);
    norm_S[trial] = spectral_norm(sigma_matrix(data, dict, a0));
  }

  SigmaNormStats stats;
  for (int trial = 0; trial < trials; ++trial) {
    stats.mean_sigma_R += norm_R[trial];
    stats.mean_sigma += norm_S[trial];
  }
  stats.mean_sigma_R /= trials;
  stats.mean_sigma /= trials;

  const double logd = std::log(double(tp.d()));
  stats.bound_sigma_R = kRademacherMeanBound * std::sqrt(tp.moments.M * logd / double(n));
  const double guard =
      std::max(tp.noise.K * std::log(tp.noise.K * dict.c_phi() / tp.moments.omega_max), 1.0);
  const double scale =
      tp.noise.c_star * sc.sigma + 2.0 * std::sqrt(double(std::max(sc.s - 1, 0))) * rem.sup;
  stats.bound_sigma = scale * std::max(std::sqrt(tp.moments.M * 2.0 * logd / double(n)),
                                       dict.c_phi() * std::sqrt(double(dict.l())) * 2.0 * logd *
                                           guard / double(n));
  int exceed = 0;
  for (int trial = 0; trial < trials; ++trial)
    if (norm_R[trial] > stats.bound_sigma_R) ++exceed;
  stats.violation_rate = double(exceed) / trials;
  (void)opts;
  return stats;
}

ExperimentReport bound_check(const Scenario& sc, const Dictionary& dict, long n, int trials,
                             const ExperimentOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  if (trials < 1) throw ValidationError("bound_check: trials must be positive");
  const auto fns = make_coefficients(sc);
  const CoordinateMatrix a0 = ground_truth_matrix(sc, dict);
  const double nn_a0 = nuclear_norm(a0);
  const Remainder rem = measure_remainder(fns, dict);
  const TuningParams tp = scenario_tuning(sc, dict, n, rem);
  const double formula_lambda = lambda_general(tp);
  const auto thresholds = sample_thresholds(tp, opts.C, dict.c_phi());

  std::vector<double> err_frob(trials), err_mse(trials), bounds(trials), lambdas(trials);
  std::vector<int> nuclear_ok(trials, 0);
#pragma omp parallel for schedule(dynamic)
  for (int trial = 0; trial < trials; ++trial) {
    const Dataset data = sample_dataset(sc, n, uint64_t(trial));
    double lambda = formula_lambda;
    if (opts.oracle_lambda)
      lambda = opts.oracle_factor * spectral_norm(sigma_matrix(data, dict, a0));
    SolverConfig cfg = opts.solver;
    cfg.lambda = lambda;
    auto [a_hat, report] = solve(data, dict, cfg);
    err_frob[trial] = frobenius_error(a_hat, a0);
    err_mse[trial] = mse_l2(VCFunction(a_hat, dict), fns);
    nuclear_ok[trial] = report.nuclear_norm_hat <= kNuclearBlowupFactor * nn_a0 ? 1 : 0;
    bounds[trial] = theoretical_frobenius_bound(tp, lambda, nn_a0, opts.C, dict.c_phi());
    lambdas[trial] = lambda;
  }

  ExperimentReport rep;
  rep.metric = "frobenius_sq";
  rep.n_grid = {n};
  rep.errors = {err_frob};
  rep.bound_values = bounds;
  int covered = 0, nuclear_total = 0;
  for (int trial = 0; trial < trials; ++trial) {
    if (err_frob[trial] <= bounds[trial]) ++covered;
    nuclear_total += nuclear_ok[trial];
  }
  rep.coverage = double(covered) / trials;
  rep.extra = nlohmann::json{
      {"nuclear_ok_rate", double(nuclear_total) / trials},
      {"median_frobenius_sq", median(err_frob)},
      {"median_mse_l2", median(err_mse)},
      {"lambda_mode", opts.oracle_lambda ? "oracle" : "formula"},
      {"lambda_median", median(lambdas)},
      {"C", opts.C},
      {"n_star", thresholds.n_star},
      {"n_star_star", thresholds.n_star_star},
      {"nuclear_norm_a0", nn_a0},
  };
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

ExperimentReport rate_study(const Scenario& sc, const DictPolicy& policy,
                            const std::vector<long>& n_grid, int replicates,
                            const ExperimentOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  if (n_grid.size() < 4)
    throw ValidationError("rate_study: the n grid needs at least 4 points");
  for (size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw ValidationError("rate_study: the n grid must be strictly increasing");
  if (double(n_grid.back()) < 10.0 * double(n_grid.front()))
    throw ValidationError("rate_study: the n grid must span at least one decade");
  if (replicates < 1) throw ValidationError("rate_study: replicates must be positive");
  if (policy.metric != "frobenius_sq" && policy.metric != "mse_l2")
    throw ValidationError("rate_study: unknown metric '" + policy.metric + "'");

  const auto fns = make_coefficients(sc);
  const int points = int(n_grid.size());

  // One dictionary (and ground truth) per distinct size on the grid.
  std::vector<Dictionary> dicts;
  std::vector<CoordinateMatrix> truths;
  std::vector<Remainder> rems;
  std::vector<int> dict_of_point(points);
  std::vector<int> size_of_dict;
  for (int i = 0; i < points; ++i) {
    int l = policy.fixed_l;
    if (policy.use_select_l) {
      const double c_phi = std::sqrt(2.0);
      l = int(select_l(double(n_grid[i]), sc.p, sc.s, policy.gamma, sc.sigma, c_phi, opts.C,
                       policy.b)
                  .l_hat);
    }
    int idx = -1;
    for (size_t k = 0; k < size_of_dict.size(); ++k)
      if (size_of_dict[k] == l) idx = int(k);
    if (idx < 0) {
      dicts.push_back(Dictionary::fourier(l, sc.measure));
      truths.push_back(ground_truth_matrix(sc, dicts.back()));
      rems.push_back(measure_remainder(fns, dicts.back()));
      size_of_dict.push_back(l);
      idx = int(size_of_dict.size()) - 1;
    }
    dict_of_point[i] = idx;
  }

  std::vector<std::vector<double>> errors(points, std::vector<double>(replicates, 0.0));
  std::vector<double> bounds(points, 0.0);
  std::vector<double> lambdas(points, 0.0);
  for (int i = 0; i < points; ++i) {
    const int di = dict_of_point[i];
    const TuningParams tp = scenario_tuning(sc, dicts[di], n_grid[i], rems[di]);
    lambdas[i] = lambda_general(tp);
    const double nn_a0 = nuclear_norm(truths[di]);
    if (policy.metric == "frobenius_sq") {
      bounds[i] = theoretical_frobenius_bound(tp, lambdas[i], nn_a0, opts.C, dicts[di].c_phi());
    } else {
      bounds[i] = opts.C * beta_bound(tp, nn_a0, opts.C, dicts[di].c_phi()) / double(n_grid[i]) +
                  2.0 * tp.s * rems[di].l2 * rems[di].l2 / double(sc.p);
    }
  }

  const long tasks = long(points) * replicates;
#pragma omp parallel for schedule(dynamic)
  for (long task = 0; task < tasks; ++task) {
    const int i = int(task / replicates);
    const int r = int(task % replicates);
    const int di = dict_of_point[i];
    const Dataset data = sample_dataset(sc, n_grid[i], uint64_t(task) + 1);
    SolverConfig cfg = opts.solver;
    cfg.lambda = lambdas[i];
    if (opts.oracle_lambda)
      cfg.lambda = opts.oracle_factor * spectral_norm(sigma_matrix(data, dicts[di], truths[di]));
    auto [a_hat, report] = solve(data, dicts[di], cfg);
    errors[i][r] = policy.metric == "frobenius_sq"
                       ? frobenius_error(a_hat, truths[di])
                       : mse_l2(VCFunction(a_hat, dicts[di]), fns);
  }

  ExperimentReport rep;
  rep.metric = policy.metric;
  rep.n_grid = n_grid;
  rep.errors = errors;
  rep.bound_values = bounds;

  std::vector<double> log_n, log_med;
  std::vector<double> medians(points);
  int covered = 0;
  for (int i = 0; i < points; ++i) {
    medians[i] = median(errors[i]);
    for (int r = 0; r < replicates; ++r)
      if (errors[i][r] <= bounds[i]) ++covered;
    if (medians[i] > 0.0) {
      log_n.push_back(std::log(double(n_grid[i])));
      log_med.push_back(std::log(medians[i]));
    }
  }
  rep.coverage = double(covered) / double(tasks);
  const LineFit fit = fit_line(log_n, log_med);
  rep.fitted_slope = fit.slope;
  rep.slope_stderr = fit.slope_stderr;
  rep.fit_degenerate = fit.degenerate || log_n.size() < n_grid.size();
  rep.extra = nlohmann::json{{"medians", medians},
                             {"lambdas", lambdas},
                             {"C", opts.C},
                             {"replicates", replicates},
                             {"policy", policy.use_select_l ? "select_l" : "fixed_l"},
                             {"dict_sizes", size_of_dict},
                             {"lambda_mode", opts.oracle_lambda ? "oracle" : "formula"}};
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

nlohmann::json LambdaGridResult::to_json() const {
  return nlohmann::json{{"lambdas", lambdas},     {"errors", errors},
                        {"theory_lambda", theory_lambda}, {"theory_error", theory_error},
                        {"best_error", best_error},       {"ratio", ratio}};
}

LambdaGridResult lambda_grid_compare(const Scenario& sc, const Dictionary& dict, long n,
                                     const std::vector<double>& lambda_grid,
                                     const ExperimentOptions& opts) {
  if (lambda_grid.empty()) throw ValidationError("lambda_grid_compare: empty grid");
  const auto fns = make_coefficients(sc);
  const CoordinateMatrix a0 = ground_truth_matrix(sc, dict);
  const Remainder rem = measure_remainder(fns, dict);
  const Dataset data = sample_dataset(sc, n, 0);

  LambdaGridResult res;
  res.lambdas = lambda_grid;
  res.errors.resize(lambda_grid.size());
  const int count = int(lambda_grid.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < count; ++k) {
    SolverConfig cfg = opts.solver;
    cfg.lambda = lambda_grid[k];
    auto [a_hat, report] = solve(data, dict, cfg);
    res.errors[k] = frobenius_error(a_hat, a0);
  }
  res.theory_lambda = lambda_general(scenario_tuning(sc, dict, n, rem));
  {
    SolverConfig cfg = opts.solver;
    cfg.lambda = res.theory_lambda;
    auto [a_hat, report] = solve(data, dict, cfg);
    res.theory_error = frobenius_error(a_hat, a0);
  }
  res.best_error = res.theory_error;
  for (double e : res.errors) res.best_error = std::min(res.best_error, e);
  res.ratio = res.best_error > 0.0 ? res.theory_error / res.best_error : 1.0;
  return res;
}

}  // namespace vcm
