// Command-line front end: estimation, simulation, tuning reports and the
// Monte Carlo experiment drivers, all file-based. Every command writes its
// outputs atomically plus a run.json manifest; wall-clock timing goes to a
// separate timing.json so repeated runs stay byte-identical.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vcm/errors.hpp"
#include "vcm/experiments.hpp"
#include "vcm/io.hpp"
#include "vcm/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string out_dir = ".";
  int jobs = 0;
  long seed_override = -1;
};

void apply_jobs(int jobs) {
  if (jobs > 0) omp_set_num_threads(jobs);
}

fs::path ensure_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& options,
                    const json& resolved, double runtime_seconds) {
  json manifest;
  manifest["command"] = command;
  manifest["version"] = vcm::kVersion;
  manifest["quad_nodes"] = vcm::default_quad_nodes();
  manifest["options"] = options;
  manifest["resolved"] = resolved;
  vcm::io::write_atomic(dir / "run.json", manifest.dump(2) + "\n");
  vcm::io::write_atomic(dir / "timing.json",
                        json{{"runtime_seconds", runtime_seconds}, {"jobs", omp_get_max_threads()}}.dump(2) + "\n");
}

vcm::Scenario load_scenario(const std::string& path, long seed_override) {
  vcm::Scenario sc = vcm::Scenario::from_json(vcm::io::read_json(path));
  if (seed_override >= 0) sc.seed = uint64_t(seed_override);
  return sc;
}

/// lo:hi:k denotes k log-spaced points from lo to hi.
std::vector<long> parse_log_grid(const std::string& spec) {
  double lo = 0, hi = 0;
  int k = 0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(spec);
  if (!(ss >> lo >> c1 >> hi >> c2 >> k) || c1 != ':' || c2 != ':' || ss.rdbuf()->in_avail() != 0)
    throw vcm::ValidationError("grid: expected lo:hi:k, got '" + spec + "'");
  if (!(lo > 0) || !(hi > lo) || k < 2) throw vcm::ValidationError("grid: need 0 < lo < hi, k >= 2");
  std::vector<long> grid;
  for (int i = 0; i < k; ++i) {
    const double x = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (k - 1));
    const long n = std::lround(x);
    if (grid.empty() || n > grid.back()) grid.push_back(n);
  }
  return grid;
}

json dataset_summary(const vcm::Dataset& data) {
  return json{{"n", data.n()}, {"p", data.p()}};
}

// ---------------------------------------------------------------------------

int run_estimate(const CommonOpts& common, const std::string& data_path,
                 const std::string& dict_path, const std::string& lambda_arg,
                 const std::string& tuning_path, const std::string& scenario_path,
                 const std::string& solver_path, bool write_trace) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = ensure_out_dir(common.out_dir);

  std::ifstream data_in(data_path);
  if (!data_in) throw vcm::ValidationError("estimate: cannot open " + data_path);
  const vcm::Dataset data = vcm::Dataset::from_csv(data_in, data_path);
  const vcm::Dictionary dict = vcm::Dictionary::from_json(vcm::io::read_json(dict_path));

  vcm::SolverConfig cfg;
  if (!solver_path.empty()) cfg = vcm::SolverConfig::from_json(vcm::io::read_json(solver_path));

  json resolved;
  if (lambda_arg == "auto") {
    vcm::TuningParams tp;
    tp.p = data.p();
    tp.l = dict.l();
    tp.n = data.n();
    tp.s = data.p() + 1;  // conservative default: all components may vary
    tp.approx = vcm::ApproxSpec{1e-300, 1e-300, 1.0, false};
    bool canonical = false;
    if (!scenario_path.empty()) {
      const vcm::Scenario sc = load_scenario(scenario_path, -1);
      tp.noise.sigma = sc.sigma;
      tp.noise.K = vcm::noise_orlicz_constant(sc.noise);
      tp.s = sc.s;
      canonical = sc.design == vcm::DesignKind::CanonicalUniform;
    }
    if (!tuning_path.empty()) {
      const json tj = vcm::io::read_json(tuning_path);
      tp.noise.sigma = tj.value("sigma", tp.noise.sigma);
      tp.noise.K = tj.value("K", tp.noise.K);
      tp.noise.c_star = tj.value("c_star", tp.noise.c_star);
      tp.s = tj.value("s", tp.s);
      if (tj.contains("b") && tj.contains("gamma"))
        tp.approx = vcm::ApproxSpec{tj["b"].get<double>(), tj.value("b1", tj["b"].get<double>()),
                                    tj["gamma"].get<double>(), false};
    }
    tp.s = std::min(tp.s, tp.p + 1);
    if (canonical) {
      tp.moments = vcm::DesignMoments::canonical_uniform(tp.p, tp.l);
      cfg.lambda = vcm::lambda_orthonormal(tp);
      resolved["lambda_rule"] = "orthonormal";
    } else {
      tp.moments = vcm::DesignMoments::from_samples(data.covariates(), tp.l);
      if (!tp.moments.positive_definite)
        throw vcm::ValidationError(
            "estimate: empirical design moments are singular; supply --lambda explicitly");
      cfg.lambda = vcm::lambda_general(tp);
      resolved["lambda_rule"] = "general_empirical";
    }
  } else {
    cfg.lambda = std::stod(lambda_arg);
    resolved["lambda_rule"] = "explicit";
  }
  resolved["lambda"] = cfg.lambda;

  auto [a_hat, report] = vcm::solve(data, dict, cfg);

  vcm::io::write_atomic(out / "A_hat.csv", vcm::io::matrix_to_csv(a_hat));
  json rj = report.to_json();
  rj["lambda"] = cfg.lambda;
  rj["p"] = data.p();
  rj["l"] = dict.l();
  rj["n"] = data.n();
  vcm::io::write_atomic(out / "report.json", rj.dump(2) + "\n");
  if (write_trace) {
    std::ostringstream trace;
    report.trace_to_csv(trace);
    vcm::io::write_atomic(out / "objective_trace.csv", trace.str());
  }

  // f_hat on the standard 201-point grid.
  std::string grid_csv = "t";
  for (int i = 1; i <= data.p(); ++i) grid_csv += ",f_" + std::to_string(i);
  grid_csv += "\n";
  const vcm::VCFunction fhat(a_hat, dict);
  char buf[32];
  for (int k = 0; k <= 200; ++k) {
    const double t = double(k) / 200.0;
    std::snprintf(buf, sizeof(buf), "%.17g", t);
    grid_csv += buf;
    const Eigen::VectorXd v = fhat(t);
    for (int i = 0; i < data.p(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v[i]);
      grid_csv += buf;
    }
    grid_csv += "\n";
  }
  vcm::io::write_atomic(out / "f_hat_grid.csv", grid_csv);

  const json options{{"data", data_path},     {"dict", dict_path},   {"lambda", lambda_arg},
                     {"tuning", tuning_path}, {"scenario", scenario_path},
                     {"solver", solver_path}};
  resolved["data"] = dataset_summary(data);
  write_manifest(out, "estimate", options, resolved,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int run_simulate(const CommonOpts& common, const std::string& scenario_path, long n,
                 const std::string& dict_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = ensure_out_dir(common.out_dir);
  const vcm::Scenario sc = load_scenario(scenario_path, common.seed_override);

  const vcm::Dataset data = vcm::sample_dataset(sc, n);
  std::ostringstream csv;
  data.to_csv(csv);
  vcm::io::write_atomic(out / "data.csv", csv.str());

  json truth;
  truth["scenario"] = sc.to_json();
  truth["n"] = n;
  json resolved{{"seed", sc.seed}};
  if (!dict_path.empty()) {
    const vcm::Dictionary dict = vcm::Dictionary::from_json(vcm::io::read_json(dict_path));
    const vcm::CoordinateMatrix a0 = vcm::ground_truth_matrix(sc, dict);
    vcm::io::write_atomic(out / "A0.csv", vcm::io::matrix_to_csv(a0));
    truth["a0_csv"] = "A0.csv";
    truth["dict"] = dict.to_json();
  }
  vcm::io::write_atomic(out / "truth.json", truth.dump(2) + "\n");

  const json options{{"scenario", scenario_path}, {"n", n}, {"dict", dict_path},
                     {"seed", common.seed_override}};
  write_manifest(out, "simulate", options, resolved,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int run_tune(const CommonOpts& common, const std::string& params_path,
             const std::string& data_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = ensure_out_dir(common.out_dir);
  const json pj = vcm::io::read_json(params_path);

  vcm::TuningParams tp;
  tp.p = pj.at("p").get<int>();
  tp.l = pj.at("l").get<int>();
  tp.n = pj.at("n").get<long>();
  tp.s = pj.at("s").get<int>();
  tp.noise = vcm::NoiseSpec::from_json(pj);
  tp.approx = vcm::ApproxSpec{pj.value("b", 1.0), pj.value("b1", 1.0), pj.value("gamma", 1.0),
                              false};
  const double C = pj.value("C", 1.0);
  const double c_phi = pj.value("c_phi", std::sqrt(2.0));
  const double nn_a0 = pj.value("nuclear_norm_a0", 0.0);

  std::string design = pj.value("design", "canonical_uniform");
  if (!data_path.empty()) design = "empirical";
  if (design == "canonical_uniform") {
    tp.moments = vcm::DesignMoments::canonical_uniform(tp.p, tp.l);
  } else if (design == "empirical") {
    std::ifstream in(data_path);
    if (!in) throw vcm::ValidationError("tune: cannot open " + data_path);
    const vcm::Dataset data = vcm::Dataset::from_csv(in, data_path);
    tp.moments = vcm::DesignMoments::from_samples(data.covariates(), tp.l);
  } else {
    throw vcm::ValidationError("tune: unknown design '" + design + "'");
  }

  json report;
  report["params"] = tp.to_json();
  report["C"] = C;
  report["c_phi"] = c_phi;
  report["moments"] = tp.moments.to_json();
  report["assumption_positive_definite"] = tp.moments.positive_definite;
  report["lambda_general"] = vcm::lambda_general(tp);
  if (tp.moments.is_canonical()) report["lambda_orthonormal"] = vcm::lambda_orthonormal(tp);
  if (tp.moments.positive_definite) {
    const auto th = vcm::sample_thresholds(tp, C, c_phi);
    report["n_star"] = th.n_star;
    report["n_star_star"] = th.n_star_star;
    report["branch"] = double(tp.n) >= th.n_star_star ? "clean" : "max_form";
    report["beta"] = vcm::beta_bound(tp, nn_a0, C, c_phi);
    report["nuclear_norm_a0"] = nn_a0;
  }
  if (tp.noise.sigma > 0.0) {
    const auto sel = vcm::select_l(double(tp.n), tp.p, tp.s, tp.approx.gamma, tp.noise.sigma,
                                   c_phi, C, tp.approx.b);
    report["l_hat"] = sel.l_hat;
    report["l_regime"] = to_string(sel.regime);
    report["l_extrapolated"] = sel.extrapolated;
  }
  vcm::io::write_atomic(out / "tune_report.json", report.dump(2) + "\n");

  const json options{{"params", params_path}, {"data", data_path}};
  write_manifest(out, "tune", options, json{{"design", design}},
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int run_rates(const CommonOpts& common, const std::string& scenario_path,
              const std::string& grid_spec, int replicates, int fixed_l, bool use_select_l,
              double gamma, double b, const std::string& metric, bool oracle_lambda, double C) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = ensure_out_dir(common.out_dir);
  const vcm::Scenario sc = load_scenario(scenario_path, common.seed_override);
  const std::vector<long> grid = parse_log_grid(grid_spec);

  vcm::DictPolicy policy;
  policy.use_select_l = use_select_l;
  policy.fixed_l = fixed_l;
  policy.gamma = gamma;
  policy.b = b;
  policy.metric = metric;
  vcm::ExperimentOptions opts;
  opts.C = C;
  opts.oracle_lambda = oracle_lambda;

  const vcm::ExperimentReport report = vcm::rate_study(sc, policy, grid, replicates, opts);
  vcm::io::write_atomic(out / "report.json", report.to_json().dump(2) + "\n");
  std::ostringstream csv;
  report.write_csv(csv);
  vcm::io::write_atomic(out / "report.csv", csv.str());

  const json options{{"scenario", scenario_path}, {"n_grid", grid_spec},
                     {"replicates", replicates}, {"fixed_l", fixed_l},
                     {"select_l", use_select_l}, {"gamma", gamma},
                     {"b", b},                   {"metric", metric},
                     {"oracle_lambda", oracle_lambda}, {"C", C},
                     {"seed", common.seed_override},   };
  const json resolved{{"n_grid", grid}, {"seed", sc.seed}, {"fitted_slope", report.fitted_slope}};
  write_manifest(out, "rates", options, resolved,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int run_verify_bounds(const CommonOpts& common, const std::string& scenario_path, long n,
                      int trials, int dict_l, bool oracle_lambda, double C) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = ensure_out_dir(common.out_dir);
  const vcm::Scenario sc = load_scenario(scenario_path, common.seed_override);
  const vcm::Dictionary dict = vcm::Dictionary::fourier(dict_l, sc.measure);

  vcm::ExperimentOptions opts;
  opts.C = C;
  opts.oracle_lambda = oracle_lambda;

  const vcm::SigmaNormStats stats = vcm::mc_sigma_norms(sc, dict, n, std::max(trials, 30), opts);
  const vcm::ExperimentReport report = vcm::bound_check(sc, dict, n, trials, opts);

  json vj;
  vj["sigma_norms"] = stats.to_json();
  vj["bound_check"] = report.to_json();
  vcm::io::write_atomic(out / "verify.json", vj.dump(2) + "\n");
  std::ostringstream csv;
  report.write_csv(csv);
  vcm::io::write_atomic(out / "bound_check.csv", csv.str());

  const json options{{"scenario", scenario_path}, {"n", n},       {"trials", trials},
                     {"dict_l", dict_l},          {"oracle_lambda", oracle_lambda},
                     {"C", C},                    {"seed", common.seed_override},
                     };
  const json resolved{{"seed", sc.seed}, {"coverage", report.coverage}};
  write_manifest(out, "verify-bounds", options, resolved,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int run_basis_info(const CommonOpts& common, const std::string& dict_path, int grid) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = ensure_out_dir(common.out_dir);
  const vcm::Dictionary dict = vcm::Dictionary::from_json(vcm::io::read_json(dict_path));
  json info;
  info["kind"] = to_string(dict.kind());
  info["l"] = dict.l();
  info["c_phi"] = dict.c_phi();
  info["gram_defect"] = dict.gram_defect();
  info["sup_norm_constant"] = dict.sup_norm_constant(grid);
  info["quad_nodes"] = dict.quadrature().size();
  vcm::io::write_atomic(out / "basis_info.json", info.dump(2) + "\n");
  const json options{{"dict", dict_path}, {"grid", grid}};
  write_manifest(out, "basis-info", options, json::object(),
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("VCM_QUAD_NODES")) {
    try {
      vcm::set_default_quad_nodes(std::stoi(env));
    } catch (const std::exception& e) {
      std::cerr << "error: VCM_QUAD_NODES: " << e.what() << "\n";
      return 1;
    }
  }

  CLI::App app{"low-rank estimation for the varying coefficient model"};
  app.require_subcommand(1);
  CommonOpts common;

  auto add_common = [&](CLI::App* sub, bool with_seed = true) {
    sub->add_option("--out", common.out_dir, "output directory")->capture_default_str();
    sub->add_option("--jobs", common.jobs, "worker threads (0 = library default)");
    if (with_seed) sub->add_option("--seed", common.seed_override, "override the scenario seed");
  };

  // estimate
  std::string data_path, dict_path, lambda_arg = "auto", tuning_path, scenario_path, solver_path;
  bool est_trace = false;
  auto* est = app.add_subcommand("estimate", "fit the coordinate matrix from a dataset");
  est->add_option("--data", data_path, "dataset CSV (t,y,w_1..w_p)")->required();
  est->add_option("--dict", dict_path, "dictionary JSON")->required();
  est->add_option("--lambda", lambda_arg, "regularization weight or 'auto'")
      ->capture_default_str();
  est->add_option("--tuning", tuning_path, "tuning constants JSON for --lambda auto");
  est->add_option("--scenario", scenario_path, "scenario JSON declaring the design");
  est->add_option("--solver", solver_path, "solver configuration JSON");
  est->add_flag("--trace", est_trace, "also write the objective trace CSV");
  add_common(est, false);

  // simulate
  std::string sim_scenario;
  long sim_n = 0;
  std::string sim_dict;
  auto* sim = app.add_subcommand("simulate", "draw a synthetic dataset with its ground truth");
  sim->add_option("--scenario", sim_scenario, "scenario JSON")->required();
  sim->add_option("--n", sim_n, "number of observations")->required();
  sim->add_option("--dict", sim_dict, "dictionary JSON for the coefficient ground truth");
  add_common(sim);

  // tune
  std::string tune_params, tune_data;
  auto* tun = app.add_subcommand("tune", "closed-form tuning quantities as a JSON report");
  tun->add_option("--params", tune_params, "tuning parameters JSON")->required();
  tun->add_option("--data", tune_data, "dataset CSV for empirical design moments");
  add_common(tun, false);

  // rates
  std::string rates_scenario, rates_grid, rates_metric = "frobenius_sq";
  int rates_replicates = 50, rates_fixed_l = 8;
  bool rates_select_l = false, rates_oracle = false;
  double rates_gamma = 1.0, rates_b = 1.0, rates_C = 1.0;
  auto* rat = app.add_subcommand("rates", "convergence-rate study over an n grid");
  rat->add_option("--scenario", rates_scenario, "scenario JSON")->required();
  rat->add_option("--n-grid", rates_grid, "lo:hi:k log-spaced sample sizes")->required();
  rat->add_option("--replicates", rates_replicates, "replicates per grid point")
      ->capture_default_str();
  rat->add_option("--fixed-l", rates_fixed_l, "dictionary size")->capture_default_str();
  rat->add_flag("--select-l", rates_select_l, "use the closed-form dictionary size rule");
  rat->add_option("--gamma", rates_gamma, "smoothness exponent for --select-l")
      ->capture_default_str();
  rat->add_option("--b", rates_b, "sup-norm remainder constant for --select-l")
      ->capture_default_str();
  rat->add_option("--metric", rates_metric, "frobenius_sq or mse_l2")->capture_default_str();
  rat->add_flag("--oracle-lambda", rates_oracle, "per-trial lambda from the true noise term");
  rat->add_option("--C", rates_C, "generic constant in thresholds and bounds")
      ->capture_default_str();
  add_common(rat);

  // verify-bounds
  std::string vb_scenario;
  long vb_n = 10000;
  int vb_trials = 100, vb_dict_l = 10;
  bool vb_oracle = false;
  double vb_C = 1.0;
  auto* vb = app.add_subcommand("verify-bounds", "Monte Carlo check of the error bounds");
  vb->add_option("--scenario", vb_scenario, "scenario JSON")->required();
  vb->add_option("--n", vb_n, "sample size per trial")->capture_default_str();
  vb->add_option("--trials", vb_trials, "number of Monte Carlo trials")->capture_default_str();
  vb->add_option("--dict-l", vb_dict_l, "dictionary size")->capture_default_str();
  vb->add_flag("--oracle-lambda", vb_oracle, "per-trial lambda from the true noise term");
  vb->add_option("--C", vb_C, "generic constant in thresholds and bounds")->capture_default_str();
  add_common(vb);

  // basis-info
  std::string bi_dict;
  int bi_grid = 512;
  auto* bi = app.add_subcommand("basis-info", "orthonormality diagnostics for a dictionary");
  bi->add_option("--dict", bi_dict, "dictionary JSON")->required();
  bi->add_option("--grid", bi_grid, "sup-norm grid size")->capture_default_str();
  add_common(bi, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    apply_jobs(common.jobs);
    if (*est)
      return run_estimate(common, data_path, dict_path, lambda_arg, tuning_path, scenario_path,
                          solver_path, est_trace);
    if (*sim) return run_simulate(common, sim_scenario, sim_n, sim_dict);
    if (*tun) return run_tune(common, tune_params, tune_data);
    if (*rat)
      return run_rates(common, rates_scenario, rates_grid, rates_replicates, rates_fixed_l,
                       rates_select_l, rates_gamma, rates_b, rates_metric, rates_oracle, rates_C);
    if (*vb) return run_verify_bounds(common, vb_scenario, vb_n, vb_trials, vb_dict_l, vb_oracle,
                                      vb_C);
    if (*bi) return run_basis_info(common, bi_dict, bi_grid);
  } catch (const vcm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
