#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vcm/dataset.hpp"

namespace vcm {

/// Configuration of the nuclear-norm penalized least-squares solver
///   min_A (1/n) sum_i (y_i - <X_i, A>)^2 + lambda ||A||_*.
struct SolverConfig {
  double lambda = 0.0;
  int max_iter = 5000;
  double rel_tol = 1e-9;
  /// Step size; empty selects 1/L with L from lipschitz_bound.
  std::optional<double> fixed_step;
  bool accelerate = true;
  bool restart = true;

  void validate() const;
  nlohmann::json to_json() const;
  static SolverConfig from_json(const nlohmann::json& j);
};

struct SolverReport {
  int iterations = 0;
  std::vector<double> objective_trace;
  double final_objective = 0.0;
  int rank_hat = 0;           // singular values above 1e-8 * sigma_1
  double nuclear_norm_hat = 0.0;
  bool converged = false;

  nlohmann::json to_json() const;
  void trace_to_csv(std::ostream& os) const;
};

/// (1/n) sum (y_i - <X_i,A>)^2 + lambda ||A||_*.
double objective(const CoordinateMatrix& a, const Dataset& data, const Dictionary& dict,
                 double lambda);

/// Gradient of the smooth part: (2/n) sum (<X_i,A> - y_i) w_i phi(t_i)',
/// accumulated through the rank-one structure.
CoordinateMatrix gradient(const CoordinateMatrix& a, const Dataset& data, const Dictionary& dict);

/// Singular value thresholding: U max(S - tau, 0) V', the proximal map of
/// tau ||.||_*.
CoordinateMatrix svt(const Eigen::MatrixXd& z, double tau);

/// L = 2 * lambda_max of A -> (1/n) sum <X_i,A>^2, estimated by power
/// iteration on the composed operator; bounded above by the crude value
/// (2/n) sum ||w_i||^2 ||phi(t_i)||^2, which is the fallback on stagnation.
double lipschitz_bound(const Dataset& data, const Dictionary& dict);

/// Smallest lambda for which the solution is exactly zero:
/// ||(2/n) sum y_i w_i phi(t_i)'|| (spectral norm).
double zero_threshold(const Dataset& data, const Dictionary& dict);

/// Accelerated proximal gradient with singular-value thresholding and
/// function-value restart. Deterministic for fixed inputs: gradient
/// accumulation uses fixed-order block reductions, so results do not depend
/// on the thread count.
std::pair<CoordinateMatrix, SolverReport> solve(const Dataset& data, const Dictionary& dict,
                                                const SolverConfig& config,
                                                const CoordinateMatrix* warm_start = nullptr);

}  // namespace vcm
