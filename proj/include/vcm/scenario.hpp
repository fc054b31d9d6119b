#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "vcm/dataset.hpp"
#include "vcm/density.hpp"

namespace vcm {

enum class CoeffKind { Trig, Poly, SplineFree, Explicit };
enum class DesignKind { CanonicalUniform, SphereUniform, CustomTable };
enum class NoiseKind { Gaussian, RademacherBounded, Laplace };

/// Family of the non-constant coefficient functions. Trig polynomials are
/// exactly representable in a large enough Fourier dictionary (isolating
/// estimation error); free splines leave a nonzero expansion remainder.
struct CoeffSpec {
  CoeffKind kind = CoeffKind::Trig;
  int order = 2;  // k_max for Trig, degree for Poly
  std::vector<std::function<double(double)>> explicit_fns;

  static CoeffSpec trig(int k_max) { return {CoeffKind::Trig, k_max, {}}; }
  static CoeffSpec poly(int degree) { return {CoeffKind::Poly, degree, {}}; }
  static CoeffSpec spline_free() { return {CoeffKind::SplineFree, 0, {}}; }
  static CoeffSpec explicit_list(std::vector<std::function<double(double)>> fns) {
    return {CoeffKind::Explicit, 0, std::move(fns)};
  }
};

/// A fully specified synthetic varying-coefficient setup: the first s-1
/// coefficient functions vary, the remaining p-s+1 are constants. Everything
/// is deterministic in the seed.
struct Scenario {
  int p = 1;
  int s = 1;
  CoeffSpec coeff = CoeffSpec::trig(2);
  DesignKind design = DesignKind::CanonicalUniform;
  Eigen::MatrixXd design_table;  // rows are candidate covariates (CustomTable)
  NoiseKind noise = NoiseKind::Gaussian;
  double sigma = 0.0;
  DensityMeasure measure = DensityMeasure::lebesgue();
  uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static Scenario from_json(const nlohmann::json& j);
};

/// Unit-variance Orlicz constant K for each shipped noise kind.
double noise_orlicz_constant(NoiseKind kind);

std::string to_string(CoeffKind k);
std::string to_string(DesignKind k);
std::string to_string(NoiseKind k);

/// The p coefficient functions; exactly s-1 of them are non-constant.
std::vector<std::function<double(double)>> make_coefficients(const Scenario& sc);

/// Rows are the expansion coefficients of each component in the dictionary.
/// Numerical rank is at most s for Lebesgue-measure dictionaries.
CoordinateMatrix ground_truth_matrix(const Scenario& sc, const Dictionary& dict);

/// Draws t_i ~ mu, W_i ~ design, xi_i ~ noise and forms
/// y_i = w_i' f(t_i) + sigma xi_i. Deterministic in (seed, n, replicate) and
/// identical whether observations are generated in parallel or serially.
/// Distinct replicates share the ground truth but draw fresh data.
Dataset sample_dataset(const Scenario& sc, long n, uint64_t replicate = 0);

}  // namespace vcm
