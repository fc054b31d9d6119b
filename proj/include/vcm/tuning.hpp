#pragma once

#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "vcm/dictionary.hpp"

namespace vcm {

/// Second-moment structure of the covariate distribution: Omega = E[W W'],
/// its eigenvalue extremes, and the scale M = tr(Omega) v (l * omega_max)
/// paired with a dictionary size l.
struct DesignMoments {
  Eigen::MatrixXd omega;
  double omega_min = 0.0;
  double omega_max = 0.0;
  double trace_omega = 0.0;
  int l = 1;
  double M = 0.0;
  /// False flags a (numerically) singular Omega; downstream quantities that
  /// divide by omega_min are then meaningless.
  bool positive_definite = false;

  /// Empirical moments from sample rows (each with ||w|| <= 1).
  static DesignMoments from_samples(const Eigen::MatrixXd& samples, int l);
  /// Exact moments for W uniform on the canonical basis vectors: Omega = I/p.
  static DesignMoments canonical_uniform(int p, int l);

  bool is_canonical() const;
  nlohmann::json to_json() const;
};

/// Noise-side constants: level sigma, sub-exponential Orlicz constant K and
/// the concentration constant c* (6.5 for standard Gaussian noise).
struct NoiseSpec {
  double sigma = 1.0;
  double K = 1.0;
  double c_star = 6.5;

  void validate() const;
  nlohmann::json to_json() const;
  static NoiseSpec from_json(const nlohmann::json& j);
};

/// Everything the closed-form tuning quantities depend on.
struct TuningParams {
  NoiseSpec noise;
  ApproxSpec approx;
  int s = 1;  // 1 + number of non-constant coefficient functions
  DesignMoments moments;
  int p = 1;
  int l = 1;
  long n = 1;

  int d() const { return p + l; }
  void validate() const;
  nlohmann::json to_json() const;
};

/// Regularization weight 4.25 (c* sigma + 2 b sqrt(s-1) / l^gamma)
/// sqrt(M log(d) / n).
double lambda_general(const TuningParams& tp);

/// The same weight specialized to the canonical-uniform design, where
/// M = (l v p)/p: 4.25 (...) sqrt((l v p) log(d) / (p n)).
double lambda_orthonormal(const TuningParams& tp);

struct SampleThresholds {
  double n_star = 0.0;       // the sample size past which the sub-exponential
                             // tail term of the noise bound is negligible
  double n_star_star = 0.0;  // the sample size past which the clean error
                             // bound branch applies
};

/// n*  = 2 c_phi^2 l ([K log(K c_phi / omega_max)] v 1)^2 log(d) / M
/// n** = C c_phi^2 l log(d) [(M s) v 1] / omega_min^2
SampleThresholds sample_thresholds(const TuningParams& tp, double C, double c_phi);

enum class LRegime { DenseL1, MidL2, SmoothL3, MinimaxP1 };
std::string to_string(LRegime r);

struct LSelection {
  long l_hat = 1;
  LRegime regime = LRegime::DenseL1;
  /// Set when n sits below the lowest regime threshold and l_hat was clamped.
  bool extrapolated = false;
  double d_used = 2.0;  // the value of d = p + l entering the logarithms
};

/// Error-bound-optimal dictionary size. The circular dependence of d = p + l
/// on the answer is resolved by evaluating log(d) at the balanced point
/// l = p (see README); this keeps the closed forms exact in n, e.g. scaling
/// n by 2^(2 gamma + 2) exactly doubles the smooth-regime value.
LSelection select_l(double n, int p, int s, double gamma, double sigma, double c_phi, double C,
                    double b = 1.0);

/// Theoretical error-bound scale beta. For n >= n** this is
///   (sigma^2 + b^2 (s-1) / l^(2 gamma)) M s log(d) / (p omega_min^2),
/// otherwise the max of the same expression augmented with the
/// l ||A0||_*^2 term and c_phi ||A0||_*^2 sqrt(log(d) l n) / (omega_min p).
double beta_bound(const TuningParams& tp, double nuclear_norm_a0, double C, double c_phi);

}  // namespace vcm
