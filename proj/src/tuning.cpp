#include "vcm/tuning.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "vcm/errors.hpp"

namespace vcm {

namespace {
constexpr double kLambdaFactor = 4.25;
constexpr double kSingularTol = 1e-12;
}  // namespace

DesignMoments DesignMoments::from_samples(const Eigen::MatrixXd& samples, int l) {
  if (samples.rows() < 1) throw ValidationError("design moments: empty sample");
  if (l < 1) throw ValidationError("design moments: l must be positive");
  const Eigen::Index m = samples.rows();
  for (Eigen::Index i = 0; i < m; ++i)
    if (samples.row(i).norm() > 1.0 + 1e-12)
      throw ValidationError("design moments: sample " + std::to_string(i) + " has ||w|| > 1");
  DesignMoments dm;
  dm.omega = (samples.transpose() * samples) / double(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dm.omega);
  dm.omega_min = std::max(0.0, eig.eigenvalues().minCoeff());
  dm.omega_max = eig.eigenvalues().maxCoeff();
  dm.trace_omega = dm.omega.trace();
  dm.l = l;
  dm.M = std::max(dm.trace_omega, double(l) * dm.omega_max);
  dm.positive_definite = dm.omega_min > kSingularTol * std::max(dm.omega_max, 1e-300);
  return dm;
}

DesignMoments DesignMoments::canonical_uniform(int p, int l) {
  if (p < 1 || l < 1) throw ValidationError("design moments: p and l must be positive");
  DesignMoments dm;
  dm.omega = Eigen::MatrixXd::Identity(p, p) / double(p);
  dm.omega_min = dm.omega_max = 1.0 / p;
  dm.trace_omega = 1.0;
  dm.l = l;
  dm.M = double(std::max(l, p)) / p;
  dm.positive_definite = true;
  return dm;
}

bool DesignMoments::is_canonical() const {
  const int p = static_cast<int>(omega.rows());
  return (omega - Eigen::MatrixXd::Identity(p, p) / double(p)).cwiseAbs().maxCoeff() < 1e-12;
}

nlohmann::json DesignMoments::to_json() const {
  nlohmann::json j;
  j["omega_min"] = omega_min;
  j["omega_max"] = omega_max;
  j["trace_omega"] = trace_omega;
  j["l"] = l;
  j["M"] = M;
  j["positive_definite"] = positive_definite;
  return j;
}

void NoiseSpec::validate() const {
  if (sigma < 0.0) throw ValidationError("noise spec: sigma must be nonnegative");
  if (!(K >= 1.0)) throw ValidationError("noise spec: K >= 1 (standard Gaussian convention)");
  if (!(c_star > 0.0)) throw ValidationError("noise spec: c_star must be positive");
}

nlohmann::json NoiseSpec::to_json() const {
  return nlohmann::json{{"sigma", sigma}, {"K", K}, {"c_star", c_star}};
}

NoiseSpec NoiseSpec::from_json(const nlohmann::json& j) {
  NoiseSpec ns;
  ns.sigma = j.value("sigma", ns.sigma);
  ns.K = j.value("K", ns.K);
  ns.c_star = j.value("c_star", ns.c_star);
  ns.validate();
  return ns;
}

void TuningParams::validate() const {
  noise.validate();
  approx.validate();
  if (p < 1 || l < 1) throw ValidationError("tuning: p and l must be positive");
  if (s < 1 || s > p + 1) throw ValidationError("tuning: s must satisfy 1 <= s <= p+1");
  if (moments.l != l) throw ValidationError("tuning: moments were computed for a different l");
  if (n < 1) throw DomainError("tuning: n must be positive");
}

nlohmann::json TuningParams::to_json() const {
  nlohmann::json j;
  j["noise"] = noise.to_json();
  j["approx"] = {{"b", approx.b}, {"b1", approx.b1}, {"gamma", approx.gamma},
                 {"empirical", approx.empirical}};
  j["s"] = s;
  j["moments"] = moments.to_json();
  j["p"] = p;
  j["l"] = l;
  j["n"] = n;
  j["d"] = d();
  return j;
}

namespace {

double noise_scale(const TuningParams& tp) {
  // c* sigma + 2 b sqrt(s-1) / l^gamma; the second term vanishes for s = 1.
  double v = tp.noise.c_star * tp.noise.sigma;
  if (tp.s > 1)
    v += 2.0 * tp.approx.b * std::sqrt(double(tp.s - 1)) / std::pow(double(tp.l), tp.approx.gamma);
  return v;
}

}  // namespace

double lambda_general(const TuningParams& tp) {
  tp.validate();
  return kLambdaFactor * noise_scale(tp) * std::sqrt(tp.moments.M * std::log(double(tp.d())) / double(tp.n));
}

double lambda_orthonormal(const TuningParams& tp) {
  tp.validate();
  if (!tp.moments.is_canonical())
    throw ValidationError("lambda_orthonormal: requires the canonical-uniform design");
  const double lvp = double(std::max(tp.l, tp.p));
  return kLambdaFactor * noise_scale(tp) *
         std::sqrt(lvp * std::log(double(tp.d())) / (double(tp.p) * double(tp.n)));
}

SampleThresholds sample_thresholds(const TuningParams& tp, double C, double c_phi) {
  tp.validate();
  if (!(C > 0.0)) throw ValidationError("sample_thresholds: C must be positive");
  if (!(c_phi > 0.0)) throw ValidationError("sample_thresholds: c_phi must be positive");
  if (!(tp.moments.omega_max > 0.0)) throw DomainError("sample_thresholds: omega_max is zero");
  const double logd = std::log(double(tp.d()));
  const double log_guard =
      std::max(tp.noise.K * std::log(tp.noise.K * c_phi / tp.moments.omega_max), 1.0);
  SampleThresholds th;
  th.n_star = 2.0 * c_phi * c_phi * tp.l * log_guard * log_guard * logd / tp.moments.M;
  const double ms = std::max(tp.moments.M * tp.s, 1.0);
  th.n_star_star =
      C * c_phi * c_phi * tp.l * logd * ms / (tp.moments.omega_min * tp.moments.omega_min);
  return th;
}

std::string to_string(LRegime r) {
  switch (r) {
    case LRegime::DenseL1: return "dense_l1";
    case LRegime::MidL2: return "mid_l2";
    case LRegime::SmoothL3: return "smooth_l3";
    case LRegime::MinimaxP1: return "minimax_p1";
  }
  return "unknown";
}

LSelection select_l(double n, int p, int s, double gamma, double sigma, double c_phi, double C,
                    double b) {
  if (!(n > 0) || p < 1 || s < 1 || !(gamma > 0) || !(sigma > 0) || !(c_phi > 0) || !(C > 0) ||
      !(b > 0))
    throw ValidationError("select_l: all inputs must be positive");
  LSelection sel;
  sel.d_used = 2.0 * p;
  const double logd = std::log(sel.d_used);

  if (p == 1) {
    const double raw =
        std::pow(2.0 * (2.0 * gamma + 1.0) * b * b * n / (sigma * sigma * logd),
                 1.0 / (2.0 * gamma + 2.0));
    sel.l_hat = std::max<long>(1, std::lround(raw));
    sel.regime = LRegime::MinimaxP1;
    return sel;
  }
  if (!(gamma >= 0.5))
    throw ValidationError("select_l: the three-regime logic requires gamma >= 1/2");

  const double base = C * c_phi * c_phi * s * logd;
  const double dense_lo = base * double(p) * double(p);
  const double mid_lo = dense_lo * p;
  const double smooth_lo = base * std::pow(double(p), 3.0 + 2.0 * gamma);

  // Boundaries compared with >=; a tie lands in the larger-n regime.
  if (n >= smooth_lo) {
    const double raw = std::pow(C * n / (sigma * sigma * p * logd), 1.0 / (2.0 * gamma + 2.0));
    sel.l_hat = std::max<long>(1, std::lround(raw));
    sel.regime = LRegime::SmoothL3;
  } else if (n >= mid_lo) {
    sel.l_hat = std::max<long>(1, long(std::floor(std::sqrt(n / (base * p)))));
    sel.regime = LRegime::MidL2;
  } else if (n >= dense_lo) {
    sel.l_hat = std::max<long>(1, long(std::floor(n / dense_lo)));
    sel.regime = LRegime::DenseL1;
  } else {
    sel.l_hat = 1;
    sel.regime = LRegime::DenseL1;
    sel.extrapolated = true;
  }
  return sel;
}

double beta_bound(const TuningParams& tp, double nuclear_norm_a0, double C, double c_phi) {
  tp.validate();
  if (nuclear_norm_a0 < 0.0) throw ValidationError("beta_bound: ||A0||_* must be nonnegative");
  const double logd = std::log(double(tp.d()));
  const double wmin2 = tp.moments.omega_min * tp.moments.omega_min;
  if (!(wmin2 > 0.0)) throw DomainError("beta_bound: omega_min is zero");
  double variance = tp.noise.sigma * tp.noise.sigma;
  if (tp.s > 1)
    variance += tp.approx.b * tp.approx.b * double(tp.s - 1) /
                std::pow(double(tp.l), 2.0 * tp.approx.gamma);
  const double scale = tp.moments.M * tp.s * logd / (double(tp.p) * wmin2);

  const SampleThresholds th = sample_thresholds(tp, C, c_phi);
  if (double(tp.n) >= th.n_star_star) return variance * scale;
  const double nn2 = nuclear_norm_a0 * nuclear_norm_a0;
  const double first = (variance + double(tp.l) * nn2) * scale;
  const double second = c_phi * nn2 * std::sqrt(logd * double(tp.l) * double(tp.n)) /
                        (tp.moments.omega_min * double(tp.p));
  return std::max(first, second);
}

}  // namespace vcm
