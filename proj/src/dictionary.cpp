#include "vcm/dictionary.hpp"

#include <atomic>
#include <bit>
#include <cmath>

#include <nlohmann/json.hpp>

#include "vcm/errors.hpp"
#include "vcm/stats.hpp"

namespace vcm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;

std::atomic<uint64_t> g_next_dict_id{1};

void fourier_eval(int l, double t, double* out) {
  out[0] = 1.0;
  for (int k = 1; 2 * k - 1 < l; ++k) {
    const double a = kTwoPi * k * t;
    out[2 * k - 1] = kSqrt2 * std::cos(a);
    if (2 * k < l) out[2 * k] = kSqrt2 * std::sin(a);
  }
}

// Haar mother: 1 on [0,1/2), -1 on [1/2,1), 0 elsewhere.
double haar_mother(double x) {
  if (x < 0.0 || x >= 1.0) return 0.0;
  return x < 0.5 ? 1.0 : -1.0;
}

void haar_eval(int l, double t, double* out) {
  out[0] = 1.0;
  for (int j = 2; j <= l; ++j) {
    const unsigned m = unsigned(j - 1);
    const int h = std::bit_width(m) - 1;       // level
    const int i = int(m - (1u << h));          // shift within level
    const double scale = std::exp2(0.5 * h);
    out[j - 1] = scale * haar_mother(std::ldexp(t, h) - i);
  }
}

// Shifted Legendre, normalized: phi_j(t) = sqrt(2j-1) P_{j-1}(2t-1).
void legendre_eval(int l, double t, double* out) {
  const double x = 2.0 * t - 1.0;
  double p0 = 1.0, p1 = x;
  out[0] = 1.0;
  if (l > 1) out[1] = std::sqrt(3.0) * x;
  for (int k = 1; k + 1 < l; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    out[k + 1] = std::sqrt(2.0 * k + 3.0) * p2;
    p0 = p1;
    p1 = p2;
  }
}

double default_c_phi(DictionaryKind kind, int l, const DensityMeasure& m) {
  double base = 1.0;
  switch (kind) {
    case DictionaryKind::Fourier:
      base = kSqrt2;
      break;
    case DictionaryKind::HaarWavelet: {
      // sup_t sum phi^2 = 2^ceil(log2 l); equals l exactly at powers of two.
      const int ceil_pow = l <= 1 ? 1 : (1 << (std::bit_width(unsigned(l - 1))));
      base = std::sqrt(double(ceil_pow) / double(l));
      break;
    }
    case DictionaryKind::Polynomial:
      // Legendre values peak at t in {0,1}: sum_j (2j-1) = l^2.
      base = std::sqrt(double(l));
      break;
    case DictionaryKind::Custom:
      break;
  }
  if (m.kind() == MeasureKind::Weighted) base /= std::sqrt(m.g1());
  return base;
}

Quadrature make_quadrature(DictionaryKind kind, const DensityMeasure& m) {
  const int nodes = m.quad_nodes();
  switch (kind) {
    case DictionaryKind::Polynomial:
      // A single high-order panel integrates polynomial products exactly.
      return Quadrature::gauss_legendre(nodes);
    case DictionaryKind::HaarWavelet:
      // Power-of-two panels align with the dyadic breakpoints.
      return Quadrature::composite(nodes, 8, /*pow2_panels=*/true);
    default:
      return Quadrature::composite(nodes, 8);
  }
}

}  // namespace

void ApproxSpec::validate() const {
  if (!(b > 0.0) || !(b1 > 0.0) || !(gamma > 0.0))
    throw ValidationError("approx spec: b, b1 and gamma must be positive");
}

std::string to_string(DictionaryKind kind) {
  switch (kind) {
    case DictionaryKind::Fourier: return "fourier";
    case DictionaryKind::HaarWavelet: return "haar_wavelet";
    case DictionaryKind::Polynomial: return "polynomial";
    case DictionaryKind::Custom: return "custom";
  }
  return "unknown";
}

DictionaryKind dictionary_kind_from_string(const std::string& s) {
  if (s == "fourier") return DictionaryKind::Fourier;
  if (s == "haar_wavelet") return DictionaryKind::HaarWavelet;
  if (s == "polynomial") return DictionaryKind::Polynomial;
  if (s == "custom") return DictionaryKind::Custom;
  throw ValidationError("dictionary: unknown kind '" + s + "'");
}

struct Dictionary::Impl {
  DictionaryKind kind = DictionaryKind::Fourier;
  int l = 1;
  DensityMeasure measure = DensityMeasure::lebesgue();
  double c_phi = 1.0;
  EvalFn unweighted;
  Quadrature quad;
  uint64_t id = 0;

  static std::shared_ptr<const Impl> create(DictionaryKind kind, EvalFn eval, int l, double c_phi,
                                            DensityMeasure measure) {
    if (l < 1) throw ValidationError("dictionary: l must be a positive integer");
    if (!(c_phi > 0.0)) throw ValidationError("dictionary: c_phi must be positive");
    auto impl = std::make_shared<Impl>();
    impl->kind = kind;
    impl->l = l;
    impl->measure = std::move(measure);
    impl->c_phi = c_phi;
    impl->unweighted = std::move(eval);
    impl->quad = make_quadrature(kind, impl->measure);
    impl->id = g_next_dict_id.fetch_add(1);
    return impl;
  }
};

Dictionary Dictionary::fourier(int l, DensityMeasure measure) {
  const double c = default_c_phi(DictionaryKind::Fourier, l, measure);
  return Dictionary(Impl::create(
      DictionaryKind::Fourier, [l](double t, double* out) { fourier_eval(l, t, out); }, l, c,
      std::move(measure)));
}

Dictionary Dictionary::haar_wavelet(int l, DensityMeasure measure) {
  const double c = default_c_phi(DictionaryKind::HaarWavelet, l, measure);
  return Dictionary(Impl::create(
      DictionaryKind::HaarWavelet, [l](double t, double* out) { haar_eval(l, t, out); }, l, c,
      std::move(measure)));
}

Dictionary Dictionary::polynomial(int l, DensityMeasure measure) {
  const double c = default_c_phi(DictionaryKind::Polynomial, l, measure);
  return Dictionary(Impl::create(
      DictionaryKind::Polynomial, [l](double t, double* out) { legendre_eval(l, t, out); }, l, c,
      std::move(measure)));
}

Dictionary Dictionary::custom(EvalFn eval, int l, double c_phi, DensityMeasure measure) {
  Dictionary dict(
      Impl::create(DictionaryKind::Custom, std::move(eval), l, c_phi, std::move(measure)));
  const double defect = dict.gram_defect();
  if (defect > 1e-6)
    throw InvariantViolation("dictionary: custom system is not orthonormal (Gram defect " +
                             std::to_string(defect) + ")");
  return dict;
}

void Dictionary::eval_into(double t, double* out) const {
  if (!(t >= 0.0 && t <= 1.0))
    throw DomainError("dictionary: t=" + std::to_string(t) + " outside [0,1]");
  impl_->unweighted(t, out);
  if (impl_->measure.kind() == MeasureKind::Weighted) {
    const double gv = impl_->measure.g(t);
    if (!(gv > 0.0))
      throw MeasureError("dictionary: density is non-positive at t=" + std::to_string(t));
    const double scale = 1.0 / std::sqrt(gv);
    for (int j = 0; j < impl_->l; ++j) out[j] *= scale;
  }
}

Eigen::VectorXd Dictionary::eval(double t) const {
  Eigen::VectorXd v(impl_->l);
  eval_into(t, v.data());
  return v;
}

Eigen::MatrixXd Dictionary::gram() const {
  const int l = impl_->l;
  const Quadrature& quad = impl_->quad;
  if (quad.size() < 2 * l)
    throw ValidationError("dictionary: gram needs at least 2l quadrature nodes");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(l, l);
  Eigen::VectorXd v(l);
  for (int q = 0; q < quad.size(); ++q) {
    const double t = quad.nodes[q];
    eval_into(t, v.data());
    g.selfadjointView<Eigen::Lower>().rankUpdate(v, quad.weights[q] * impl_->measure.g(t));
  }
  return g.selfadjointView<Eigen::Lower>();
}

double Dictionary::gram_defect() const {
  const Eigen::MatrixXd g = gram();
  return (g - Eigen::MatrixXd::Identity(impl_->l, impl_->l)).cwiseAbs().maxCoeff();
}

double Dictionary::sup_norm_constant(int grid_size) const {
  if (grid_size < 16) throw DomainError("dictionary: sup-norm grid must have >= 16 points");
  const int l = impl_->l;
  Eigen::VectorXd v(l);
  double worst = 0.0;
  for (int k = 0; k < grid_size; ++k) {
    const double t = double(k) / (grid_size - 1);
    eval_into(t, v.data());
    worst = std::max(worst, v.squaredNorm() / l);
  }
  const double value = std::sqrt(worst);
  if (value > impl_->c_phi * (1.0 + 1e-12))
    throw InvariantViolation("dictionary: sup-norm constant " + std::to_string(value) +
                             " exceeds declared c_phi " + std::to_string(impl_->c_phi));
  return value;
}

Dictionary::Expansion Dictionary::expand(const std::function<double(double)>& f) const {
  const int l = impl_->l;
  const Quadrature& quad = impl_->quad;
  Expansion e;
  e.coeffs = Eigen::VectorXd::Zero(l);
  Eigen::VectorXd v(l);
  for (int q = 0; q < quad.size(); ++q) {
    const double t = quad.nodes[q];
    eval_into(t, v.data());
    e.coeffs.noalias() += (quad.weights[q] * impl_->measure.g(t) * f(t)) * v;
  }
  // Sup residual on offset midpoints (avoids breakpoints of step systems).
  const int grid = 2048;
  double sup = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double t = (k + 0.5) / grid;
    eval_into(t, v.data());
    sup = std::max(sup, std::abs(f(t) - e.coeffs.dot(v)));
  }
  e.residual_sup = sup;
  double l2 = 0.0;
  for (int q = 0; q < quad.size(); ++q) {
    const double t = quad.nodes[q];
    eval_into(t, v.data());
    const double r = f(t) - e.coeffs.dot(v);
    l2 += quad.weights[q] * impl_->measure.g(t) * r * r;
  }
  e.residual_l2 = std::sqrt(std::max(0.0, l2));
  return e;
}

int Dictionary::l() const { return impl_->l; }
DictionaryKind Dictionary::kind() const { return impl_->kind; }
double Dictionary::c_phi() const { return impl_->c_phi; }
const DensityMeasure& Dictionary::measure() const { return impl_->measure; }
const Quadrature& Dictionary::quadrature() const { return impl_->quad; }
uint64_t Dictionary::id() const { return impl_->id; }

nlohmann::json Dictionary::to_json() const {
  if (impl_->kind == DictionaryKind::Custom)
    throw ValidationError("dictionary: custom systems are not serializable");
  nlohmann::json j;
  j["kind"] = to_string(impl_->kind);
  j["l"] = impl_->l;
  j["measure"] = impl_->measure.to_json();
  j["c_phi"] = impl_->c_phi;
  return j;
}

Dictionary Dictionary::from_json(const nlohmann::json& j) {
  const DictionaryKind kind = dictionary_kind_from_string(j.at("kind").get<std::string>());
  const int l = j.at("l").get<int>();
  DensityMeasure m =
      j.contains("measure") ? DensityMeasure::from_json(j.at("measure")) : DensityMeasure::lebesgue();
  Dictionary dict = [&] {
    switch (kind) {
      case DictionaryKind::Fourier: return fourier(l, m);
      case DictionaryKind::HaarWavelet: return haar_wavelet(l, m);
      case DictionaryKind::Polynomial: return polynomial(l, m);
      default: throw ValidationError("dictionary: custom systems are not serializable");
    }
  }();
  if (j.contains("c_phi")) {
    const double declared = j.at("c_phi").get<double>();
    if (declared + 1e-12 < dict.c_phi())
      throw InvariantViolation("dictionary: declared c_phi below the per-kind value");
  }
  return dict;
}

ApproxSpec fit_approx_spec(const std::vector<std::function<double(double)>>& components,
                           DictionaryKind kind, const DensityMeasure& measure,
                           const std::vector<int>& l_grid) {
  if (components.empty()) throw ValidationError("fit_approx_spec: no components");
  if (l_grid.size() < 2) throw ValidationError("fit_approx_spec: need >= 2 grid sizes");
  std::vector<double> log_l, log_sup, log_l2;
  for (int l : l_grid) {
    Dictionary dict = [&] {
      switch (kind) {
        case DictionaryKind::Fourier: return Dictionary::fourier(l, measure);
        case DictionaryKind::HaarWavelet: return Dictionary::haar_wavelet(l, measure);
        case DictionaryKind::Polynomial: return Dictionary::polynomial(l, measure);
        default: throw ValidationError("fit_approx_spec: custom dictionaries unsupported");
      }
    }();
    double sup = 0.0, l2 = 0.0;
    for (const auto& f : components) {
      const auto e = dict.expand(f);
      sup = std::max(sup, e.residual_sup);
      l2 = std::max(l2, e.residual_l2);
    }
    if (sup <= 1e-14 || l2 <= 1e-14) continue;  // exactly representable from here on
    log_l.push_back(std::log(double(l)));
    log_sup.push_back(std::log(sup));
    log_l2.push_back(std::log(l2));
  }
  ApproxSpec spec;
  spec.empirical = true;
  if (log_l.size() < 2) {
    // Remainder is numerically zero: any positive constants are valid bounds.
    spec.b = spec.b1 = 1e-12;
    spec.gamma = 1.0;
    return spec;
  }
  const LineFit fit = fit_line(log_l, log_sup);
  spec.gamma = std::max(1e-6, -fit.slope);
  spec.b = std::exp(fit.intercept);
  double acc = 0.0;
  for (size_t i = 0; i < log_l.size(); ++i)
    acc += log_l2[i] + (spec.gamma + 0.5) * log_l[i];
  spec.b1 = std::exp(acc / double(log_l.size()));
  return spec;
}

}  // namespace vcm
