#include "vcm/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <nlohmann/json.hpp>

#include "vcm/errors.hpp"
#include "vcm/rng.hpp"

namespace vcm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Amplitude windows for the generated families. Chosen so the ground-truth
// matrix has singular values well above typical regularization shrinkage.
constexpr double kConstLo = 1.0, kConstHi = 3.0;
constexpr double kTrigAmp = 4.0;
constexpr double kTrigLeadLo = 1.5, kTrigLeadHi = 4.0;
constexpr double kPolyAmp = 3.0;
constexpr double kSplineAmp = 15.0;

double uniform_in(rng::Substream& st, double lo, double hi) {
  return lo + (hi - lo) * st.uniform();
}

std::function<double(double)> make_varying(const Scenario& sc, int component) {
  rng::Substream st(sc.seed, rng::StreamTag::Coefficients, uint64_t(component));
  switch (sc.coeff.kind) {
    case CoeffKind::Trig: {
      const int k_max = sc.coeff.order;
      const double base = uniform_in(st, kConstLo, kConstHi);
      std::vector<double> ac(k_max), as(k_max);
      for (int k = 0; k < k_max; ++k) {
        ac[k] = uniform_in(st, -kTrigAmp, kTrigAmp);
        as[k] = uniform_in(st, -kTrigAmp, kTrigAmp);
      }
      // Force the leading mode so the component is genuinely non-constant.
      const double lead = uniform_in(st, kTrigLeadLo, kTrigLeadHi);
      ac[k_max - 1] = st.uniform() < 0.5 ? lead : -lead;
      return [base, ac, as](double t) {
        double v = base;
        for (size_t k = 0; k < ac.size(); ++k) {
          const double a = kTwoPi * double(k + 1) * t;
          v += ac[k] * std::sqrt(2.0) * std::cos(a) + as[k] * std::sqrt(2.0) * std::sin(a);
        }
        return v;
      };
    }
    case CoeffKind::Poly: {
      const int degree = sc.coeff.order;
      std::vector<double> c(degree + 1);
      for (int k = 0; k <= degree; ++k) c[k] = uniform_in(st, -kPolyAmp, kPolyAmp);
      const double lead = uniform_in(st, 0.5, kPolyAmp);
      c[degree] = st.uniform() < 0.5 ? lead : -lead;
      return [c](double t) {
        double v = 0.0;
        for (int k = int(c.size()) - 1; k >= 0; --k) v = v * t + c[k];
        return v;
      };
    }
    case CoeffKind::SplineFree: {
      // Cubic truncated-power spline with free knots: smooth but outside any
      // finite trigonometric span.
      std::array<double, 4> knots;
      for (auto& u : knots) u = st.uniform();
      std::sort(knots.begin(), knots.end());
      const double c0 = uniform_in(st, kConstLo, kConstHi);
      const double c1 = uniform_in(st, -2.0, 2.0);
      std::array<double, 4> d;
      for (auto& v : d) v = uniform_in(st, -kSplineAmp, kSplineAmp);
      return [knots, c0, c1, d](double t) {
        double v = c0 + c1 * t;
        for (size_t j = 0; j < knots.size(); ++j) {
          const double u = t - knots[j];
          if (u > 0.0) v += d[j] * u * u * u;
        }
        return v;
      };
    }
    case CoeffKind::Explicit:
      throw ValidationError("scenario: explicit coefficient lists bypass generation");
  }
  throw ValidationError("scenario: unknown coefficient kind");
}

bool is_constant_on_grid(const std::function<double(double)>& f) {
  double lo = f(0.0), hi = lo, scale = std::abs(lo);
  for (int k = 1; k <= 64; ++k) {
    const double v = f(double(k) / 64.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    scale = std::max(scale, std::abs(v));
  }
  return hi - lo <= 1e-10 * (1.0 + scale);
}

// Inverse-CDF sampler for t ~ mu on a fixed grid of the density.
class TimeSampler {
 public:
  explicit TimeSampler(const DensityMeasure& m) : lebesgue_(m.kind() == MeasureKind::Lebesgue) {
    if (lebesgue_) return;
    cdf_.assign(kGrid + 1, 0.0);
    double acc = 0.0;
    double prev = m.g(0.0);
    for (int k = 1; k <= kGrid; ++k) {
      const double cur = m.g(double(k) / kGrid);
      acc += 0.5 * (prev + cur) / kGrid;
      cdf_[k] = acc;
      prev = cur;
    }
    for (auto& v : cdf_) v /= acc;
  }

  double draw(rng::Substream& st) const {
    const double u = st.uniform();
    if (lebesgue_) return u;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const int hi = std::min<int>(int(it - cdf_.begin()), kGrid);
    const double c0 = cdf_[hi - 1], c1 = cdf_[hi];
    const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    return (double(hi - 1) + frac) / kGrid;
  }

 private:
  static constexpr int kGrid = 4096;
  bool lebesgue_;
  std::vector<double> cdf_;
};

}  // namespace

double noise_orlicz_constant(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Gaussian: return 1.0;
    case NoiseKind::RademacherBounded: return 1.0;
    case NoiseKind::Laplace:
      // E exp(|xi|/K) = e at K = b e/(e-1) for the unit-variance scale b.
      return 0.70710678118654752440 * M_E / (M_E - 1.0);
  }
  return 1.0;
}

std::string to_string(CoeffKind k) {
  switch (k) {
    case CoeffKind::Trig: return "trig";
    case CoeffKind::Poly: return "poly";
    case CoeffKind::SplineFree: return "spline_free";
    case CoeffKind::Explicit: return "explicit";
  }
  return "unknown";
}

std::string to_string(DesignKind k) {
  switch (k) {
    case DesignKind::CanonicalUniform: return "canonical_uniform";
    case DesignKind::SphereUniform: return "sphere_uniform";
    case DesignKind::CustomTable: return "custom_table";
  }
  return "unknown";
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::RademacherBounded: return "rademacher_bounded";
    case NoiseKind::Laplace: return "laplace";
  }
  return "unknown";
}

void Scenario::validate() const {
  if (p < 1) throw ValidationError("scenario: p must be positive");
  if (s < 1 || s > p + 1) throw ValidationError("scenario: s must satisfy 1 <= s <= p+1");
  if (sigma < 0.0) throw ValidationError("scenario: sigma must be nonnegative");
  if (coeff.kind == CoeffKind::Trig && coeff.order < 1)
    throw ValidationError("scenario: trig k_max must be positive");
  if (coeff.kind == CoeffKind::Poly && coeff.order < 1)
    throw ValidationError("scenario: poly degree must be positive");
  if (coeff.kind == CoeffKind::Explicit && int(coeff.explicit_fns.size()) != p)
    throw ValidationError("scenario: explicit list must have exactly p functions");
  if (design == DesignKind::CustomTable) {
    if (design_table.rows() < 1 || design_table.cols() != p)
      throw ValidationError("scenario: design table must be non-empty with p columns");
    for (Eigen::Index i = 0; i < design_table.rows(); ++i)
      if (design_table.row(i).norm() > 1.0 + 1e-12)
        throw ValidationError("scenario: design table row " + std::to_string(i) +
                              " has ||w|| > 1");
  }
}

nlohmann::json Scenario::to_json() const {
  if (coeff.kind == CoeffKind::Explicit)
    throw ValidationError("scenario: explicit coefficient functions are not serializable");
  nlohmann::json j;
  j["p"] = p;
  j["s"] = s;
  j["coeff"] = {{"kind", to_string(coeff.kind)}, {"order", coeff.order}};
  j["design"] = to_string(design);
  if (design == DesignKind::CustomTable) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < design_table.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < design_table.cols(); ++c) row.push_back(design_table(i, c));
      rows.push_back(std::move(row));
    }
    j["design_table"] = std::move(rows);
  }
  j["noise"] = to_string(noise);
  j["sigma"] = sigma;
  j["measure"] = measure.to_json();
  j["seed"] = seed;
  return j;
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario sc;
  sc.p = j.at("p").get<int>();
  sc.s = j.at("s").get<int>();
  const auto& cj = j.at("coeff");
  const std::string ckind = cj.at("kind").get<std::string>();
  if (ckind == "trig")
    sc.coeff = CoeffSpec::trig(cj.value("order", 2));
  else if (ckind == "poly")
    sc.coeff = CoeffSpec::poly(cj.value("order", 3));
  else if (ckind == "spline_free")
    sc.coeff = CoeffSpec::spline_free();
  else
    throw ValidationError("scenario: unknown or non-serializable coeff kind '" + ckind + "'");
  const std::string dk = j.at("design").get<std::string>();
  if (dk == "canonical_uniform")
    sc.design = DesignKind::CanonicalUniform;
  else if (dk == "sphere_uniform")
    sc.design = DesignKind::SphereUniform;
  else if (dk == "custom_table")
    sc.design = DesignKind::CustomTable;
  else
    throw ValidationError("scenario: unknown design kind '" + dk + "'");
  if (sc.design == DesignKind::CustomTable) {
    const auto& rows = j.at("design_table");
    sc.design_table.resize(rows.size(), sc.p);
    for (size_t i = 0; i < rows.size(); ++i)
      for (int c = 0; c < sc.p; ++c) sc.design_table(Eigen::Index(i), c) = rows[i][c].get<double>();
  }
  const std::string nk = j.at("noise").get<std::string>();
  if (nk == "gaussian")
    sc.noise = NoiseKind::Gaussian;
  else if (nk == "rademacher_bounded")
    sc.noise = NoiseKind::RademacherBounded;
  else if (nk == "laplace")
    sc.noise = NoiseKind::Laplace;
  else
    throw ValidationError("scenario: unknown noise kind '" + nk + "'");
  sc.sigma = j.at("sigma").get<double>();
  if (j.contains("measure")) sc.measure = DensityMeasure::from_json(j.at("measure"));
  sc.seed = j.at("seed").get<uint64_t>();
  sc.validate();
  return sc;
}

std::vector<std::function<double(double)>> make_coefficients(const Scenario& sc) {
  sc.validate();
  if (sc.s - 1 > sc.p) throw ValidationError("scenario: more varying components than p");
  std::vector<std::function<double(double)>> fns;
  fns.reserve(sc.p);
  if (sc.coeff.kind == CoeffKind::Explicit) {
    int varying = 0;
    for (const auto& f : sc.coeff.explicit_fns)
      if (!is_constant_on_grid(f)) ++varying;
    if (varying != sc.s - 1)
      throw ValidationError("scenario: explicit list has " + std::to_string(varying) +
                            " non-constant components, expected s-1 = " + std::to_string(sc.s - 1));
    return sc.coeff.explicit_fns;
  }
  for (int k = 0; k < sc.s - 1; ++k) fns.push_back(make_varying(sc, k));
  for (int k = sc.s - 1; k < sc.p; ++k) {
    rng::Substream st(sc.seed, rng::StreamTag::Coefficients, uint64_t(k));
    const double c = uniform_in(st, kConstLo, kConstHi);
    fns.push_back([c](double) { return c; });
  }
  return fns;
}

CoordinateMatrix ground_truth_matrix(const Scenario& sc, const Dictionary& dict) {
  if (!dict.measure().same_distribution(sc.measure))
    throw ValidationError("ground_truth_matrix: dictionary measure differs from the scenario's");
  const auto fns = make_coefficients(sc);
  CoordinateMatrix a0(sc.p, dict.l());
  for (int k = 0; k < sc.p; ++k) a0.row(k) = dict.expand(fns[k]).coeffs;
  return a0;
}

Dataset sample_dataset(const Scenario& sc, long n, uint64_t replicate) {
  sc.validate();
  if (n < 1) throw ValidationError("sample_dataset: n must be positive");
  const auto fns = make_coefficients(sc);
  const uint64_t eff_seed = rng::derive_seed(sc.seed, replicate);
  const TimeSampler time_sampler(sc.measure);

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, sc.p);
  Eigen::VectorXd t(n), y(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    rng::Substream st_t(eff_seed, rng::StreamTag::Time, uint64_t(i));
    rng::Substream st_w(eff_seed, rng::StreamTag::Design, uint64_t(i));
    rng::Substream st_e(eff_seed, rng::StreamTag::Noise, uint64_t(i));
    const double ti = time_sampler.draw(st_t);
    t[i] = ti;
    switch (sc.design) {
      case DesignKind::CanonicalUniform: {
        const auto j = st_w.uniform_below(uint64_t(sc.p));
        W(i, Eigen::Index(j)) = 1.0;
        break;
      }
      case DesignKind::SphereUniform: {
        Eigen::VectorXd v(sc.p);
        for (int c = 0; c < sc.p; ++c) v[c] = st_w.gaussian();
        const double norm = v.norm();
        if (norm > 0.0)
          W.row(i) = (v / norm).transpose();
        else
          W(i, 0) = 1.0;
        break;
      }
      case DesignKind::CustomTable: {
        const auto j = st_w.uniform_below(uint64_t(sc.design_table.rows()));
        W.row(i) = sc.design_table.row(Eigen::Index(j));
        break;
      }
    }
    double signal = 0.0;
    for (int c = 0; c < sc.p; ++c)
      if (W(i, c) != 0.0) signal += W(i, c) * fns[c](ti);
    double xi = 0.0;
    if (sc.sigma > 0.0) {
      switch (sc.noise) {
        case NoiseKind::Gaussian: xi = st_e.gaussian(); break;
        case NoiseKind::RademacherBounded: xi = st_e.rademacher(); break;
        case NoiseKind::Laplace: xi = st_e.laplace_unit(); break;
      }
    }
    y[i] = signal + sc.sigma * xi;
  }
  return Dataset(std::move(W), std::move(t), std::move(y));
}

}  // namespace vcm
