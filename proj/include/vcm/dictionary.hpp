#pragma once

#include <functional>
#include <memory>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "vcm/density.hpp"
#include "vcm/quadrature.hpp"

namespace vcm {

enum class DictionaryKind { Fourier, HaarWavelet, Polynomial, Custom };

std::string to_string(DictionaryKind kind);
DictionaryKind dictionary_kind_from_string(const std::string& s);

/// Sup-norm and L2 decay constants of the basis-expansion remainder:
/// ||rho^(l)||_inf <= b * l^-gamma and ||rho^(l)||_L2 <= b1 * l^-(gamma+1/2).
struct ApproxSpec {
  double b = 1.0;
  double b1 = 1.0;
  double gamma = 1.0;
  /// True when b/b1/gamma were fitted from residual diagnostics rather than
  /// supplied by the caller.
  bool empirical = false;

  void validate() const;
};

/// An orthonormal dictionary of l functions on (0,1) under a density measure.
/// The first element is the constant function (up to the density weighting
/// 1/sqrt(g)); pointwise evaluations satisfy sum_j phi_j(t)^2 <= c_phi^2 * l.
/// Immutable after construction; evaluation is thread-safe.
class Dictionary {
 public:
  /// Evaluates the l unweighted basis values at t into out[0..l).
  using EvalFn = std::function<void(double t, double* out)>;

  /// Real trigonometric system: 1, sqrt(2)cos(2 pi k t), sqrt(2)sin(2 pi k t), ...
  static Dictionary fourier(int l, DensityMeasure measure = DensityMeasure::lebesgue());
  /// Periodic Haar system: constant, then 2^(h/2) psi(2^h t - i) by level.
  static Dictionary haar_wavelet(int l, DensityMeasure measure = DensityMeasure::lebesgue());
  /// Shifted Legendre polynomials normalized on L2(0,1).
  static Dictionary polynomial(int l, DensityMeasure measure = DensityMeasure::lebesgue());
  /// User-supplied system with a declared c_phi. Orthonormality is checked at
  /// construction (Gram tolerance 1e-6) and non-orthonormal inputs rejected.
  static Dictionary custom(EvalFn eval, int l, double c_phi,
                           DensityMeasure measure = DensityMeasure::lebesgue());

  /// phi(t) = (phi_1(t), ..., phi_l(t)); for weighted measures each entry is
  /// the unweighted value divided by sqrt(g(t)).
  Eigen::VectorXd eval(double t) const;
  /// Allocation-free variant of eval; out must hold l doubles.
  void eval_into(double t, double* out) const;

  /// Quadrature approximation of the Gram matrix <phi_i, phi_j>_{L2(dmu)}.
  Eigen::MatrixXd gram() const;
  /// Largest off-diagonal magnitude plus diagonal deviation of gram().
  double gram_defect() const;

  /// max over a uniform grid of sqrt(sum_j phi_j(t)^2 / l). Throws
  /// InvariantViolation if the value exceeds the declared c_phi.
  double sup_norm_constant(int grid_size = 512) const;

  struct Expansion {
    Eigen::VectorXd coeffs;
    double residual_sup = 0.0;
    double residual_l2 = 0.0;
  };
  /// Projection coefficients <f, phi_j>_{L2(dmu)} with remainder diagnostics.
  Expansion expand(const std::function<double(double)>& f) const;

  int l() const;
  DictionaryKind kind() const;
  double c_phi() const;
  const DensityMeasure& measure() const;
  const Quadrature& quadrature() const;
  /// Identity shared by copies; used as a basis-value cache key.
  uint64_t id() const;

  nlohmann::json to_json() const;
  static Dictionary from_json(const nlohmann::json& j);

 private:
  struct Impl;
  explicit Dictionary(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Fits (b, gamma) from log-log regression of residual_sup against l over a
/// dyadic grid, and b1 from the L2 residuals at the fitted gamma. The result
/// is flagged empirical.
ApproxSpec fit_approx_spec(const std::vector<std::function<double(double)>>& components,
                           DictionaryKind kind, const DensityMeasure& measure,
                           const std::vector<int>& l_grid = {4, 8, 16, 32, 64});

}  // namespace vcm
