#pragma once

#include <Eigen/Core>

namespace vcm {

/// Fixed quadrature rule on [0,1] with positive weights.
struct Quadrature {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;

  int size() const { return static_cast<int>(nodes.size()); }

  /// Single-panel Gauss-Legendre rule of the given order, mapped to [0,1].
  /// Exact for polynomials of degree 2*order-1.
  static Quadrature gauss_legendre(int order);

  /// Composite rule: [0,1] split into equal panels with a fixed-order
  /// Gauss-Legendre rule per panel. The default panel order 8 gives
  /// ceil(total_nodes/8) panels; panels can be forced to a power of two so
  /// panel boundaries land on dyadic breakpoints.
  static Quadrature composite(int total_nodes, int panel_order = 8, bool pow2_panels = false);

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (int q = 0; q < size(); ++q) acc += weights[q] * f(nodes[q]);
    return acc;
  }
};

}  // namespace vcm
