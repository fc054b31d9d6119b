#include "vcm/quadrature.hpp"

#include <cmath>

#include "vcm/errors.hpp"

namespace vcm {

namespace {

// Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre_raw(int n, Eigen::ArrayXd& x, Eigen::ArrayXd& w) {
  x.resize(n);
  w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

int next_pow2(int v) {
  int r = 1;
  while (r < v) r <<= 1;
  return r;
}

}  // namespace

Quadrature Quadrature::gauss_legendre(int order) {
  if (order < 1) throw ValidationError("quadrature: order must be positive");
  Eigen::ArrayXd x, w;
  gauss_legendre_raw(order, x, w);
  Quadrature q;
  q.nodes = 0.5 * (x + 1.0);
  q.weights = 0.5 * w;
  return q;
}

Quadrature Quadrature::composite(int total_nodes, int panel_order, bool pow2_panels) {
  if (total_nodes < 1 || panel_order < 1)
    throw ValidationError("quadrature: node and panel counts must be positive");
  int panels = (total_nodes + panel_order - 1) / panel_order;
  if (pow2_panels) panels = next_pow2(panels);
  Eigen::ArrayXd x, w;
  gauss_legendre_raw(panel_order, x, w);
  Quadrature q;
  q.nodes.resize(panels * panel_order);
  q.weights.resize(panels * panel_order);
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = p * h;
    for (int j = 0; j < panel_order; ++j) {
      q.nodes[p * panel_order + j] = a + 0.5 * h * (x[j] + 1.0);
      q.weights[p * panel_order + j] = 0.5 * h * w[j];
    }
  }
  return q;
}

}  // namespace vcm
