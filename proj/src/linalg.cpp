#include "vcm/linalg.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "vcm/errors.hpp"

namespace vcm {

double nuclear_norm(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw NumericalError("nuclear_norm: non-finite matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().sum();
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw NumericalError("spectral_norm: non-finite matrix");
  if (m.size() == 0) return 0.0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;

  // Deterministic start with a mild index-dependent tilt so it is not
  // orthogonal to the leading singular subspace for structured inputs.
  Eigen::VectorXd v(m.cols());
  for (int j = 0; j < m.cols(); ++j) v[j] = 1.0 + 0.01 * std::sin(0.7 * j + 0.3);
  v.normalize();

  double sigma = 0.0;
  bool converged = false;
  for (int it = 0; it < 5000; ++it) {
    Eigen::VectorXd u = m * v;
    const double norm_u = u.norm();
    if (norm_u == 0.0) break;
    v.noalias() = m.transpose() * (u / norm_u);
    const double next = v.norm();
    if (next == 0.0) break;
    v /= next;
    if (it > 0 && std::abs(next - sigma) <= 1e-10 * std::max(next, 1e-300)) {
      sigma = next;
      converged = true;
      break;
    }
    sigma = next;
  }
  if (!converged) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()[0];
  }
  return sigma;
}

int numerical_rank(const Eigen::MatrixXd& m, double tol) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > tol * s[0]) ++r;
  return r;
}

}  // namespace vcm
