#pragma once

#include <Eigen/Core>

namespace vcm {

/// Sum of singular values.
double nuclear_norm(const Eigen::MatrixXd& m);

/// Largest singular value by power iteration on M'M (relative tolerance
/// 1e-10), falling back to a full SVD when the iteration stagnates.
double spectral_norm(const Eigen::MatrixXd& m);

/// Number of singular values above tol * sigma_1.
int numerical_rank(const Eigen::MatrixXd& m, double tol = 1e-8);

}  // namespace vcm
