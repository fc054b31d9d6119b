#pragma once

#include <Eigen/Core>

namespace vcm::kernels {

/// Deterministic block partition: block size depends only on n, never on the
/// thread count, so parallel and serial runs produce identical sums.
std::ptrdiff_t block_size(std::ptrdiff_t n);

/// out[i] = w_i' A phi_i for all observations, where W is n x p and Phi is
/// n x l. OpenMP-parallel over blocks.
void design_apply(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& A,
                  Eigen::VectorXd& out);

/// out = sum_i c[i] * w_i * phi_i'. Per-block partial sums are combined in
/// block order, making the result independent of the thread count.
void weighted_outer_sum(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Phi,
                        const Eigen::VectorXd& c, Eigen::MatrixXd& out);

/// Naive single-threaded reference implementations used by the tests and the
/// benchmark to validate the blocked kernels.
namespace reference {
void design_apply(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& A,
                  Eigen::VectorXd& out);
void weighted_outer_sum(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Phi,
                        const Eigen::VectorXd& c, Eigen::MatrixXd& out);
}  // namespace reference

}  // namespace vcm::kernels
