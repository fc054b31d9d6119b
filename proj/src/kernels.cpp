#include "vcm/kernels.hpp"

#include <algorithm>
#include <vector>

#include "vcm/errors.hpp"

namespace vcm::kernels {

namespace {

void check_shapes(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Phi) {
  if (W.rows() != Phi.rows())
    throw ShapeError("kernels: covariate and basis row counts differ");
}

}  // namespace

std::ptrdiff_t block_size(std::ptrdiff_t n) {
  return std::max<std::ptrdiff_t>(2048, (n + 63) / 64);
}

void design_apply(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& A,
                  Eigen::VectorXd& out) {
  check_shapes(W, Phi);
  if (A.rows() != W.cols() || A.cols() != Phi.cols())
    throw ShapeError("kernels: coordinate matrix dimensions do not match the design");
  const std::ptrdiff_t n = W.rows();
  out.resize(n);
  const std::ptrdiff_t bs = block_size(n);
  const std::ptrdiff_t nb = (n + bs - 1) / bs;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::ptrdiff_t r0 = b * bs;
    const std::ptrdiff_t len = std::min(bs, n - r0);
    out.segment(r0, len).noalias() =
        (W.middleRows(r0, len) * A).cwiseProduct(Phi.middleRows(r0, len)).rowwise().sum();
  }
}

void weighted_outer_sum(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Phi,
                        const Eigen::VectorXd& c, Eigen::MatrixXd& out) {
  check_shapes(W, Phi);
  if (c.size() != W.rows()) throw ShapeError("kernels: coefficient vector length differs from n");
  const std::ptrdiff_t n = W.rows();
  const std::ptrdiff_t bs = block_size(n);
  const std::ptrdiff_t nb = (n + bs - 1) / bs;
  std::vector<Eigen::MatrixXd> partial(nb);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::ptrdiff_t r0 = b * bs;
    const std::ptrdiff_t len = std::min(bs, n - r0);
    partial[b].noalias() = W.middleRows(r0, len).transpose() *
                           (c.segment(r0, len).asDiagonal() * Phi.middleRows(r0, len));
  }
  out = Eigen::MatrixXd::Zero(W.cols(), Phi.cols());
  for (std::ptrdiff_t b = 0; b < nb; ++b) out += partial[b];
}

namespace reference {

void design_apply(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& A,
                  Eigen::VectorXd& out) {
  check_shapes(W, Phi);
  const std::ptrdiff_t n = W.rows(), p = W.cols(), l = Phi.cols();
  out.resize(n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t a = 0; a < p; ++a)
      for (std::ptrdiff_t j = 0; j < l; ++j) acc += W(i, a) * A(a, j) * Phi(i, j);
    out[i] = acc;
  }
}

void weighted_outer_sum(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Phi,
                        const Eigen::VectorXd& c, Eigen::MatrixXd& out) {
  check_shapes(W, Phi);
  const std::ptrdiff_t n = W.rows(), p = W.cols(), l = Phi.cols();
  out = Eigen::MatrixXd::Zero(p, l);
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t a = 0; a < p; ++a)
      for (std::ptrdiff_t j = 0; j < l; ++j) out(a, j) += c[i] * W(i, a) * Phi(i, j);
}

}  // namespace reference

}  // namespace vcm::kernels
