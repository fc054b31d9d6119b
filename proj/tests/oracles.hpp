#pragma once

// Independent reference implementations used only to check the library.
// These deliberately avoid the code paths under test: the SVD here is a
// hand-rolled one-sided Jacobi, matrix operators are materialized densely,
// and sums run as plain loops.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "vcm/dataset.hpp"
#include "vcm/dictionary.hpp"

namespace oracles {

/// One-sided Jacobi SVD (Hestenes): A = U diag(s) V'. Columns of U with a
/// zero singular value are left zero; products U diag(g(s)) V' with g(0)=0
/// are still exact.
inline void jacobi_svd(Eigen::MatrixXd a, Eigen::MatrixXd& u, Eigen::VectorXd& s,
                       Eigen::MatrixXd& v) {
  bool transposed = false;
  if (a.rows() < a.cols()) {
    a.transposeInPlace();
    transposed = true;
  }
  const int n = int(a.cols());
  Eigen::MatrixXd vv = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double aii = a.col(i).squaredNorm();
        const double ajj = a.col(j).squaredNorm();
        const double aij = a.col(i).dot(a.col(j));
        if (aii * ajj > 0.0) off = std::max(off, std::abs(aij) / std::sqrt(aii * ajj));
        if (std::abs(aij) <= 1e-30 + 1e-16 * std::sqrt(aii * ajj)) continue;
        const double theta = 0.5 * std::atan2(2.0 * aij, aii - ajj);
        const double c = std::cos(theta), sn = std::sin(theta);
        for (int r = 0; r < a.rows(); ++r) {
          const double x = a(r, i), y = a(r, j);
          a(r, i) = c * x + sn * y;
          a(r, j) = -sn * x + c * y;
        }
        for (int r = 0; r < n; ++r) {
          const double x = vv(r, i), y = vv(r, j);
          vv(r, i) = c * x + sn * y;
          vv(r, j) = -sn * x + c * y;
        }
      }
    }
    if (off < 1e-15) break;
  }
  Eigen::VectorXd norms(n);
  for (int j = 0; j < n; ++j) norms[j] = a.col(j).norm();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return norms[i] > norms[j]; });
  Eigen::MatrixXd uu = Eigen::MatrixXd::Zero(a.rows(), n);
  s.resize(n);
  Eigen::MatrixXd vperm(n, n);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    s[j] = norms[src];
    if (norms[src] > 0.0) uu.col(j) = a.col(src) / norms[src];
    vperm.col(j) = vv.col(src);
  }
  if (transposed) {
    u = vperm;
    v = uu;
  } else {
    u = uu;
    v = vperm;
  }
}

/// Soft-thresholded reconstruction via the Jacobi SVD above.
inline Eigen::MatrixXd svt(const Eigen::MatrixXd& z, double tau) {
  Eigen::MatrixXd u, v;
  Eigen::VectorXd s;
  jacobi_svd(z, u, s, v);
  for (int i = 0; i < s.size(); ++i) s[i] = std::max(s[i] - tau, 0.0);
  return u * s.asDiagonal() * v.transpose();
}

inline double nuclear_norm(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd u, v;
  Eigen::VectorXd s;
  jacobi_svd(z, u, s, v);
  return s.sum();
}

/// (1/n) sum (y_i - <X_i,A>)^2 by an explicit per-observation loop.
inline double smooth_objective(const Eigen::MatrixXd& a, const vcm::Dataset& data,
                               const vcm::Dictionary& dict) {
  double acc = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const auto obs = data.observation(i);
    const Eigen::VectorXd phi = dict.eval(obs.t);
    const double r = obs.y - obs.w.dot(a * phi);
    acc += r * r;
  }
  return acc / data.n();
}

/// Central finite differences of the smooth objective part.
inline Eigen::MatrixXd fd_gradient(const Eigen::MatrixXd& a, const vcm::Dataset& data,
                                   const vcm::Dictionary& dict) {
  Eigen::MatrixXd g(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double h = 1e-6 * (1.0 + std::abs(a(i, j)));
      Eigen::MatrixXd ap = a, am = a;
      ap(i, j) += h;
      am(i, j) -= h;
      g(i, j) = (smooth_objective(ap, data, dict) - smooth_objective(am, data, dict)) / (2.0 * h);
    }
  }
  return g;
}

/// Dense normal operator N = (2/n) sum vec(X_i) vec(X_i)' (column-major vec)
/// and right-hand side (2/n) sum y_i vec(X_i). Small p*l only.
struct DenseNormal {
  Eigen::MatrixXd n_mat;
  Eigen::VectorXd rhs;
};

inline DenseNormal dense_normal_operator(const vcm::Dataset& data, const vcm::Dictionary& dict) {
  const int p = data.p(), l = dict.l();
  DenseNormal out;
  out.n_mat = Eigen::MatrixXd::Zero(p * l, p * l);
  out.rhs = Eigen::VectorXd::Zero(p * l);
  for (int i = 0; i < data.n(); ++i) {
    const auto obs = data.observation(i);
    const Eigen::VectorXd phi = dict.eval(obs.t);
    const Eigen::MatrixXd x = obs.w * phi.transpose();
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), p * l);
    out.n_mat.noalias() += (2.0 / data.n()) * xv * xv.transpose();
    out.rhs.noalias() += (2.0 / data.n()) * obs.y * xv;
  }
  return out;
}

/// Reference quadrature: 4096-node composite Gauss-Legendre on [0,1].
template <class F>
double integrate_4096(F&& f) {
  const auto quad = vcm::Quadrature::composite(4096, 16);
  double acc = 0.0;
  for (int q = 0; q < quad.size(); ++q) acc += quad.weights[q] * f(quad.nodes[q]);
  return acc;
}

}  // namespace oracles
