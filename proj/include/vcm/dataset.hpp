#pragma once

#include <iosfwd>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "vcm/dictionary.hpp"

namespace vcm {

/// One draw (W, t, Y) from the varying coefficient model Y = W'f(t) + sigma*xi.
/// Covariates must satisfy ||w||_2 <= 1 (enforced, not silently rescaled).
struct Observation {
  Eigen::VectorXd w;
  double t = 0.0;
  double y = 0.0;
};

/// Scales a covariate onto the unit ball when needed; the explicit
/// counterpart of the rejection performed by Dataset construction.
Eigen::VectorXd normalize_covariate(const Eigen::VectorXd& w);

/// p x l matrix of expansion coefficients of the p coefficient functions.
using CoordinateMatrix = Eigen::MatrixXd;

/// Immutable sample of n observations stored column-batched for the kernels.
/// Basis evaluations at the observed t_i are cached per dictionary identity;
/// the cache is internally synchronized and shared across copies.
class Dataset {
 public:
  explicit Dataset(const std::vector<Observation>& observations);
  Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd times, Eigen::VectorXd responses);

  int n() const { return static_cast<int>(data_->t.size()); }
  int p() const { return static_cast<int>(data_->W.cols()); }

  const Eigen::MatrixXd& covariates() const { return data_->W; }  // n x p
  const Eigen::VectorXd& times() const { return data_->t; }
  const Eigen::VectorXd& responses() const { return data_->y; }
  Observation observation(int i) const;

  /// n x l matrix of basis values phi(t_i), computed once per dictionary.
  std::shared_ptr<const Eigen::MatrixXd> basis_values(const Dictionary& dict) const;

  void to_csv(std::ostream& os) const;
  static Dataset from_csv(std::istream& is, const std::string& origin = "<stream>");

 private:
  struct Data {
    Eigen::MatrixXd W;
    Eigen::VectorXd t, y;
  };
  struct Cache {
    std::shared_mutex mutex;
    std::unordered_map<uint64_t, std::shared_ptr<const Eigen::MatrixXd>> by_dict;
  };
  void validate() const;
  std::shared_ptr<const Data> data_;
  std::shared_ptr<Cache> cache_;
};

/// A fitted (or true) vector function f(t) = A * phi(t).
struct VCFunction {
  CoordinateMatrix coeffs;
  Dictionary dict;

  VCFunction(CoordinateMatrix c, Dictionary d);
  Eigen::VectorXd operator()(double t) const;
  int p() const { return static_cast<int>(coeffs.rows()); }
};

/// <X_i, A> = w' A phi(t), computed without materializing the rank-one
/// design matrix X = w phi(t)'.
double design_inner(const CoordinateMatrix& a, const Observation& obs, const Dictionary& dict);

/// f_hat(t) = A phi(t).
Eigen::VectorXd predict(const VCFunction& f, double t);

/// Per-observation residuals y_i - <X_i, A>.
Eigen::VectorXd residuals(const CoordinateMatrix& a, const Dataset& data, const Dictionary& dict);

}  // namespace vcm
