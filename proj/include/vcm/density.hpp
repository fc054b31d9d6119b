#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vcm/quadrature.hpp"

namespace vcm {

enum class MeasureKind { Lebesgue, Weighted };

/// Library-wide default quadrature resolution (overridable by the CLI via
/// the VCM_QUAD_NODES environment variable).
int default_quad_nodes();
void set_default_quad_nodes(int nodes);

/// A probability measure on (0,1): either Lebesgue or dmu = g(t) dt with a
/// density bounded away from zero and infinity, g1 <= g <= g2. Weighted
/// densities may come from a callable or from a table of (t, g(t)) pairs
/// interpolated linearly. Immutable after construction.
class DensityMeasure {
 public:
  static DensityMeasure lebesgue(int quad_nodes = 0);
  static DensityMeasure weighted(std::function<double(double)> g, double g1, double g2,
                                 int quad_nodes = 0);
  static DensityMeasure from_table(std::vector<std::array<double, 2>> table, int quad_nodes = 0);

  MeasureKind kind() const;
  /// Density value; identically 1 for the Lebesgue measure.
  double g(double t) const;
  double g1() const;
  double g2() const;
  int quad_nodes() const;

  bool operator==(const DensityMeasure& other) const { return impl_ == other.impl_; }

  /// True when the two measures describe the same distribution (kinds match
  /// and weighted densities agree pointwise on a probe grid).
  bool same_distribution(const DensityMeasure& other) const;

  nlohmann::json to_json() const;
  static DensityMeasure from_json(const nlohmann::json& j);

 private:
  struct Impl;
  explicit DensityMeasure(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace vcm
