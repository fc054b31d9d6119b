#include "vcm/density.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include <nlohmann/json.hpp>

#include "vcm/errors.hpp"

namespace vcm {

namespace {
std::atomic<int> g_default_quad_nodes{1024};

constexpr double kNormTol = 1e-6;  // |integral of g - 1| allowed
}  // namespace

int default_quad_nodes() { return g_default_quad_nodes.load(); }

void set_default_quad_nodes(int nodes) {
  if (nodes < 16) throw ValidationError("quadrature: need at least 16 nodes");
  g_default_quad_nodes.store(nodes);
}

struct DensityMeasure::Impl {
  MeasureKind kind = MeasureKind::Lebesgue;
  std::function<double(double)> g;
  double g1 = 1.0, g2 = 1.0;
  int quad_nodes = 1024;
  std::vector<std::array<double, 2>> table;  // empty unless built from a table
};

DensityMeasure DensityMeasure::lebesgue(int quad_nodes) {
  auto impl = std::make_shared<Impl>();
  impl->quad_nodes = quad_nodes > 0 ? quad_nodes : default_quad_nodes();
  return DensityMeasure(std::move(impl));
}

DensityMeasure DensityMeasure::weighted(std::function<double(double)> g, double g1, double g2,
                                        int quad_nodes) {
  if (!(g1 > 0.0) || !(g2 > g1) || !std::isfinite(g2))
    throw MeasureError("density: bounds must satisfy 0 < g1 < g2 < inf");
  auto impl = std::make_shared<Impl>();
  impl->kind = MeasureKind::Weighted;
  impl->g = std::move(g);
  impl->g1 = g1;
  impl->g2 = g2;
  impl->quad_nodes = quad_nodes > 0 ? quad_nodes : default_quad_nodes();

  const Quadrature quad = Quadrature::composite(impl->quad_nodes);
  double mass = 0.0;
  for (int q = 0; q < quad.size(); ++q) {
    const double v = impl->g(quad.nodes[q]);
    if (!(v >= g1 - 1e-12) || !(v <= g2 + 1e-12))
      throw MeasureError("density: g violates its declared bounds at t=" +
                         std::to_string(quad.nodes[q]));
    mass += quad.weights[q] * v;
  }
  if (std::abs(mass - 1.0) > kNormTol)
    throw MeasureError("density: g integrates to " + std::to_string(mass) + ", expected 1");
  return DensityMeasure(std::move(impl));
}

DensityMeasure DensityMeasure::from_table(std::vector<std::array<double, 2>> table,
                                          int quad_nodes) {
  if (table.size() < 2) throw MeasureError("density: table needs at least two points");
  std::sort(table.begin(), table.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  double lo = table.front()[1], hi = table.front()[1];
  for (size_t i = 0; i < table.size(); ++i) {
    if (i > 0 && !(table[i][0] > table[i - 1][0]))
      throw MeasureError("density: table abscissae must be strictly increasing");
    if (!(table[i][1] > 0.0)) throw MeasureError("density: table values must be positive");
    lo = std::min(lo, table[i][1]);
    hi = std::max(hi, table[i][1]);
  }
  auto shared = std::make_shared<std::vector<std::array<double, 2>>>(table);
  auto g = [shared](double t) {
    const auto& tb = *shared;
    if (t <= tb.front()[0]) return tb.front()[1];
    if (t >= tb.back()[0]) return tb.back()[1];
    auto it = std::upper_bound(tb.begin(), tb.end(), t,
                               [](double v, const auto& e) { return v < e[0]; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double u = (t - a[0]) / (b[0] - a[0]);
    return a[1] + u * (b[1] - a[1]);
  };
  // Widen the declared bounds marginally: interpolation stays inside [lo, hi].
  DensityMeasure m = weighted(std::move(g), lo, hi * (1.0 + 1e-12) + 1e-300, quad_nodes);
  auto impl = std::make_shared<Impl>(*m.impl_);
  impl->table = std::move(table);
  return DensityMeasure(std::move(impl));
}

bool DensityMeasure::same_distribution(const DensityMeasure& other) const {
  if (impl_ == other.impl_) return true;
  if (impl_->kind != other.impl_->kind) return false;
  if (impl_->kind == MeasureKind::Lebesgue) return true;
  for (int k = 0; k <= 64; ++k) {
    const double t = double(k) / 64.0;
    const double a = impl_->g(t), b = other.impl_->g(t);
    if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a))) return false;
  }
  return true;
}

MeasureKind DensityMeasure::kind() const { return impl_->kind; }

double DensityMeasure::g(double t) const {
  return impl_->kind == MeasureKind::Lebesgue ? 1.0 : impl_->g(t);
}

double DensityMeasure::g1() const { return impl_->g1; }
double DensityMeasure::g2() const { return impl_->g2; }
int DensityMeasure::quad_nodes() const { return impl_->quad_nodes; }

nlohmann::json DensityMeasure::to_json() const {
  nlohmann::json j;
  j["quad_nodes"] = impl_->quad_nodes;
  if (impl_->kind == MeasureKind::Lebesgue) {
    j["kind"] = "lebesgue";
    return j;
  }
  j["kind"] = "weighted";
  nlohmann::json table = nlohmann::json::array();
  if (!impl_->table.empty()) {
    for (const auto& e : impl_->table) table.push_back({e[0], e[1]});
  } else {
    // Function-backed density: serialize a dense sample of g.
    const int m = 513;
    for (int i = 0; i < m; ++i) {
      const double t = double(i) / (m - 1);
      table.push_back({t, impl_->g(t)});
    }
  }
  j["g_table"] = std::move(table);
  return j;
}

DensityMeasure DensityMeasure::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int nodes = j.value("quad_nodes", 0);
  if (kind == "lebesgue") return lebesgue(nodes);
  if (kind != "weighted") throw ValidationError("density: unknown measure kind '" + kind + "'");
  std::vector<std::array<double, 2>> table;
  for (const auto& e : j.at("g_table")) {
    if (!e.is_array() || e.size() != 2)
      throw ValidationError("density: g_table entries must be [t, g] pairs");
    table.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return from_table(std::move(table), nodes);
}

}  // namespace vcm
