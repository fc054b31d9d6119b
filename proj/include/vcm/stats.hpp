#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vcm/errors.hpp"

namespace vcm {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  bool degenerate = false;  // zero variance in x or fewer than 2 points
};

/// Ordinary least squares y = intercept + slope * x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("fit_line: x and y lengths differ");
  LineFit fit;
  const size_t k = x.size();
  if (k < 2) {
    fit.degenerate = true;
    return fit;
  }
  const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < k; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx <= 0.0) {
    fit.degenerate = true;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  if (k > 2) {
    double rss = 0.0;
    for (size_t i = 0; i < k; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / double(k - 2) / sxx);
  }
  return fit;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median: empty sample");
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
  return 0.5 * (hi + v[mid - 1]);
}

/// Ranks with midpoint tie handling.
inline std::vector<double> ranks(const std::vector<double>& v) {
  const size_t k = v.size();
  std::vector<size_t> idx(k);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> r(k);
  size_t i = 0;
  while (i < k) {
    size_t j = i;
    while (j + 1 < k && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (double(i) + double(j)) + 1.0;
    for (size_t q = i; q <= j; ++q) r[idx[q]] = avg;
    i = j + 1;
  }
  return r;
}

/// Spearman rank correlation.
inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ShapeError("spearman_rho: bad sample sizes");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const size_t k = x.size();
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / k;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / k;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < k; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace vcm
