#include "vcm/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "vcm/errors.hpp"
#include "vcm/kernels.hpp"

namespace vcm {

namespace {

constexpr double kNormSlack = 1e-12;

double parse_field(const std::string& field, const std::string& origin, size_t line, int column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) --last;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ValidationError(origin + ":" + std::to_string(line) + ": field " +
                          std::to_string(column + 1) + " is not a number: '" + field + "'");
  return v;
}

void format_number(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

Eigen::VectorXd normalize_covariate(const Eigen::VectorXd& w) {
  const double norm = w.norm();
  return norm > 1.0 ? Eigen::VectorXd(w / norm) : w;
}

Dataset::Dataset(const std::vector<Observation>& observations)
    : cache_(std::make_shared<Cache>()) {
  if (observations.empty()) throw ValidationError("dataset: needs at least one observation");
  const int p = static_cast<int>(observations.front().w.size());
  const int n = static_cast<int>(observations.size());
  auto data = std::make_shared<Data>();
  data->W.resize(n, p);
  data->t.resize(n);
  data->y.resize(n);
  for (int i = 0; i < n; ++i) {
    if (observations[i].w.size() != p)
      throw ShapeError("dataset: observation " + std::to_string(i) + " has mismatched dimension");
    data->W.row(i) = observations[i].w;
    data->t[i] = observations[i].t;
    data->y[i] = observations[i].y;
  }
  data_ = std::move(data);
  validate();
}

Dataset::Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd times, Eigen::VectorXd responses)
    : cache_(std::make_shared<Cache>()) {
  auto data = std::make_shared<Data>();
  data->W = std::move(covariates);
  data->t = std::move(times);
  data->y = std::move(responses);
  if (data->W.rows() != data->t.size() || data->t.size() != data->y.size())
    throw ShapeError("dataset: covariate, time and response counts differ");
  if (data->t.size() == 0) throw ValidationError("dataset: needs at least one observation");
  data_ = std::move(data);
  validate();
}

void Dataset::validate() const {
  for (int i = 0; i < n(); ++i) {
    const double norm = data_->W.row(i).norm();
    if (norm > 1.0 + kNormSlack)
      throw ValidationError("dataset: ||w||_2 = " + std::to_string(norm) + " > 1 at observation " +
                            std::to_string(i) + "; use normalize_covariate first");
    if (!(data_->t[i] >= 0.0 && data_->t[i] <= 1.0))
      throw DomainError("dataset: t outside [0,1] at observation " + std::to_string(i));
    if (!std::isfinite(data_->y[i]))
      throw ValidationError("dataset: non-finite response at observation " + std::to_string(i));
  }
}

Observation Dataset::observation(int i) const {
  if (i < 0 || i >= n()) throw DomainError("dataset: observation index out of range");
  return Observation{data_->W.row(i).transpose(), data_->t[i], data_->y[i]};
}

std::shared_ptr<const Eigen::MatrixXd> Dataset::basis_values(const Dictionary& dict) const {
  {
    std::shared_lock lock(cache_->mutex);
    const auto it = cache_->by_dict.find(dict.id());
    if (it != cache_->by_dict.end()) return it->second;
  }
  auto values = std::make_shared<Eigen::MatrixXd>(n(), dict.l());
  Eigen::MatrixXd& m = *values;
  const int rows = n();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    Eigen::VectorXd row(dict.l());
    dict.eval_into(data_->t[i], row.data());
    m.row(i) = row;
  }
  std::unique_lock lock(cache_->mutex);
  auto [it, inserted] = cache_->by_dict.try_emplace(dict.id(), values);
  return it->second;
}

void Dataset::to_csv(std::ostream& os) const {
  os << "t,y";
  for (int j = 1; j <= p(); ++j) os << ",w_" << j;
  os << "\n";
  for (int i = 0; i < n(); ++i) {
    format_number(os, data_->t[i]);
    os << ',';
    format_number(os, data_->y[i]);
    for (int j = 0; j < p(); ++j) {
      os << ',';
      format_number(os, data_->W(i, j));
    }
    os << "\n";
  }
}

Dataset Dataset::from_csv(std::istream& is, const std::string& origin) {
  std::string line;
  size_t lineno = 0;
  if (!std::getline(is, line)) throw ValidationError(origin + ":1: empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  if (header.size() < 3 || header[0] != "t" || header[1] != "y")
    throw ValidationError(origin + ":1: expected header t,y,w_1,...,w_p");
  const int p = static_cast<int>(header.size()) - 2;
  for (int j = 0; j < p; ++j)
    if (header[2 + j] != "w_" + std::to_string(j + 1))
      throw ValidationError(origin + ":1: covariate columns must be named w_1..w_p");

  std::vector<double> ts, ys, ws;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != header.size())
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    ts.push_back(parse_field(fields[0], origin, lineno, 0));
    ys.push_back(parse_field(fields[1], origin, lineno, 1));
    for (int j = 0; j < p; ++j) ws.push_back(parse_field(fields[2 + j], origin, lineno, 2 + j));
  }
  const int n = static_cast<int>(ts.size());
  if (n == 0) throw ValidationError(origin + ": no observations");
  Eigen::MatrixXd W(n, p);
  Eigen::VectorXd t(n), y(n);
  for (int i = 0; i < n; ++i) {
    t[i] = ts[i];
    y[i] = ys[i];
    for (int j = 0; j < p; ++j) W(i, j) = ws[size_t(i) * p + j];
  }
  return Dataset(std::move(W), std::move(t), std::move(y));
}

VCFunction::VCFunction(CoordinateMatrix c, Dictionary d) : coeffs(std::move(c)), dict(std::move(d)) {
  if (coeffs.cols() != dict.l())
    throw ShapeError("vc function: coefficient columns must equal the dictionary size");
}

Eigen::VectorXd VCFunction::operator()(double t) const { return coeffs * dict.eval(t); }

double design_inner(const CoordinateMatrix& a, const Observation& obs, const Dictionary& dict) {
  if (a.rows() != obs.w.size() || a.cols() != dict.l())
    throw ShapeError("design_inner: dimensions do not agree");
  return obs.w.dot(a * dict.eval(obs.t));
}

Eigen::VectorXd predict(const VCFunction& f, double t) { return f(t); }

Eigen::VectorXd residuals(const CoordinateMatrix& a, const Dataset& data, const Dictionary& dict) {
  if (a.rows() != data.p() || a.cols() != dict.l())
    throw ShapeError("residuals: coordinate matrix dimensions do not match the data");
  const auto phi = data.basis_values(dict);
  Eigen::VectorXd fitted;
  kernels::design_apply(data.covariates(), *phi, a, fitted);
  return data.responses() - fitted;
}

}  // namespace vcm
