#include "vcm/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vcm/errors.hpp"

namespace vcm::io {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("io: cannot open " + tmp.string() + " for writing");
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw ValidationError("io: short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("io: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports a byte offset; surface the file for the CLI message.
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out += buf;
      out += (j + 1 < m.cols()) ? ',' : '\n';
    }
  }
  return out;
}

Eigen::MatrixXd matrix_from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("io: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc{})
        throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                              ": not a number: '" + field + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    data.push_back(std::move(row));
  }
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (Eigen::Index(data.size()) != rows)
    throw ValidationError("io: matrix json row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (Eigen::Index(data[size_t(i)].size()) != cols)
      throw ValidationError("io: matrix json column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[size_t(i)][size_t(c)].get<double>();
  }
  return m;
}

}  // namespace vcm::io
