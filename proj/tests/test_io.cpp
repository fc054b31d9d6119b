#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vcm/errors.hpp"
#include "vcm/io.hpp"

using namespace vcm;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "vcm_io_test";
  fs::create_directories(dir);
  return dir;
}
}  // namespace

TEST_CASE("write_atomic leaves no temporary behind and replaces content") {
  const auto dir = temp_dir();
  const auto path = dir / "out.txt";
  io::write_atomic(path, "first");
  CHECK(io::read_file(path) == "first");
  io::write_atomic(path, "second");
  CHECK(io::read_file(path) == "second");
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  fs::remove(path);
}

TEST_CASE("matrix csv and json round trips") {
  Eigen::MatrixXd m(2, 3);
  m << 1.5, -2.25, 3.0, 0.125, 1e-17, -4.5;
  const auto dir = temp_dir();
  const auto path = dir / "m.csv";
  io::write_atomic(path, io::matrix_to_csv(m));
  const Eigen::MatrixXd back = io::matrix_from_csv(path);
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
  fs::remove(path);

  const auto j = io::matrix_to_json(m);
  CHECK(j.at("rows") == 2);
  CHECK(j.at("cols") == 3);
  const Eigen::MatrixXd back2 = io::matrix_from_json(j);
  CHECK((back2 - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix csv parse errors carry the line number") {
  const auto dir = temp_dir();
  const auto path = dir / "bad.csv";
  io::write_atomic(path, "1.0,2.0\n3.0,oops\n");
  CHECK_THROWS_WITH_AS(io::matrix_from_csv(path), doctest::Contains(":2"), ValidationError);
  io::write_atomic(path, "1.0,2.0\n3.0\n");
  CHECK_THROWS_AS(io::matrix_from_csv(path), ValidationError);
  fs::remove(path);
}

TEST_CASE("read_json surfaces the file name on parse failures") {
  const auto dir = temp_dir();
  const auto path = dir / "broken.json";
  io::write_atomic(path, "{\"a\": ");
  CHECK_THROWS_WITH_AS(io::read_json(path), doctest::Contains("broken.json"), ValidationError);
  fs::remove(path);
}
