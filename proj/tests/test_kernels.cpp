#include <doctest.h>

#include <omp.h>

#include "vcm/kernels.hpp"
#include "vcm/rng.hpp"

using namespace vcm;

namespace {

struct Instance {
  Eigen::MatrixXd W, Phi, A;
  Eigen::VectorXd c;
};

Instance make_instance(int n, int p, int l, uint64_t seed) {
  rng::Substream st(seed, rng::StreamTag::Generic, 0);
  Instance in;
  in.W.resize(n, p);
  in.Phi.resize(n, l);
  in.A.resize(p, l);
  in.c.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) in.W(i, j) = st.gaussian();
    for (int j = 0; j < l; ++j) in.Phi(i, j) = st.gaussian();
    in.c[i] = st.gaussian();
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < l; ++j) in.A(i, j) = st.gaussian();
  return in;
}

}  // namespace

TEST_CASE("blocked kernels agree with the naive reference") {
  for (int n : {1, 7, 2048, 2049, 10000}) {
    const Instance in = make_instance(n, 4, 6, 17 + n);
    Eigen::VectorXd fast, slow;
    kernels::design_apply(in.W, in.Phi, in.A, fast);
    kernels::reference::design_apply(in.W, in.Phi, in.A, slow);
    CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + slow.cwiseAbs().maxCoeff()));

    Eigen::MatrixXd gfast, gslow;
    kernels::weighted_outer_sum(in.W, in.Phi, in.c, gfast);
    kernels::reference::weighted_outer_sum(in.W, in.Phi, in.c, gslow);
    CHECK((gfast - gslow).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + gslow.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("kernel results are bitwise identical across thread counts") {
  const Instance in = make_instance(30000, 5, 7, 99);
  const int saved = omp_get_max_threads();

  omp_set_num_threads(1);
  Eigen::VectorXd apply1;
  Eigen::MatrixXd sum1;
  kernels::design_apply(in.W, in.Phi, in.A, apply1);
  kernels::weighted_outer_sum(in.W, in.Phi, in.c, sum1);

  omp_set_num_threads(2);
  Eigen::VectorXd apply2;
  Eigen::MatrixXd sum2;
  kernels::design_apply(in.W, in.Phi, in.A, apply2);
  kernels::weighted_outer_sum(in.W, in.Phi, in.c, sum2);

  omp_set_num_threads(saved);

  REQUIRE(apply1.size() == apply2.size());
  CHECK((apply1 - apply2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sum1 - sum2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("block size never depends on the thread count") {
  CHECK(kernels::block_size(10) == 2048);
  CHECK(kernels::block_size(2048 * 64) == 2048);
  CHECK(kernels::block_size(1000000) > 2048);  // capped block count
  CHECK((1000000 + kernels::block_size(1000000) - 1) / kernels::block_size(1000000) <= 64);
}

TEST_CASE("kernels validate shapes") {
  const Instance in = make_instance(10, 3, 4, 5);
  Eigen::VectorXd out;
  Eigen::MatrixXd m;
  CHECK_THROWS(kernels::design_apply(in.W, in.Phi, Eigen::MatrixXd::Zero(2, 4), out));
  CHECK_THROWS(kernels::weighted_outer_sum(in.W, in.Phi, Eigen::VectorXd::Zero(9), m));
}
