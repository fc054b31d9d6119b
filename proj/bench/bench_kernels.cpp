// Timing comparison of the OpenMP-blocked kernels against the serial
// reference loops, plus an end-to-end solve. Build and run:
//   cmake --build build --target vcm_bench && ./build/bench/vcm_bench

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "vcm/kernels.hpp"
#include "vcm/rng.hpp"
#include "vcm/scenario.hpp"
#include "vcm/solver.hpp"

using namespace vcm;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void bench_case(long n, int p, int l) {
  rng::Substream st(7, rng::StreamTag::Generic, 0);
  Eigen::MatrixXd W(n, p), Phi(n, l), A(p, l);
  Eigen::VectorXd c(n);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) W(i, j) = st.gaussian();
    for (int j = 0; j < l; ++j) Phi(i, j) = st.gaussian();
    c[i] = st.gaussian();
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < l; ++j) A(i, j) = st.gaussian();

  Eigen::VectorXd out_v;
  Eigen::MatrixXd out_m;
  const double apply_par = time_best_of(5, [&] { kernels::design_apply(W, Phi, A, out_v); });
  const double apply_ref =
      time_best_of(3, [&] { kernels::reference::design_apply(W, Phi, A, out_v); });
  const double sum_par = time_best_of(5, [&] { kernels::weighted_outer_sum(W, Phi, c, out_m); });
  const double sum_ref =
      time_best_of(3, [&] { kernels::reference::weighted_outer_sum(W, Phi, c, out_m); });

  std::printf("n=%-8ld p=%-3d l=%-3d | design_apply %8.3f ms (ref %8.3f ms, x%.1f) | "
              "outer_sum %8.3f ms (ref %8.3f ms, x%.1f)\n",
              n, p, l, 1e3 * apply_par, 1e3 * apply_ref, apply_ref / apply_par, 1e3 * sum_par,
              1e3 * sum_ref, sum_ref / sum_par);
}

void bench_solve(long n) {
  Scenario sc;
  sc.p = 10;
  sc.s = 2;
  sc.coeff = CoeffSpec::trig(3);
  sc.sigma = 0.5;
  sc.seed = 99;
  const auto dict = Dictionary::fourier(8);
  const Dataset data = sample_dataset(sc, n);
  SolverConfig cfg;
  cfg.lambda = 0.05;
  int iters = 0;
  const double secs = time_best_of(3, [&] {
    auto [a, rep] = solve(data, dict, cfg);
    iters = rep.iterations;
  });
  std::printf("solve        n=%-8ld p=10  l=8   | %8.3f ms  (%d iterations)\n", n, 1e3 * secs,
              iters);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  bench_case(200000, 10, 8);
  bench_case(200000, 40, 30);
  bench_case(1000000, 10, 8);
  bench_solve(20000);
  bench_solve(200000);
  return 0;
}
