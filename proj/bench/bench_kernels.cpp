#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "eyeid/kernels.hpp"

using namespace eyeid;

namespace {

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = d(rng);
  return m;
}

template <auto Kernel>
void sg(benchmark::State& state) {
  const auto in = noise(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(in.size());
  const auto plan = SavitzkyGolayPlan::make(6, 15);
  for (auto _ : state) {
    Kernel(in, plan, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void rbf(benchmark::State& state) {
  const auto pts = random_matrix(static_cast<int>(state.range(0)), 51, 2);
  const auto ctr = random_matrix(80, 51, 3);
  const std::vector<double> widths(80, 1.5);
  Eigen::MatrixXd out;
  for (auto _ : state) {
    Kernel(pts, ctr, widths, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void nearest(benchmark::State& state) {
  const auto pts = random_matrix(static_cast<int>(state.range(0)), 51, 4);
  const auto ctr = random_matrix(80, 51, 5);
  std::vector<int> idx(pts.rows());
  std::vector<double> d2(pts.rows());
  for (auto _ : state) {
    Kernel(pts, ctr, idx, d2);
    benchmark::DoNotOptimize(idx.data());
  }
}

}  // namespace

BENCHMARK(sg<kernels::serial::savitzky_golay>)->Name("sg/serial")->Arg(15000)->Arg(240000);
BENCHMARK(sg<kernels::omp::savitzky_golay>)->Name("sg/omp")->Arg(15000)->Arg(240000);
BENCHMARK(rbf<kernels::serial::rbf_activations>)->Name("rbf/serial")->Arg(2000)->Arg(20000);
BENCHMARK(rbf<kernels::omp::rbf_activations>)->Name("rbf/omp")->Arg(2000)->Arg(20000);
BENCHMARK(nearest<kernels::serial::nearest_centers>)->Name("nearest/serial")->Arg(2000)->Arg(20000);
BENCHMARK(nearest<kernels::omp::nearest_centers>)->Name("nearest/omp")->Arg(2000)->Arg(20000);

BENCHMARK_MAIN();
