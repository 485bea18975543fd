#include <benchmark/benchmark.h>

#include <odekit/linalg.hpp>

#include <random>

using namespace odekit;

namespace {

// Shifted 2-D Laplacian on an m x m periodic grid, the shape of an implicit diffusion stage.
Matrix laplacian_system(Eigen::Index m) {
  const Eigen::Index n = m * m;
  Matrix A = Matrix::Zero(n, n);
  auto id = [m](Eigen::Index i, Eigen::Index j) { return ((i + m) % m) * m + (j + m) % m; };
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto r = id(i, j);
      A(r, r) = 1.0 + 4.0;
      A(r, id(i + 1, j)) -= 1.0;
      A(r, id(i - 1, j)) -= 1.0;
      A(r, id(i, j + 1)) -= 1.0;
      A(r, id(i, j - 1)) -= 1.0;
    }
  return A;
}

}  // namespace

static void LuFactorDense(benchmark::State& state) {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Matrix A = Matrix::NullaryExpr(n, n, [&] { return nd(rng); });
  A.diagonal().array() += static_cast<double>(n);
  for (auto _ : state) benchmark::DoNotOptimize(lu_factor(A));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(LuFactorDense)->RangeMultiplier(2)->Range(4, 128)->Complexity(benchmark::oNCubed);

static void LuFactorSparseLaplacian(benchmark::State& state) {
  const Matrix A = laplacian_system(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lu_factor(A));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(LuFactorSparseLaplacian)->Arg(16)->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);

static void LuSolveSparseLaplacian(benchmark::State& state) {
  const Matrix A = laplacian_system(state.range(0));
  const LUFactorization f = lu_factor(A);
  const Vector b = Vector::Ones(A.rows());
  for (auto _ : state) benchmark::DoNotOptimize(lu_solve(f, b));
}
BENCHMARK(LuSolveSparseLaplacian)->Arg(16)->Arg(32)->Arg(48);

BENCHMARK_MAIN();
