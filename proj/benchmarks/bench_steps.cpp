#include <benchmark/benchmark.h>

#include <problems.hpp>

#include <odekit/odekit.hpp>

using namespace odekit;

namespace {

StepperState start(const cli::ProblemInstance& pi) {
  StepperState s;
  s.t = 0.0;
  s.u = pi.u0;
  return s;
}

}  // namespace

static void ErkStepKinetics(benchmark::State& state) {
  const auto pi = cli::build_problem("kinetics");
  const auto& tab = std::get<ButcherTableau>(registry_get("dp5"));
  const StepperState s = start(pi);
  for (auto _ : state) benchmark::DoNotOptimize(erk_step(pi.problem, tab, s, 0.01));
}
BENCHMARK(ErkStepKinetics);

static void RoswStepOrego(benchmark::State& state) {
  const auto pi = cli::build_problem("orego");
  const auto& tab = std::get<RosTableau>(registry_get("ra34pw2"));
  const StepperState s = start(pi);
  for (auto _ : state) benchmark::DoNotOptimize(rosw_step(pi.problem, tab, s, 0.1));
}
BENCHMARK(RoswStepOrego);

static void ImexStepGrayScott(benchmark::State& state) {
  const auto pi = cli::build_problem("grayscott", {{"N", static_cast<double>(state.range(0))}});
  const auto& tab = std::get<IMEXTableau>(registry_get("ark3"));
  const StepperState s = start(pi);
  for (auto _ : state) benchmark::DoNotOptimize(ark_imex_step(pi.problem, tab, s, 1.0, true));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(ImexStepGrayScott)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void SolveKineticsListing(benchmark::State& state) {
  const auto pi = cli::build_problem("kinetics");
  const Scheme sc = parse_scheme("rosw:ra34pw2");
  for (auto _ : state)
    benchmark::DoNotOptimize(solve(pi.problem, pi.u0, sc, pi.defaults, pi.tolerances, AdaptConfig{}));
}
BENCHMARK(SolveKineticsListing)->Unit(benchmark::kMicrosecond);

static void AdjointKinetics(benchmark::State& state) {
  const auto pi = cli::build_problem("kinetics");
  const Scheme sc = parse_scheme("theta:1");
  SolveOptions o;
  o.dt0 = 0.01;
  o.max_time = 1.0;
  o.final_time_policy = FinalTimePolicy::MatchStep;
  const auto checkpoints = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    Trajectory traj(checkpoints ? TrajectoryPolicy::Binomial : TrajectoryPolicy::StoreAll, checkpoints);
    record_forward(pi.problem, pi.u0, sc, o, traj);
    AdjointState term;
    term.lambda = {Vector::Unit(3, 2)};
    benchmark::DoNotOptimize(adjoint_solve(pi.problem, sc, traj, term));
  }
}
BENCHMARK(AdjointKinetics)->Arg(0)->Arg(10)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
