#include <benchmark/benchmark.h>

#include "mrenet/elasticnet.hpp"
#include "mrenet/gps_ingest.hpp"
#include "mrenet/multires.hpp"
#include "mrenet/profile.hpp"
#include "mrenet/random.hpp"

using namespace mrenet;

namespace {

// Correlated design shaped like a study table: a few scalars plus many
// overlapping interval-time columns.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> design(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    double carry = rng.normal();
    for (Eigen::Index j = 0; j < p; ++j) {
      carry = 0.8 * carry + 0.6 * rng.normal();
      X(i, j) = carry;
    }
  }
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = X(i, 0) - 0.5 * X(i, p / 2) + 0.1 * rng.normal();
  return {X, y};
}

void BM_SolveFraction(benchmark::State& state) {
  const auto [X, y] = design(114, state.range(0), 1);
  const ElasticNetProblem problem(X, y);
  for (auto _ : state) benchmark::DoNotOptimize(solve(problem, 0.1, 0.5));
}
BENCHMARK(BM_SolveFraction)->Arg(15)->Arg(60)->Arg(135);

void BM_SolutionPath(benchmark::State& state) {
  const auto [X, y] = design(114, state.range(0), 2);
  const ElasticNetProblem problem(X, y);
  const auto fractions = TuningGrid::defaults().fractions;
  for (auto _ : state) benchmark::DoNotOptimize(solution_path(problem, 0.1, fractions));
}
BENCHMARK(BM_SolutionPath)->Arg(15)->Arg(60)->Arg(135);

void BM_ObservedProfile(benchmark::State& state) {
  Rng rng(3);
  Session s;
  s.offsets = {0.0};
  s.speeds = {0.0};
  for (long j = 0; j < state.range(0); ++j) {
    s.offsets.push_back(s.offsets.back() + 1.0);
    s.speeds.push_back(rng.uniform(0.0, 8.0));
  }
  std::vector<int> res;
  for (int G = 5; G <= 125; G += 5) res.push_back(G);
  const auto grid = SpeedGrid::for_resolutions(res);
  for (auto _ : state) benchmark::DoNotOptimize(observed_profile(s, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ObservedProfile)->Arg(3600)->Arg(14400);

void BM_ComputeSpeedProfile(benchmark::State& state) {
  Rng rng(4);
  Session s;
  s.offsets = {0.0};
  s.distances = {0.0};
  for (long j = 0; j < state.range(0); ++j) {
    s.offsets.push_back(s.offsets.back() + static_cast<double>(rng.integer(1, 30)));
    s.distances.push_back(s.distances.back() + rng.uniform(0.0, 50.0));
  }
  for (auto _ : state) benchmark::DoNotOptimize(compute_speed_profile(s, 10.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeSpeedProfile)->Arg(3600);

}  // namespace

BENCHMARK_MAIN();
