#include <benchmark/benchmark.h>

#include "eqmag/adaptivity.hpp"
#include "eqmag/meshgen.hpp"
#include "eqmag/parallel.hpp"

using namespace eqmag;

namespace {

const AnalyticCase& cube_case() {
  static const AnalyticCase c = analytic_case("cube");
  return c;
}

void BM_Assemble(benchmark::State& state) {
  set_num_threads(1);
  const TetMesh mesh = cube_mesh(static_cast<int>(state.range(0)));
  const int p = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_mixed_system(mesh, p, cube_case().J));
  state.counters["tets"] = mesh.num_tets();
}
BENCHMARK(BM_Assemble)->Args({4, 0})->Args({8, 0})->Args({4, 1})->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
  set_num_threads(1);
  const TetMesh mesh = cube_mesh(static_cast<int>(state.range(0)));
  const int p = static_cast<int>(state.range(1));
  int dofs = 0;
  for (auto _ : state) {
    const MixedSolution sol = solve_mixed(mesh, p, cube_case().J);
    dofs = sol.num_dofs();
    benchmark::DoNotOptimize(sol.H.values.data());
  }
  state.counters["dofs"] = dofs;
}
BENCHMARK(BM_Solve)->Args({4, 0})->Args({6, 0})->Args({3, 1})->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  set_num_threads(1);
  const TetMesh mesh = cube_mesh(static_cast<int>(state.range(0)));
  const int p = static_cast<int>(state.range(1));
  const MixedSolution sol = solve_mixed(mesh, p, cube_case().J);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(mesh, sol.H).estimator);
  state.counters["patches"] = mesh.num_vertices();
}
BENCHMARK(BM_Reconstruct)->Args({3, 0})->Args({4, 0})->Args({3, 1})->Unit(benchmark::kMillisecond);

void BM_PatchSolve(benchmark::State& state) {
  const TetMesh mesh = cube_mesh(3);
  const int p = static_cast<int>(state.range(0));
  const MixedSolution sol = solve_mixed(mesh, p, cube_case().J);
  int interior = 0;
  while (mesh.vertex_on(interior, BoundaryKind::GammaT)) ++interior;
  const PatchProblem pb = build_patch_problem(mesh, sol.H, interior, p + 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_patch(pb).objective);
  state.counters["unknowns"] = pb.num_dofs() + pb.num_multipliers;
}
BENCHMARK(BM_PatchSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_Refine(benchmark::State& state) {
  const TetMesh mesh = lbrick_mesh(static_cast<int>(state.range(0)));
  std::vector<int> marked;
  for (int k = 0; k < mesh.num_tets(); k += 10) marked.push_back(k);
  for (auto _ : state) benchmark::DoNotOptimize(refine(mesh, marked).mesh.num_tets());
  state.counters["tets"] = mesh.num_tets();
}
BENCHMARK(BM_Refine)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Mark(benchmark::State& state) {
  std::vector<double> eta(state.range(0));
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = 1.0 / (1.0 + static_cast<double>((i * 7919) % 1000));
  for (auto _ : state) benchmark::DoNotOptimize(doerfler_mark(eta, 0.5).marked.size());
}
BENCHMARK(BM_Mark)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
