// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <Eigen/Geometry>

#include "nocspose/evalkit.hpp"
#include "nocspose/synth.hpp"

using namespace nocspose;

namespace {

TriangleMesh bench_mesh() {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kSphere;
  spec.dimensions = {0.5, 3.0};
  return make_primitive_scene(spec, 1);
}

void BM_SampleSurface(benchmark::State& state) {
  const TriangleMesh mesh = bench_mesh();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_surface(mesh, static_cast<int>(state.range(0)), 1));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SampleSurface)->Range(1000, 100000)->Complexity(benchmark::oN);

void BM_Icp(benchmark::State& state) {
  const TriangleMesh mesh = bench_mesh();
  const auto source = sample_surface(mesh, static_cast<int>(state.range(0)), 2);
  const auto target = sample_surface(mesh, static_cast<int>(state.range(0)), 3);
  SimilarityTransform init;
  init.rotation = Eigen::AngleAxisd(0.2, Eigen::Vector3d::UnitY())
                      .toRotationMatrix();
  for (auto _ : state) {
    benchmark::DoNotOptimize(icp(source, target, init));
  }
}
BENCHMARK(BM_Icp)->Arg(2000)->Arg(10000);

void BM_Fscore(benchmark::State& state) {
  const TriangleMesh mesh = bench_mesh();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fscore(mesh, mesh, 0.05, static_cast<int>(state.range(0)), 4));
  }
}
BENCHMARK(BM_Fscore)->Arg(20000)->Arg(100000);

}  // namespace
