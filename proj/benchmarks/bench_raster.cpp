// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "nocspose/raster.hpp"
#include "nocspose/synth.hpp"

using namespace nocspose;

namespace {

TriangleMesh nocs_mesh(PrimitiveKind kind) {
  SceneSpec spec;
  spec.kind = kind;
  TriangleMesh mesh = make_primitive_scene(spec, 1);
  normalize_to_nocs(mesh);
  return bake_nocs_frame(mesh);
}

PoseSE3 bench_pose() {
  SphericalPose sp;
  sp.elevation_deg = 20.0;
  sp.azimuth_deg = 40.0;
  sp.radius = 2.5;
  sp.target = nocs_cube_center();
  return sp.to_pose();
}

void BM_RasterizeSphere(benchmark::State& state) {
  const TriangleMesh mesh = nocs_mesh(PrimitiveKind::kSphere);
  const int res = static_cast<int>(state.range(0));
  const int ss = static_cast<int>(state.range(1));
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, res, res);
  const PoseSE3 pose = bench_pose();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize(mesh, pose, k, ss));
  }
}
BENCHMARK(BM_RasterizeSphere)
    ->Args({128, 1})
    ->Args({128, 4})
    ->Args({256, 4})
    ->Args({512, 4});

void BM_RenderNocsView(benchmark::State& state) {
  const TriangleMesh mesh = nocs_mesh(PrimitiveKind::kCompositeMarker);
  const int res = static_cast<int>(state.range(0));
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, res, res);
  const PoseSE3 pose = bench_pose();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_nocs_view(mesh, pose, k));
  }
}
BENCHMARK(BM_RenderNocsView)->Arg(128)->Arg(256)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
