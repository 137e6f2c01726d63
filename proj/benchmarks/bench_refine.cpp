// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "nocspose/refine.hpp"
#include "nocspose/synth.hpp"

using namespace nocspose;

namespace {

void BM_RefineStep(benchmark::State& state) {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kCompositeMarker;
  TriangleMesh mesh = make_primitive_scene(spec, 1);
  normalize_to_nocs(mesh);
  mesh = bake_nocs_frame(mesh);

  const int res = static_cast<int>(state.range(0));
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, res, res);
  SphericalPose sp;
  sp.elevation_deg = 18.0;
  sp.azimuth_deg = 60.0;
  sp.radius = 2.4;
  sp.target = nocs_cube_center();
  const PoseSE3 gt = sp.to_pose();
  const RenderBuffers target = rasterize(mesh, gt, k, 4);

  Eigen::Matrix<double, 6, 1> delta = Eigen::Matrix<double, 6, 1>::Zero();
  delta(1) = 0.08;
  const PoseSE3 init = se3_local_step(gt, delta);

  RefineConfig cfg;
  cfg.max_iters = 1;  // cost of one gradient + line-search round
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        refine_pose(mesh, target.rgb, target.mask, k, init, {1.0, 1.0}, cfg));
  }
}
BENCHMARK(BM_RefineStep)->Arg(96)->Arg(128)->Arg(256);

}  // namespace
