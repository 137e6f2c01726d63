// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "nocspose/posesolve.hpp"
#include "nocspose/random.hpp"
#include "nocspose/synth.hpp"

using namespace nocspose;

namespace {

std::vector<Correspondence> make_corrs(size_t n, double outlier_fraction) {
  SphericalPose sp;
  sp.elevation_deg = 15.0;
  sp.azimuth_deg = 120.0;
  sp.radius = 2.4;
  sp.target = nocs_cube_center();
  const PoseSE3 pose = sp.to_pose();
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);

  Rng rng(7);
  std::vector<Correspondence> corrs;
  while (corrs.size() < n) {
    const Eigen::Vector3d q(rng.uniform(), rng.uniform(), rng.uniform());
    const Eigen::Vector3d cam = pose.apply(q);
    corrs.push_back({{k.fx * cam.x() / cam.z() + k.cx,
                      k.fy * cam.y() / cam.z() + k.cy},
                     q});
  }
  const size_t n_out = static_cast<size_t>(outlier_fraction * n);
  for (size_t i = 0; i < n_out; ++i) {
    corrs[i].nocs_point = {rng.uniform(), rng.uniform(), rng.uniform()};
  }
  return corrs;
}

void BM_SolvePnp(benchmark::State& state) {
  const auto corrs = make_corrs(static_cast<size_t>(state.range(0)), 0.0);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_pnp(corrs, k));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolvePnp)->Range(64, 16384)->Complexity(benchmark::oN);

void BM_RansacPnp(benchmark::State& state) {
  const auto corrs = make_corrs(2000, static_cast<double>(state.range(0)) / 100.0);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);
  RansacConfig cfg;
  cfg.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ransac_pnp(corrs, k, cfg));
  }
}
BENCHMARK(BM_RansacPnp)->Arg(0)->Arg(30);

}  // namespace
