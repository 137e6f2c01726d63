// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "nocspose/errors.hpp"
#include "nocspose/posesolve.hpp"
#include "nocspose/raster.hpp"
#include "nocspose/synth.hpp"
#include "support.hpp"

using namespace nocspose;
using namespace testsupport;

namespace {

// Exact correspondences by projecting random unit-cube points through a
// known pose; completely independent of the rasterizer.
std::vector<Correspondence> exact_correspondences(const PoseSE3& pose,
                                                  const CameraIntrinsics& k,
                                                  int n, Rng& rng) {
  std::vector<Correspondence> corrs;
  corrs.reserve(static_cast<size_t>(n));
  while (corrs.size() < static_cast<size_t>(n)) {
    const Eigen::Vector3d q(rng.uniform(), rng.uniform(), rng.uniform());
    const Eigen::Vector3d cam = pose.apply(q);
    if (cam.z() <= 0.1) continue;
    const Eigen::Vector2d px(k.fx * cam.x() / cam.z() + k.cx,
                             k.fy * cam.y() / cam.z() + k.cy);
    if (px.x() < 0.0 || px.x() >= k.width || px.y() < 0.0 ||
        px.y() >= k.height) {
      continue;
    }
    corrs.push_back({px, q});
  }
  return corrs;
}

PoseSE3 camera_on_sphere(double elev, double azim, double radius) {
  SphericalPose sp;
  sp.elevation_deg = elev;
  sp.azimuth_deg = azim;
  sp.radius = radius;
  sp.target = nocs_cube_center();
  return sp.to_pose();
}

double reprojection_sum(const std::vector<Correspondence>& corrs,
                        const CameraIntrinsics& k, const PoseSE3& pose) {
  double sum = 0.0;
  for (const auto& c : corrs) {
    const Eigen::Vector3d p = pose.apply(c.nocs_point);
    const Eigen::Vector2d px(k.fx * p.x() / p.z() + k.cx,
                             k.fy * p.y() / p.z() + k.cy);
    sum += (px - c.pixel).squaredNorm();
  }
  return sum;
}

}  // namespace

TEST_CASE("extract_correspondences: empty, bijective, and strided") {
  NocsMap empty(4, 4);
  CHECK(extract_correspondences(empty, 1).empty());

  NocsMap full(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      full.set(x, y, {0.1 * x, 0.1 * y, 0.5}, true);
    }
  }
  CHECK(extract_correspondences(full, 1).size() == 16);

  const auto strided = extract_correspondences(full, 2);
  REQUIRE(strided.size() == 4);
  const std::set<std::pair<double, double>> got = {
      {strided[0].pixel.x(), strided[0].pixel.y()},
      {strided[1].pixel.x(), strided[1].pixel.y()},
      {strided[2].pixel.x(), strided[2].pixel.y()},
      {strided[3].pixel.x(), strided[3].pixel.y()}};
  const std::set<std::pair<double, double>> expect = {
      {0.5, 0.5}, {2.5, 0.5}, {0.5, 2.5}, {2.5, 2.5}};
  CHECK(got == expect);
}

TEST_CASE("solve_pnp: recovers a known pose from exact correspondences") {
  Rng rng(101);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);
  for (int trial = 0; trial < 10; ++trial) {
    const PoseSE3 gt = camera_on_sphere(rng.uniform(-10.0, 50.0),
                                        rng.uniform(0.0, 360.0),
                                        rng.uniform(1.8, 3.2));
    const auto corrs = exact_correspondences(gt, k, 200, rng);
    const PnpResult res = solve_pnp(corrs, k);
    CHECK(res.converged);
    CHECK(rotation_error_deg(res.pose.rotation, gt.rotation) < 0.05);
    CHECK((res.pose.translation - gt.translation).norm() < 1e-4);
    CHECK(res.rms_reprojection_error < 1e-3);
    CHECK(std::all_of(res.inliers.begin(), res.inliers.end(),
                      [](bool b) { return b; }));
  }
}

TEST_CASE("solve_pnp: ground-truth init returns immediately") {
  Rng rng(102);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(40.0, 256, 256);
  const PoseSE3 gt = camera_on_sphere(20.0, 135.0, 2.4);
  const auto corrs = exact_correspondences(gt, k, 100, rng);
  const PnpResult res = solve_pnp(corrs, k, gt);
  CHECK(res.converged);
  CHECK(res.rms_reprojection_error < 1e-9);
  CHECK(rotation_error_deg(res.pose.rotation, gt.rotation) < 1e-9);
}

TEST_CASE("solve_pnp: five correspondences are degenerate") {
  Rng rng(103);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(40.0, 256, 256);
  const PoseSE3 gt = camera_on_sphere(10.0, 45.0, 2.0);
  auto corrs = exact_correspondences(gt, k, 5, rng);
  CHECK_THROWS_AS(solve_pnp(corrs, k), DegenerateConfiguration);
}

TEST_CASE("solve_pnp: coplanar points without init are degenerate") {
  Rng rng(104);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(40.0, 256, 256);
  const PoseSE3 gt = camera_on_sphere(15.0, 200.0, 2.2);
  std::vector<Correspondence> corrs;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d q(rng.uniform(), rng.uniform(), 0.5);  // one plane
    const Eigen::Vector3d cam = gt.apply(q);
    corrs.push_back({{k.fx * cam.x() / cam.z() + k.cx,
                      k.fy * cam.y() / cam.z() + k.cy},
                     q});
  }
  CHECK_THROWS_AS(solve_pnp(corrs, k), DegenerateConfiguration);

  // with an init the planar set is solvable
  const PnpResult res = solve_pnp(corrs, k, gt);
  CHECK(res.rms_reprojection_error < 1e-6);
}

TEST_CASE("solve_pnp: local-minimum certificate on the reprojection sum") {
  Rng rng(105);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);
  const PoseSE3 gt = camera_on_sphere(25.0, 310.0, 2.8);
  const auto corrs = exact_correspondences(gt, k, 300, rng);
  const PnpResult res = solve_pnp(corrs, k);

  const double at_min = reprojection_sum(corrs, k, res.pose);
  for (int axis = 0; axis < 6; ++axis) {
    for (double sign : {1.0, -1.0}) {
      Eigen::Matrix<double, 6, 1> delta = Eigen::Matrix<double, 6, 1>::Zero();
      delta(axis) = sign * 1e-3;
      const double perturbed =
          reprojection_sum(corrs, k, se3_local_step(res.pose, delta));
      CHECK(perturbed > at_min);
    }
  }
}

TEST_CASE("solve_pnp: reported rms matches an independent recomputation") {
  Rng rng(106);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);
  const PoseSE3 gt = camera_on_sphere(5.0, 80.0, 2.0);
  auto corrs = exact_correspondences(gt, k, 150, rng);
  // push the solve off the exact optimum with mild coordinate noise
  for (auto& c : corrs) {
    c.nocs_point += Eigen::Vector3d(rng.normal(0.0, 0.002),
                                    rng.normal(0.0, 0.002),
                                    rng.normal(0.0, 0.002));
  }
  const PnpResult res = solve_pnp(corrs, k);
  const double recomputed = std::sqrt(
      reprojection_sum(corrs, k, res.pose) / static_cast<double>(corrs.size()));
  CHECK(std::abs(recomputed - res.rms_reprojection_error) < 1e-9);
}

TEST_CASE("ransac_pnp: no outliers matches solve_pnp") {
  Rng rng(107);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);
  const PoseSE3 gt = camera_on_sphere(30.0, 150.0, 2.5);
  const auto corrs = exact_correspondences(gt, k, 400, rng);

  RansacConfig config;
  config.seed = 9;
  const PnpResult ransac = ransac_pnp(corrs, k, config);
  const PnpResult direct = solve_pnp(corrs, k);
  CHECK((ransac.pose.rotation - direct.pose.rotation).cwiseAbs().maxCoeff() <
        1e-6);
  CHECK((ransac.pose.translation - direct.pose.translation).norm() < 1e-6);
  CHECK(std::count(ransac.inliers.begin(), ransac.inliers.end(), true) ==
        static_cast<long>(corrs.size()));
}

TEST_CASE("ransac_pnp: rejects 30 percent injected outliers") {
  Rng rng(108);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);
  const PoseSE3 gt = camera_on_sphere(12.0, 265.0, 2.1);
  auto corrs = exact_correspondences(gt, k, 500, rng);

  std::set<size_t> outlier_idx;
  while (outlier_idx.size() < 150) {
    outlier_idx.insert(rng.uniform_index(corrs.size()));
  }
  for (size_t i : outlier_idx) {
    corrs[i].nocs_point = {rng.uniform(), rng.uniform(), rng.uniform()};
  }

  RansacConfig config;
  config.seed = 33;
  const PnpResult res = ransac_pnp(corrs, k, config);
  CHECK(rotation_error_deg(res.pose.rotation, gt.rotation) < 1.0);
  for (size_t i : outlier_idx) {
    CHECK_FALSE(res.inliers[i]);
  }
}

TEST_CASE("ransac_pnp: 95 percent outliers raises InsufficientInliers") {
  Rng rng(109);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);
  const PoseSE3 gt = camera_on_sphere(18.0, 10.0, 2.6);
  auto corrs = exact_correspondences(gt, k, 400, rng);
  std::set<size_t> outlier_idx;
  while (outlier_idx.size() < 380) {
    outlier_idx.insert(rng.uniform_index(corrs.size()));
  }
  for (size_t i : outlier_idx) {
    corrs[i].nocs_point = {rng.uniform(), rng.uniform(), rng.uniform()};
  }

  RansacConfig config;
  config.seed = 4;
  config.min_inlier_ratio = 0.3;
  CHECK_THROWS_AS(ransac_pnp(corrs, k, config), InsufficientInliers);
}

TEST_CASE("ransac_pnp: bit-identical for a fixed seed") {
  Rng rng(110);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 512, 512);
  const PoseSE3 gt = camera_on_sphere(22.0, 190.0, 2.9);
  auto corrs = exact_correspondences(gt, k, 300, rng);
  for (int i = 0; i < 60; ++i) {
    corrs[static_cast<size_t>(i)].nocs_point = {rng.uniform(), rng.uniform(),
                                                rng.uniform()};
  }

  RansacConfig config;
  config.seed = 77;
  const PnpResult a = ransac_pnp(corrs, k, config);
  const PnpResult b = ransac_pnp(corrs, k, config);
  CHECK(a.pose.rotation == b.pose.rotation);
  CHECK(a.pose.translation == b.pose.translation);
  CHECK(a.inliers == b.inliers);
  CHECK(a.rms_reprojection_error == b.rms_reprojection_error);
}

TEST_CASE("poses_from_nocs: six clean synthetic views") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kCompositeMarker;
  spec.dimensions = {1.0};
  const TriangleMesh mesh = make_primitive_scene(spec, 12);

  CameraSamplerConfig cam_cfg;
  cam_cfg.image_width = 160;
  cam_cfg.image_height = 160;
  const Episode ep = make_episode(mesh, 6, cam_cfg, 21);

  std::vector<NocsMap> maps;
  std::vector<CameraIntrinsics> intr;
  for (const auto& v : ep.views) {
    maps.push_back(v.nocs);
    intr.push_back(v.intrinsics);
  }
  const auto outcomes = poses_from_nocs(maps, intr, SolveConfig{});
  REQUIRE(outcomes.size() == 6);
  for (size_t i = 0; i < 6; ++i) {
    REQUIRE(outcomes[i].ok());
    const PoseSE3& gt = ep.views[i].gt_pose;
    CHECK(rotation_error_deg(outcomes[i].result->pose.rotation, gt.rotation) <
          0.1);
  }
}

TEST_CASE("poses_from_nocs: single view, and a dead view among six") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kBox;
  spec.dimensions = {1.0, 0.8, 0.6};
  const TriangleMesh mesh = make_primitive_scene(spec, 13);
  CameraSamplerConfig cam_cfg;
  cam_cfg.image_width = 128;
  cam_cfg.image_height = 128;

  {
    const Episode ep = make_episode(mesh, 1, cam_cfg, 5);
    const auto outcomes = poses_from_nocs({ep.views[0].nocs},
                                          {ep.views[0].intrinsics},
                                          SolveConfig{});
    REQUIRE(outcomes.size() == 1);
    REQUIRE(outcomes[0].ok());
    const PoseSE3 rel =
        relative_pose(outcomes[0].result->pose, outcomes[0].result->pose);
    CHECK(rotation_error_deg(rel.rotation, Eigen::Matrix3d::Identity()) <
          1e-9);
  }

  {
    const Episode ep = make_episode(mesh, 6, cam_cfg, 6);
    std::vector<NocsMap> maps;
    std::vector<CameraIntrinsics> intr;
    for (const auto& v : ep.views) {
      maps.push_back(v.nocs);
      intr.push_back(v.intrinsics);
    }
    maps[2] = NocsMap(128, 128);  // all-invalid slot
    const auto outcomes = poses_from_nocs(maps, intr, SolveConfig{});
    REQUIRE(outcomes.size() == 6);
    for (size_t i = 0; i < 6; ++i) {
      if (i == 2) {
        CHECK_FALSE(outcomes[i].ok());
        CHECK_FALSE(outcomes[i].error.empty());
      } else {
        CHECK(outcomes[i].ok());
      }
    }
  }
}

TEST_CASE("poses_from_nocs: batch size limits") {
  std::vector<NocsMap> maps(7, NocsMap(8, 8));
  std::vector<CameraIntrinsics> intr(
      7, CameraIntrinsics::from_fov_deg(40.0, 8, 8));
  CHECK_THROWS_AS(poses_from_nocs(maps, intr, SolveConfig{}), InvalidSpec);
  CHECK_THROWS_AS(poses_from_nocs({}, {}, SolveConfig{}), InvalidSpec);
  CHECK_THROWS_AS(
      poses_from_nocs({NocsMap(8, 8)},
                      std::vector<CameraIntrinsics>{}, SolveConfig{}),
      LengthMismatch);
}

TEST_CASE("noise scaling: median rotation error grows with sigma") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kSphere;
  spec.dimensions = {0.5, 3.0};
  const TriangleMesh mesh = make_primitive_scene(spec, 14);
  CameraSamplerConfig cam_cfg;
  cam_cfg.image_width = 96;
  cam_cfg.image_height = 96;

  // Gaussian noise on every pixel probes the least-squares estimator, not
  // the inlier/outlier split, so this runs solve_pnp directly.
  const double sigmas[3] = {0.005, 0.01, 0.02};
  std::vector<std::vector<double>> errors(3);
  for (int scene = 0; scene < 50; ++scene) {
    const Episode ep =
        make_episode(mesh, 1, cam_cfg, 1000 + static_cast<unsigned>(scene));
    std::vector<double> per_sigma;
    for (int s = 0; s < 3; ++s) {
      NoiseSpec noise;
      noise.gaussian_sigma = sigmas[s];
      noise.seed = mix_seed(2024, static_cast<unsigned>(scene * 3 + s));
      const NocsMap noisy = corrupt_nocs(ep.views[0].nocs, noise);
      const auto corrs = extract_correspondences(noisy, 2);
      try {
        const PnpResult res = solve_pnp(corrs, ep.views[0].intrinsics);
        per_sigma.push_back(rotation_error_deg(res.pose.rotation,
                                               ep.views[0].gt_pose.rotation));
      } catch (const Error&) {
        break;  // drop the scene for every sigma to keep the sets matched
      }
    }
    if (per_sigma.size() == 3) {
      for (int s = 0; s < 3; ++s) {
        errors[static_cast<size_t>(s)].push_back(per_sigma[static_cast<size_t>(s)]);
      }
    }
  }
  REQUIRE(errors[0].size() >= 40);
  double medians[3];
  for (int s = 0; s < 3; ++s) {
    auto& e = errors[static_cast<size_t>(s)];
    std::sort(e.begin(), e.end());
    medians[s] = e[e.size() / 2];
  }
  CHECK(medians[0] < medians[1]);
  CHECK(medians[1] < medians[2]);
}
