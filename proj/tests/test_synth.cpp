// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "nocspose/errors.hpp"
#include "nocspose/evalkit.hpp"
#include "nocspose/posesolve.hpp"
#include "nocspose/synth.hpp"
#include "support.hpp"

using namespace nocspose;

namespace {

size_t count_edges(const TriangleMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[static_cast<size_t>(e)];
      const int b = t[static_cast<size_t>((e + 1) % 3)];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return edges.size();
}

}  // namespace

TEST_CASE("make_primitive_scene: unit box topology") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kBox;
  spec.dimensions = {1.0, 1.0, 1.0};
  const TriangleMesh box = make_primitive_scene(spec, 1);
  CHECK(box.vertices.size() == 8);
  CHECK(box.triangles.size() == 12);
  CHECK(box.has_color());
}

TEST_CASE("make_primitive_scene: sphere level 3 is a closed surface") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kSphere;
  spec.dimensions = {0.5, 3.0};
  const TriangleMesh sphere = make_primitive_scene(spec, 1);
  CHECK(sphere.triangles.size() == 20 * 64);  // 20 * 4^3
  const long v = static_cast<long>(sphere.vertices.size());
  const long e = static_cast<long>(count_edges(sphere));
  const long f = static_cast<long>(sphere.triangles.size());
  CHECK(v - e + f == 2);
}

TEST_CASE("make_primitive_scene: cylinder is a closed surface") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kCylinder;
  spec.dimensions = {0.4, 1.2, 24.0};
  const TriangleMesh cyl = make_primitive_scene(spec, 1);
  const long v = static_cast<long>(cyl.vertices.size());
  const long e = static_cast<long>(count_edges(cyl));
  const long f = static_cast<long>(cyl.triangles.size());
  CHECK(v - e + f == 2);
  // every edge borders exactly two triangles
  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& t : cyl.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<size_t>(k)];
      const int b = t[static_cast<size_t>((k + 1) % 3)];
      edge_use[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  for (const auto& [edge, uses] : edge_use) CHECK(uses == 2);
}

TEST_CASE("make_primitive_scene: composite marker has no 180-degree self-map") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kCompositeMarker;
  spec.dimensions = {1.0};
  const TriangleMesh marker = make_primitive_scene(spec, 1);

  // normalize into the unit cube, compare with its azimuth-flipped copy
  TriangleMesh cube = marker;
  normalize_to_nocs(cube);
  cube = bake_nocs_frame(cube);
  TriangleMesh flipped = apply_azimuth_alignment(cube, 180.0);
  flipped = bake_nocs_frame(flipped);

  CHECK(fscore(cube, cube, 0.05, 20000, 3) == doctest::Approx(100.0));
  CHECK(fscore(cube, flipped, 0.05, 20000, 3) < 90.0);
}

TEST_CASE("make_primitive_scene: nonpositive dimensions rejected") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kBox;
  spec.dimensions = {1.0, -2.0, 1.0};
  CHECK_THROWS_AS(make_primitive_scene(spec, 1), InvalidSpec);
}

TEST_CASE("sample_camera: zero std collapses the FOV distribution") {
  CameraSamplerConfig cfg;
  cfg.fov_std_deg = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    cfg.seed = s;
    CHECK(sample_camera(cfg).fov_deg == doctest::Approx(36.0).epsilon(1e-12));
  }
}

TEST_CASE("sample_camera: empirical FOV mean near 36 degrees") {
  CameraSamplerConfig cfg;
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    cfg.seed = static_cast<std::uint64_t>(i);
    sum += sample_camera(cfg).fov_deg;
  }
  CHECK(std::abs(sum / n - 36.0) < 0.5);
}

TEST_CASE("sample_camera: deterministic per seed") {
  CameraSamplerConfig cfg;
  cfg.seed = 424242;
  const SampledCamera a = sample_camera(cfg);
  const SampledCamera b = sample_camera(cfg);
  CHECK(a.fov_deg == b.fov_deg);
  CHECK(a.intrinsics.cx == b.intrinsics.cx);
  CHECK(a.pose.rotation == b.pose.rotation);
  CHECK(a.pose.translation == b.pose.translation);
}

TEST_CASE("make_episode: first view has azimuth zero in the NOCS frame") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kCompositeMarker;
  spec.dimensions = {1.0};
  const TriangleMesh mesh = make_primitive_scene(spec, 2);
  CameraSamplerConfig cfg;
  cfg.image_width = 96;
  cfg.image_height = 96;

  for (std::uint64_t seed : {1ull, 7ull, 19ull}) {
    const Episode ep = make_episode(mesh, 1, cfg, seed);
    const double az =
        pose_azimuth_deg(ep.views[0].gt_pose, nocs_cube_center());
    CHECK(std::abs(std::remainder(az, 360.0)) < 1e-6);
  }
}

TEST_CASE("make_episode: NOCS maps project through the stored ground truth") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kBox;
  spec.dimensions = {1.0, 0.7, 0.5};
  const TriangleMesh mesh = make_primitive_scene(spec, 3);
  CameraSamplerConfig cfg;
  cfg.image_width = 128;
  cfg.image_height = 128;
  const Episode ep = make_episode(mesh, 3, cfg, 77);

  for (const auto& view : ep.views) {
    int checked = 0;
    for (int y = 0; y < view.nocs.height && checked < 40; y += 5) {
      for (int x = 0; x < view.nocs.width && checked < 40; x += 5) {
        if (!view.nocs.is_valid(x, y)) continue;
        const Eigen::Vector2d px =
            project(view.gt_pose.apply(view.nocs.coord(x, y)),
                    view.intrinsics);
        CHECK(px.x() == doctest::Approx(x + 0.5).epsilon(1e-4));
        CHECK(px.y() == doctest::Approx(y + 0.5).epsilon(1e-4));
        ++checked;
      }
    }
    CHECK(checked > 10);
  }
}

TEST_CASE("make_episode: solved relative poses reproduce the ground truth") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kCompositeMarker;
  spec.dimensions = {1.0};
  const TriangleMesh mesh = make_primitive_scene(spec, 4);
  CameraSamplerConfig cfg;
  cfg.image_width = 160;
  cfg.image_height = 160;
  const Episode ep = make_episode(mesh, 6, cfg, 404);

  std::vector<NocsMap> maps;
  std::vector<CameraIntrinsics> intr;
  for (const auto& v : ep.views) {
    maps.push_back(v.nocs);
    intr.push_back(v.intrinsics);
  }
  const auto outcomes = poses_from_nocs(maps, intr, SolveConfig{});
  for (size_t i = 0; i < ep.views.size(); ++i) {
    REQUIRE(outcomes[i].ok());
    for (size_t j = i + 1; j < ep.views.size(); ++j) {
      const PoseSE3 rel_solved = relative_pose(outcomes[i].result->pose,
                                               outcomes[j].result->pose);
      const PoseSE3 rel_gt =
          relative_pose(ep.views[i].gt_pose, ep.views[j].gt_pose);
      CHECK(rotation_error_deg(rel_solved.rotation, rel_gt.rotation) < 0.2);
    }
  }
}

TEST_CASE("make_episode: uncorrupted episodes solve with near-total inliers") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kSphere;
  spec.dimensions = {0.5, 3.0};
  const TriangleMesh mesh = make_primitive_scene(spec, 5);
  CameraSamplerConfig cfg;
  cfg.image_width = 128;
  cfg.image_height = 128;
  const Episode ep = make_episode(mesh, 2, cfg, 55);

  for (const auto& view : ep.views) {
    const auto corrs = extract_correspondences(view.nocs, 1);
    RansacConfig rcfg;
    const PnpResult res = ransac_pnp(corrs, view.intrinsics, rcfg);
    const double ratio =
        static_cast<double>(std::count(res.inliers.begin(), res.inliers.end(),
                                       true)) /
        static_cast<double>(res.inliers.size());
    CHECK(ratio >= 0.99);
  }
}

TEST_CASE("make_episode: bit-identical for identical inputs") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kCylinder;
  spec.dimensions = {0.35, 1.0, 20.0};
  const TriangleMesh mesh = make_primitive_scene(spec, 6);
  CameraSamplerConfig cfg;
  cfg.image_width = 64;
  cfg.image_height = 64;

  const Episode a = make_episode(mesh, 3, cfg, 8);
  const Episode b = make_episode(mesh, 3, cfg, 8);
  REQUIRE(a.views.size() == b.views.size());
  for (size_t i = 0; i < a.views.size(); ++i) {
    CHECK(a.views[i].rgb.data == b.views[i].rgb.data);
    CHECK(a.views[i].mask.data == b.views[i].mask.data);
    CHECK(a.views[i].nocs.coords == b.views[i].nocs.coords);
    CHECK(a.views[i].nocs.valid == b.views[i].nocs.valid);
    CHECK(a.views[i].gt_pose.rotation == b.views[i].gt_pose.rotation);
  }
}

TEST_CASE("make_episode: view count bounds") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kBox;
  const TriangleMesh mesh = make_primitive_scene(spec, 7);
  CameraSamplerConfig cfg;
  CHECK_THROWS_AS(make_episode(mesh, 0, cfg, 1), InvalidSpec);
  CHECK_THROWS_AS(make_episode(mesh, 7, cfg, 1), InvalidSpec);
  CHECK_THROWS_AS(make_episode(TriangleMesh{}, 2, cfg, 1), EmptyMesh);
}

TEST_CASE("corrupt_nocs: all-zero spec is the identity") {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kBox;
  const TriangleMesh mesh = make_primitive_scene(spec, 8);
  CameraSamplerConfig cfg;
  cfg.image_width = 64;
  cfg.image_height = 64;
  const Episode ep = make_episode(mesh, 1, cfg, 9);

  const NocsMap out = corrupt_nocs(ep.views[0].nocs, NoiseSpec{});
  CHECK(out.coords == ep.views[0].nocs.coords);
  CHECK(out.valid == ep.views[0].nocs.valid);
}

TEST_CASE("corrupt_nocs: outlier count follows the floor rule") {
  NocsMap map(40, 25);  // 1000 pixels, all valid
  for (int y = 0; y < 25; ++y) {
    for (int x = 0; x < 40; ++x) map.set(x, y, {0.5, 0.5, 0.5}, true);
  }
  NoiseSpec spec;
  spec.outlier_fraction = 0.3;
  spec.seed = 3;
  const NocsMap out = corrupt_nocs(map, spec);

  size_t changed = 0;
  for (size_t i = 0; i < map.coords.size(); i += 3) {
    if (out.coords[i] != map.coords[i] || out.coords[i + 1] != map.coords[i + 1] ||
        out.coords[i + 2] != map.coords[i + 2]) {
      ++changed;
    }
  }
  CHECK(changed == 300);
}

TEST_CASE("corrupt_nocs: gaussian sigma matches sample statistics") {
  NocsMap map(100, 100);
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) map.set(x, y, {0.5, 0.5, 0.5}, true);
  }
  NoiseSpec spec;
  spec.gaussian_sigma = 0.01;
  spec.seed = 11;
  const NocsMap out = corrupt_nocs(map, spec);

  double sum = 0.0, sum2 = 0.0;
  const size_t n = map.coords.size();
  for (size_t i = 0; i < n; ++i) {
    const double d = out.coords[i] - map.coords[i];
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / static_cast<double>(n);
  const double stddev = std::sqrt(sum2 / static_cast<double>(n) - mean * mean);
  CHECK(std::abs(stddev - 0.01) < 0.001);
}

TEST_CASE("corrupt_nocs: erosion trims the validity boundary") {
  NocsMap map(10, 10);
  for (int y = 2; y < 8; ++y) {
    for (int x = 2; x < 8; ++x) map.set(x, y, {0.5, 0.5, 0.5}, true);
  }
  NoiseSpec spec;
  spec.boundary_erosion_px = 1;
  const NocsMap out = corrupt_nocs(map, spec);
  CHECK(out.valid_count() == 16);  // 6x6 block erodes to 4x4
  CHECK(out.is_valid(3, 3));
  CHECK_FALSE(out.is_valid(2, 2));
}

TEST_CASE("azimuth_flipped_pose: flip changes azimuth by the given angle") {
  SphericalPose sp;
  sp.elevation_deg = 25.0;
  sp.azimuth_deg = 40.0;
  sp.radius = 2.0;
  sp.target = nocs_cube_center();
  const PoseSE3 pose = sp.to_pose();

  const PoseSE3 flipped = azimuth_flipped_pose(pose, 180.0);
  const double az = pose_azimuth_deg(flipped, nocs_cube_center());
  CHECK(std::abs(std::remainder(az - 220.0, 360.0)) < 1e-9);
  // elevation and distance survive the flip
  const Eigen::Vector3d rel = flipped.center() - nocs_cube_center();
  CHECK(rel.norm() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::asin(rel.y() / rel.norm()) * 180.0 / M_PI ==
        doctest::Approx(25.0).epsilon(1e-9));
}
