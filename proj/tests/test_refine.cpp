// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nocspose/errors.hpp"
#include "nocspose/refine.hpp"
#include "nocspose/synth.hpp"
#include "support.hpp"

using namespace nocspose;

namespace {

TriangleMesh marker_mesh(std::uint64_t seed) {
  SceneSpec spec;
  spec.kind = PrimitiveKind::kCompositeMarker;
  spec.dimensions = {1.0};
  TriangleMesh mesh = make_primitive_scene(spec, seed);
  normalize_to_nocs(mesh);
  return bake_nocs_frame(mesh);
}

PoseSE3 view_pose(double elev, double azim, double radius = 2.4) {
  SphericalPose sp;
  sp.elevation_deg = elev;
  sp.azimuth_deg = azim;
  sp.radius = radius;
  sp.target = nocs_cube_center();
  return sp.to_pose();
}

PoseSE3 perturb(const PoseSE3& pose, double rot_deg, double trans, Rng& rng) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
  dir.normalize();
  Eigen::Matrix<double, 6, 1> delta;
  delta.head<3>() = axis * rot_deg * M_PI / 180.0;
  delta.tail<3>() = dir * trans;
  return se3_local_step(pose, delta);
}

}  // namespace

TEST_CASE("render_loss: perfect match leaves only the clamping floor") {
  const int n = 32;
  Image rgb(n, n, 3, 0.3f);
  Image mask(n, n, 1);
  for (int y = 10; y < 22; ++y) {
    for (int x = 10; x < 22; ++x) mask.at(x, y) = 1.0f;
  }
  RenderBuffers rendered(n, n);
  rendered.rgb = rgb;
  rendered.mask = mask;

  const double loss = render_loss(rendered, rgb, mask, {1.0, 1.0});
  CHECK(loss < 1e-5);
  CHECK(loss == doctest::Approx(-std::log(1.0 - 1e-6)).epsilon(1e-3));
}

TEST_CASE("render_loss: closed-form foreground MSE") {
  const int n = 16;
  Image target_rgb(n, n, 3, 0.2f);
  Image mask(n, n, 1, 1.0f);
  RenderBuffers rendered(n, n);
  rendered.mask = mask;
  rendered.rgb = Image(n, n, 3, 0.7f);  // constant 0.5 difference

  RenderLossWeights w;
  w.lambda_mask = 0.0;
  w.mu_rgb = 2.0;
  const double loss = render_loss(rendered, target_rgb, mask, w);
  CHECK(loss == doctest::Approx(2.0 * 0.25).epsilon(1e-6));  // float32 buffers
}

TEST_CASE("render_loss: inverted checkerboard hits the clamp ceiling") {
  const int n = 8;
  Image target_rgb(n, n, 3, 0.0f);
  Image target_mask(n, n, 1);
  RenderBuffers rendered(n, n);
  double expected_ce = 0.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const float m = static_cast<float>((x + y) % 2);
      target_mask.at(x, y) = m;
      rendered.mask.at(x, y) = 1.0f - m;
      // direct per-pixel cross-entropy sum with clamped predictions
      const double p = std::clamp(1.0 - static_cast<double>(m), 1e-6, 1.0 - 1e-6);
      expected_ce -= m * std::log(p) + (1.0 - m) * std::log(1.0 - p);
    }
  }
  expected_ce /= n * n;

  RenderLossWeights w;
  w.lambda_mask = 3.0;
  w.mu_rgb = 0.0;
  const double loss = render_loss(rendered, target_rgb, target_mask, w);
  CHECK(loss == doctest::Approx(3.0 * expected_ce).epsilon(1e-9));
  CHECK(expected_ce == doctest::Approx(-std::log(1e-6)).epsilon(1e-6));
}

TEST_CASE("render_loss: shape mismatch throws") {
  RenderBuffers rendered(8, 8);
  Image rgb(9, 8, 3);
  Image mask(9, 8, 1);
  CHECK_THROWS_AS(render_loss(rendered, rgb, mask, {1.0, 1.0}), ShapeMismatch);
}

TEST_CASE("refine_pose: ground-truth init returns immediately") {
  const TriangleMesh mesh = marker_mesh(1);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 96, 96);
  const PoseSE3 gt = view_pose(18.0, 75.0);
  const RenderBuffers target = rasterize(mesh, gt, k, 4);

  const RefineResult res =
      refine_pose(mesh, target.rgb, target.mask, k, gt, {1.0, 1.0});
  CHECK(res.iterations <= 1);
  CHECK(res.final_loss == res.initial_loss);
  CHECK((res.pose.rotation - gt.rotation).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("refine_pose: mesh behind the camera throws MeshNotVisible") {
  const TriangleMesh mesh = marker_mesh(2);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 64, 64);
  PoseSE3 behind = view_pose(10.0, 30.0);
  behind.translation.z() = -5.0;  // object entirely behind the image plane
  Image rgb(64, 64, 3);
  Image mask(64, 64, 1);
  CHECK_THROWS_AS(refine_pose(mesh, rgb, mask, k, behind, {1.0, 1.0}),
                  MeshNotVisible);
}

TEST_CASE("refine_pose: recovers from perturbed initializations") {
  const TriangleMesh mesh = marker_mesh(3);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 128, 128);
  Rng rng(9);

  int recovered = 0;
  const int scenes = 8;
  for (int s = 0; s < scenes; ++s) {
    const double elev = rng.uniform(-5.0, 40.0);
    const double azim = rng.uniform(0.0, 360.0);
    const double radius = rng.uniform(2.0, 2.8);
    const PoseSE3 gt = view_pose(elev, azim, radius);
    const RenderBuffers target = rasterize(mesh, gt, k, 4);
    const PoseSE3 init = perturb(gt, 10.0, 0.05, rng);

    const RefineResult res =
        refine_pose(mesh, target.rgb, target.mask, k, init, {1.0, 1.0});
    CHECK(res.final_loss <= res.initial_loss);
    if (rotation_error_deg(res.pose.rotation, gt.rotation) < 1.0) ++recovered;
  }
  CHECK(recovered >= scenes - 1);
}

TEST_CASE("refine_pose: loss is locally Lipschitz in the pose") {
  const TriangleMesh mesh = marker_mesh(4);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 96, 96);
  const PoseSE3 gt = view_pose(22.0, 140.0);
  const RenderBuffers target = rasterize(mesh, gt, k, 4);
  Rng rng(10);

  const PoseSE3 base = perturb(gt, 4.0, 0.02, rng);
  const double base_loss =
      render_loss_at(mesh, base, k, target.rgb, target.mask, {1.0, 1.0});
  for (int i = 0; i < 24; ++i) {
    Eigen::Matrix<double, 6, 1> delta;
    for (int d = 0; d < 6; ++d) delta(d) = rng.normal();
    delta *= 1e-4 / delta.norm();
    const double moved = render_loss_at(mesh, se3_local_step(base, delta), k,
                                        target.rgb, target.mask, {1.0, 1.0});
    CHECK(std::abs(moved - base_loss) <= 200.0 * delta.norm());
  }
}

TEST_CASE("select_expert: single candidate and deterministic tie-break") {
  const TriangleMesh mesh = marker_mesh(5);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 96, 96);
  const PoseSE3 gt = view_pose(15.0, 220.0);
  const RenderBuffers target = rasterize(mesh, gt, k, 4);
  const std::vector<RefineView> views = {{target.rgb, target.mask, k}};

  RefineConfig cfg;
  cfg.max_iters = 10;
  const ExpertSelection single =
      select_expert({PoseSet{gt}}, mesh, views, {1.0, 1.0}, cfg);
  CHECK(single.index == 0);

  const ExpertSelection tie =
      select_expert({PoseSet{gt}, PoseSet{gt}}, mesh, views, {1.0, 1.0}, cfg);
  CHECK(tie.index == 0);  // identical losses resolve to the lower index
  CHECK(tie.total_losses[0] == tie.total_losses[1]);
}

TEST_CASE("select_expert: rejects azimuth-flipped impostors") {
  const TriangleMesh mesh = marker_mesh(6);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 128, 128);
  Rng rng(11);
  const PoseSE3 gt = view_pose(12.0, 80.0);
  const RenderBuffers target = rasterize(mesh, gt, k, 4);
  const std::vector<RefineView> views = {{target.rgb, target.mask, k}};

  const PoseSE3 near_gt = perturb(gt, 4.0, 0.02, rng);
  std::vector<PoseSet> candidates = {
      PoseSet{azimuth_flipped_pose(near_gt, 180.0)},
      PoseSet{near_gt},
      PoseSet{azimuth_flipped_pose(near_gt, 180.0)},
      PoseSet{azimuth_flipped_pose(near_gt, 90.0)},
  };
  RefineConfig cfg;
  cfg.max_iters = 40;
  const ExpertSelection sel =
      select_expert(candidates, mesh, views, {1.0, 1.0}, cfg);
  CHECK(sel.index == 1);
  CHECK(rotation_error_deg(sel.refined[0].rotation, gt.rotation) < 2.0);

  // selection equals an offline argmin over the reported totals
  size_t argmin = 0;
  for (size_t i = 1; i < sel.total_losses.size(); ++i) {
    if (sel.total_losses[i] < sel.total_losses[argmin]) argmin = i;
  }
  CHECK(sel.index == argmin);
}

TEST_CASE("select_expert: empty candidate list throws") {
  const TriangleMesh mesh = marker_mesh(7);
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 64, 64);
  const std::vector<RefineView> views = {
      {Image(64, 64, 3), Image(64, 64, 1), k}};
  CHECK_THROWS_AS(select_expert({}, mesh, views, {1.0, 1.0}), EmptyCandidates);
}

TEST_CASE("select_expert: more experts never hurt on a symmetry suite") {
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(36.0, 96, 96);
  RefineConfig cfg;
  cfg.max_iters = 25;

  std::vector<double> err_n1, err_n4;
  for (int scene = 0; scene < 10; ++scene) {
    const TriangleMesh mesh = marker_mesh(100 + static_cast<unsigned>(scene));
    Rng rng(500 + static_cast<unsigned>(scene));
    const double elev = rng.uniform(0.0, 35.0);
    const double azim = rng.uniform(0.0, 360.0);
    const double radius = rng.uniform(2.0, 2.8);
    const PoseSE3 gt = view_pose(elev, azim, radius);
    const RenderBuffers target = rasterize(mesh, gt, k, 4);
    const std::vector<RefineView> views = {{target.rgb, target.mask, k}};

    // candidate 0 flipped on odd scenes; later candidates include the truth
    std::vector<PoseSet> candidates;
    for (int c = 0; c < 4; ++c) {
      const PoseSE3 base = perturb(gt, 5.0, 0.02, rng);
      const bool flip = (scene + c) % 2 == 1;
      candidates.push_back(
          PoseSet{flip ? azimuth_flipped_pose(base, 180.0) : base});
    }

    const ExpertSelection one = select_expert(
        {candidates[0]}, mesh, views, {1.0, 1.0}, cfg);
    const ExpertSelection four =
        select_expert(candidates, mesh, views, {1.0, 1.0}, cfg);
    err_n1.push_back(rotation_error_deg(one.refined[0].rotation, gt.rotation));
    err_n4.push_back(
        rotation_error_deg(four.refined[0].rotation, gt.rotation));
  }
  std::sort(err_n1.begin(), err_n1.end());
  std::sort(err_n4.begin(), err_n4.end());
  CHECK(err_n4[err_n4.size() / 2] <= err_n1[err_n1.size() / 2]);
}
