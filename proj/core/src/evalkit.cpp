// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/evalkit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "kdtree.hpp"
#include "nocspose/errors.hpp"
#include "nocspose/random.hpp"
#include "nocspose/raster.hpp"

namespace nocspose {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Closed-form similarity fit y ~ s*R*x + t (Umeyama).
SimilarityTransform fit_similarity(const std::vector<Eigen::Vector3d>& x,
                                   const std::vector<Eigen::Vector3d>& y) {
  const double n = static_cast<double>(x.size());
  Eigen::Vector3d mx = Eigen::Vector3d::Zero();
  Eigen::Vector3d my = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_x = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const Eigen::Vector3d dx = x[i] - mx;
    cov += (y[i] - my) * dx.transpose();
    var_x += dx.squaredNorm();
  }
  cov /= n;
  var_x /= n;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    d(2) = -1.0;
  }

  SimilarityTransform out;
  out.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  out.scale = var_x > 0.0 ? svd.singularValues().dot(d) / var_x : 1.0;
  if (!(out.scale > 0.0) || !std::isfinite(out.scale)) out.scale = 1.0;
  out.translation = my - out.scale * (out.rotation * mx);
  return out;
}

std::vector<Eigen::Vector3d> transformed(
    const std::vector<Eigen::Vector3d>& pts, const SimilarityTransform& t) {
  std::vector<Eigen::Vector3d> out(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) out[i] = t.apply(pts[i]);
  return out;
}

}  // namespace

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform out;
  out.scale = 1.0 / scale;
  out.rotation = rotation.transpose();
  out.translation = -out.scale * (out.rotation * translation);
  return out;
}

SimilarityTransform SimilarityTransform::after(
    const SimilarityTransform& b) const {
  SimilarityTransform out;
  out.scale = scale * b.scale;
  out.rotation = rotation * b.rotation;
  out.translation = scale * (rotation * b.translation) + translation;
  return out;
}

PoseMetricsReport pose_metrics(const std::vector<PoseSE3>& pred,
                               const std::vector<PoseSE3>& gt) {
  if (pred.size() != gt.size()) {
    throw LengthMismatch("pose_metrics: " + std::to_string(pred.size()) +
                         " predictions vs " + std::to_string(gt.size()) +
                         " ground-truth poses");
  }
  if (pred.size() < 2) {
    throw LengthMismatch("pose_metrics: need at least 2 views");
  }

  const double pred_norm = pred[0].translation.norm();
  if (pred_norm == 0.0) {
    throw ZeroFirstTranslation(
        "pose_metrics: first predicted translation has zero norm");
  }
  const double s = gt[0].translation.norm() / pred_norm;

  std::vector<PoseSE3> pred_n = pred;
  for (auto& p : pred_n) p.translation *= s;

  PoseMetricsReport report;
  std::vector<double> rot_errs;
  std::vector<double> trans_errs;
  for (size_t i = 0; i < pred.size(); ++i) {
    for (size_t j = i + 1; j < pred.size(); ++j) {
      const PoseSE3 rel_pred = relative_pose(pred_n[i], pred_n[j]);
      const PoseSE3 rel_gt = relative_pose(gt[i], gt[j]);
      PosePairError pe;
      pe.view_i = static_cast<int>(i);
      pe.view_j = static_cast<int>(j);
      pe.rotation_error_deg =
          rotation_error_deg(rel_pred.rotation, rel_gt.rotation);
      pe.translation_error = (rel_pred.translation - rel_gt.translation).norm();
      rot_errs.push_back(pe.rotation_error_deg);
      trans_errs.push_back(pe.translation_error);
      report.pairs.push_back(pe);
    }
  }

  report.pair_count = static_cast<int>(report.pairs.size());
  report.median_rotation_error_deg = median(rot_errs);
  report.median_translation_error = median(trans_errs);
  int below15 = 0;
  int below30 = 0;
  for (double e : rot_errs) {
    if (e < 15.0) ++below15;
    if (e < 30.0) ++below30;
  }
  report.acc_at_15 = static_cast<double>(below15) / report.pair_count;
  report.acc_at_30 = static_cast<double>(below30) / report.pair_count;
  return report;
}

std::vector<Eigen::Vector3d> sample_surface(const TriangleMesh& mesh,
                                            int n_points, std::uint64_t seed) {
  if (mesh.empty() || mesh.triangles.empty()) {
    throw EmptyMesh("sample_surface: mesh has no surface");
  }
  if (n_points < 1) {
    throw InvalidSpec("sample_surface: n_points must be positive");
  }

  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector3d& a = mesh.vertices[static_cast<size_t>(tri[0])];
    const Eigen::Vector3d& b = mesh.vertices[static_cast<size_t>(tri[1])];
    const Eigen::Vector3d& c = mesh.vertices[static_cast<size_t>(tri[2])];
    total += 0.5 * (b - a).cross(c - a).norm();
    cumulative[t] = total;
  }
  if (total <= 0.0) throw EmptyMesh("sample_surface: zero surface area");

  Rng rng(seed);
  std::vector<Eigen::Vector3d> points(static_cast<size_t>(n_points));
  for (auto& p : points) {
    const double pick = rng.uniform() * total;
    const size_t t = static_cast<size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
        cumulative.begin());
    const auto& tri = mesh.triangles[std::min(t, mesh.triangles.size() - 1)];
    const Eigen::Vector3d& a = mesh.vertices[static_cast<size_t>(tri[0])];
    const Eigen::Vector3d& b = mesh.vertices[static_cast<size_t>(tri[1])];
    const Eigen::Vector3d& c = mesh.vertices[static_cast<size_t>(tri[2])];
    const double su = std::sqrt(rng.uniform());
    const double v = rng.uniform();
    p = (1.0 - su) * a + su * (1.0 - v) * b + su * v * c;
  }
  return points;
}

IcpResult icp(const std::vector<Eigen::Vector3d>& source,
              const std::vector<Eigen::Vector3d>& target,
              const SimilarityTransform& init, const IcpConfig& config) {
  if (source.size() < 3 || target.size() < 3) {
    throw TooFewPoints("icp: need at least 3 points per cloud");
  }

  const detail::KdTree tree(target);
  IcpResult res;
  res.transform = init;

  double prev_rms = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Vector3d> matched(source.size());
  for (int iter = 0; iter < config.max_iters; ++iter) {
    res.iterations = iter + 1;
    double sum = 0.0;
    std::vector<Eigen::Vector3d> moved = transformed(source, res.transform);
    for (size_t i = 0; i < moved.size(); ++i) {
      const auto [idx, d2] = tree.nearest(moved[i]);
      matched[i] = target[static_cast<size_t>(idx)];
      sum += d2;
    }
    const double rms = std::sqrt(sum / static_cast<double>(source.size()));
    res.rms = rms;
    if (std::abs(prev_rms - rms) < config.tolerance) break;
    prev_rms = rms;
    res.transform = fit_similarity(source, matched);
  }

  const std::vector<Eigen::Vector3d> final_pts =
      transformed(source, res.transform);
  const double d2max = config.inlier_distance * config.inlier_distance;
  size_t inliers = 0;
  for (const auto& p : final_pts) {
    if (tree.nearest(p).second < d2max) ++inliers;
  }
  res.inlier_ratio =
      static_cast<double>(inliers) / static_cast<double>(source.size());
  return res;
}

SimilarityTransform unit_box_transform(const TriangleMesh& mesh) {
  Eigen::Vector3d lo, hi;
  mesh.bounding_box(lo, hi);
  const double longest = (hi - lo).maxCoeff();
  SimilarityTransform t;
  t.scale = longest > 0.0 ? 1.0 / longest : 1.0;
  t.translation = -t.scale * 0.5 * (lo + hi);
  return t;
}

AlignResult align_meshes(const TriangleMesh& pred, const TriangleMesh& gt,
                         std::uint64_t seed, const AlignConfig& config) {
  if (pred.empty() || gt.empty()) {
    throw EmptyMesh("align_meshes: empty input mesh");
  }

  const SimilarityTransform pre_pred = unit_box_transform(pred);
  const SimilarityTransform pre_gt = unit_box_transform(gt);

  const auto pred_raw =
      sample_surface(pred, config.sample_points, mix_seed(seed, 1));
  const auto gt_raw =
      sample_surface(gt, config.sample_points, mix_seed(seed, 2));
  const auto pred_pts = transformed(pred_raw, pre_pred);
  const auto gt_pts = transformed(gt_raw, pre_gt);

  // i.i.d. samples, so prefixes are themselves uniform subsamples
  const std::vector<Eigen::Vector3d> coarse_src(
      pred_pts.begin(),
      pred_pts.begin() + std::min<size_t>(pred_pts.size(),
                                          static_cast<size_t>(config.coarse_points)));

  Eigen::Vector3d pred_centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pred_pts) pred_centroid += p;
  pred_centroid /= static_cast<double>(pred_pts.size());
  Eigen::Vector3d gt_centroid = Eigen::Vector3d::Zero();
  for (const auto& p : gt_pts) gt_centroid += p;
  gt_centroid /= static_cast<double>(gt_pts.size());

  AlignResult best;
  best.inlier_ratio = -1.0;
  best.rms = std::numeric_limits<double>::infinity();

  IcpConfig coarse_cfg = config.icp;
  coarse_cfg.max_iters = std::min(config.icp.max_iters, 30);

  for (int r = 0; r < 12; ++r) {
    const double angle = deg_to_rad(30.0 * r);
    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    rot(0, 0) = std::cos(angle);
    rot(0, 2) = std::sin(angle);
    rot(2, 0) = -std::sin(angle);
    rot(2, 2) = std::cos(angle);
    for (int s = 0; s < 10; ++s) {
      ++best.initializations;
      SimilarityTransform init;
      init.scale = 0.6 + 0.8 * s / 9.0;
      init.rotation = rot;
      init.translation = gt_centroid - init.scale * (rot * pred_centroid);

      const IcpResult fit = icp(coarse_src, gt_pts, init, coarse_cfg);
      if (fit.inlier_ratio > best.inlier_ratio ||
          (fit.inlier_ratio == best.inlier_ratio && fit.rms < best.rms)) {
        best.inlier_ratio = fit.inlier_ratio;
        best.rms = fit.rms;
        best.transform = fit.transform;
      }
    }
  }

  // polish the winner with a denser subsample
  const std::vector<Eigen::Vector3d> polish_src(
      pred_pts.begin(),
      pred_pts.begin() + std::min<size_t>(pred_pts.size(),
                                          static_cast<size_t>(config.polish_points)));
  const IcpResult polished = icp(polish_src, gt_pts, best.transform, config.icp);
  best.transform = polished.transform;
  best.inlier_ratio = polished.inlier_ratio;
  best.rms = polished.rms;

  // report in original mesh coordinates: pre_gt^-1 o fit o pre_pred
  best.transform = pre_gt.inverse().after(best.transform).after(pre_pred);
  return best;
}

double fscore_clouds(const std::vector<Eigen::Vector3d>& pred_points,
                     const std::vector<Eigen::Vector3d>& gt_points,
                     double threshold) {
  if (pred_points.empty() || gt_points.empty()) {
    throw EmptyMesh("fscore_clouds: empty point cloud");
  }
  const detail::KdTree gt_tree(gt_points);
  const detail::KdTree pred_tree(pred_points);
  const double t2 = threshold * threshold;

  size_t close_pred = 0;
  for (const auto& p : pred_points) {
    if (gt_tree.nearest(p).second < t2) ++close_pred;
  }
  size_t close_gt = 0;
  for (const auto& p : gt_points) {
    if (pred_tree.nearest(p).second < t2) ++close_gt;
  }

  const double precision =
      static_cast<double>(close_pred) / static_cast<double>(pred_points.size());
  const double recall =
      static_cast<double>(close_gt) / static_cast<double>(gt_points.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall) * 100.0;
}

double fscore(const TriangleMesh& pred, const TriangleMesh& gt,
              double threshold, int n_points, std::uint64_t seed) {
  const auto pred_pts = sample_surface(pred, n_points, mix_seed(seed, 1));
  const auto gt_pts = sample_surface(gt, n_points, mix_seed(seed, 2));
  return fscore_clouds(pred_pts, gt_pts, threshold);
}

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch("psnr: image shapes differ");
  }
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse == 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

ViewProtocolResult eval_views_protocol(const TriangleMesh& pred,
                                       const TriangleMesh& gt,
                                       const ViewProtocolConfig& config) {
  if (pred.empty() || gt.empty()) {
    throw EmptyMesh("eval_views_protocol: empty input mesh");
  }
  const CameraIntrinsics k = CameraIntrinsics::from_fov_deg(
      config.fov_deg, config.resolution, config.resolution);

  ViewProtocolResult out;
  double sum = 0.0;
  for (int v = 0; v < config.n_views; ++v) {
    SphericalPose sp;
    sp.elevation_deg = config.elevation_deg;
    sp.azimuth_deg = 360.0 * v / config.n_views;
    sp.radius = config.radius;
    sp.target = nocs_cube_center();
    const PoseSE3 pose = sp.to_pose();

    const RenderBuffers rp = rasterize(pred, pose, k, config.supersample);
    const RenderBuffers rg = rasterize(gt, pose, k, config.supersample);
    const double score = psnr(composite_over(rp.rgb, rp.mask, 1.0f),
                              composite_over(rg.rgb, rg.mask, 1.0f));
    out.per_view_psnr_db.push_back(score);
    sum += score;
  }
  out.mean_psnr_db = sum / config.n_views;
  return out;
}

}  // namespace nocspose
