// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Evaluation protocol: pairwise relative-pose metrics with first-view
// translation normalization, mesh alignment by rotation/scale enumeration
// refined with ICP, F-score between surface samples, and PSNR over a fixed
// viewpoint ring.

#ifndef NOCSPOSE_EVALKIT_HPP
#define NOCSPOSE_EVALKIT_HPP

#include <cstdint>
#include <vector>

#include "nocspose/geometry.hpp"
#include "nocspose/image.hpp"
#include "nocspose/mesh.hpp"

namespace nocspose {

struct PosePairError {
  int view_i = 0;
  int view_j = 0;
  double rotation_error_deg = 0.0;
  double translation_error = 0.0;
};

struct PoseMetricsReport {
  double median_rotation_error_deg = 0.0;
  double acc_at_15 = 0.0;
  double acc_at_30 = 0.0;
  double median_translation_error = 0.0;
  int pair_count = 0;
  std::vector<PosePairError> pairs;
};

/// x' = scale * rotation * x + translation.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return scale * (rotation * x) + translation;
  }
  SimilarityTransform inverse() const;
  /// Composition: (a.after(b))(x) == a(b(x)).
  SimilarityTransform after(const SimilarityTransform& b) const;
};

/// Compares relative poses between all view pairs. Predicted translations
/// are first normalized by the scalar aligning the first predicted camera
/// translation's norm with the ground truth's. Throws LengthMismatch and
/// ZeroFirstTranslation.
PoseMetricsReport pose_metrics(const std::vector<PoseSE3>& pred,
                               const std::vector<PoseSE3>& gt);

/// Area-weighted uniform surface samples, deterministic per seed.
std::vector<Eigen::Vector3d> sample_surface(const TriangleMesh& mesh,
                                            int n_points, std::uint64_t seed);

struct IcpConfig {
  int max_iters = 50;
  double tolerance = 1e-6;
  double inlier_distance = 0.05;
};

struct IcpResult {
  SimilarityTransform transform;
  double inlier_ratio = 0.0;
  double rms = 0.0;
  int iterations = 0;
};

/// Point-to-point ICP with a closed-form similarity (scale, rotation,
/// translation) fit per iteration. Throws TooFewPoints below 3 points.
IcpResult icp(const std::vector<Eigen::Vector3d>& source,
              const std::vector<Eigen::Vector3d>& target,
              const SimilarityTransform& init, const IcpConfig& config = {});

struct AlignConfig {
  int sample_points = 100000;   // surface samples per mesh
  int coarse_points = 1500;     // source subsample during the 120 coarse fits
  int polish_points = 20000;    // source subsample for the final refinement
  IcpConfig icp;
  std::uint64_t seed = 0;
};

struct AlignResult {
  SimilarityTransform transform;  // maps pred coordinates onto gt coordinates
  double inlier_ratio = 0.0;
  double rms = 0.0;
  int initializations = 0;  // enumerated rotation x scale starts
};

/// Aligns pred onto gt: both meshes are pre-scaled to unit bounding boxes,
/// 12 up-axis rotations (30 degrees apart) x 10 scales in [0.6, 1.4] seed the
/// ICP, and the refined fit with the highest inlier ratio (ties by lower rms)
/// wins. The returned transform maps original pred coordinates to original
/// gt coordinates. Throws EmptyMesh.
AlignResult align_meshes(const TriangleMesh& pred, const TriangleMesh& gt,
                         std::uint64_t seed, const AlignConfig& config = {});

/// F-score (x100) between two sampled point clouds at a distance threshold.
double fscore_clouds(const std::vector<Eigen::Vector3d>& pred_points,
                     const std::vector<Eigen::Vector3d>& gt_points,
                     double threshold);

/// F-score between mesh surfaces: precision is the fraction of pred samples
/// within `threshold` of the gt samples, recall the converse. Meshes are
/// expected to be aligned and unit-box normalized. Throws EmptyMesh.
double fscore(const TriangleMesh& pred, const TriangleMesh& gt,
              double threshold = 0.05, int n_points = 100000,
              std::uint64_t seed = 0);

/// 10*log10(1/MSE) for images in [0,1]; capped at 99.0 (the zero-MSE
/// sentinel). Throws ShapeMismatch.
double psnr(const Image& a, const Image& b);

struct ViewProtocolConfig {
  int n_views = 24;
  int resolution = 512;
  double elevation_deg = 15.0;
  double radius = 2.5;
  double fov_deg = 36.0;
  int supersample = 4;
};

struct ViewProtocolResult {
  std::vector<double> per_view_psnr_db;
  double mean_psnr_db = 0.0;
};

/// Renders both meshes from azimuth-uniform viewpoints covering 360 degrees
/// (white background) and reports per-view PSNR plus the mean. Meshes are
/// expected to be pre-aligned. Throws EmptyMesh.
ViewProtocolResult eval_views_protocol(const TriangleMesh& pred,
                                       const TriangleMesh& gt,
                                       const ViewProtocolConfig& config = {});

/// Uniform pre-scale of `mesh` into a unit box centered at the origin.
SimilarityTransform unit_box_transform(const TriangleMesh& mesh);

}  // namespace nocspose

#endif  // NOCSPOSE_EVALKIT_HPP
