// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Camera pose recovery from NOCS maps: pixel/coordinate correspondence
// extraction, reprojection-error PnP (linear initialization followed by
// Levenberg-Marquardt over a 6-dof local parameterization), and a seeded
// RANSAC wrapper for outlier rejection.

#ifndef NOCSPOSE_POSESOLVE_HPP
#define NOCSPOSE_POSESOLVE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nocspose/geometry.hpp"
#include "nocspose/nocs_map.hpp"

namespace nocspose {

/// One 2D-3D correspondence: pixel location and the NOCS-frame point seen
/// there.
struct Correspondence {
  Eigen::Vector2d pixel;
  Eigen::Vector3d nocs_point;
};

/// Result of a PnP solve. inliers aligns with the input correspondence list
/// and rms_reprojection_error is computed over inliers only.
struct PnpResult {
  PoseSE3 pose;
  std::vector<bool> inliers;
  double rms_reprojection_error = 0.0;
  bool converged = true;  // false when the iteration cap was hit with the
                          // gradient still above tolerance
};

struct RansacConfig {
  int iterations = 512;
  double inlier_threshold_px = 2.0;  // at reference_width, scaled linearly
  int reference_width = 512;
  double min_inlier_ratio = 0.25;
  std::uint64_t seed = 0;
};

struct LmConfig {
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.3;
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
};

struct SolveConfig {
  RansacConfig ransac;
  LmConfig lm;
  int stride = 0;                 // 0 = auto (2 when valid pixels > threshold)
  int auto_stride_above = 20000;  // valid-pixel count triggering stride 2
};

/// One correspondence per valid pixel on the stride grid, pixels taken at
/// their centers (u + 0.5, v + 0.5).
std::vector<Correspondence> extract_correspondences(const NocsMap& map,
                                                    int stride);

/// Minimizes the sum of squared reprojection errors over SE(3). Without an
/// initial pose a DLT linear solve provides one (requiring >= 6
/// non-degenerate, non-coplanar points); with `init` the linear stage is
/// skipped. All correspondences are marked inlier; outlier handling belongs
/// to ransac_pnp. Throws DegenerateConfiguration.
PnpResult solve_pnp(const std::vector<Correspondence>& corrs,
                    const CameraIntrinsics& k,
                    const std::optional<PoseSE3>& init = std::nullopt,
                    const LmConfig& lm = {});

/// Hypothesize-and-verify PnP: minimal 6-point samples drawn from a seeded
/// generator, best hypothesis by inlier count (ties by lower rms), final
/// solve on its inliers, inlier flags re-evaluated under the final pose.
/// Deterministic for a fixed seed. Throws InsufficientInliers when the best
/// hypothesis misses config.min_inlier_ratio.
PnpResult ransac_pnp(const std::vector<Correspondence>& corrs,
                     const CameraIntrinsics& k, const RansacConfig& config,
                     const LmConfig& lm = {});

/// Per-view outcome for batch solving; `error` is empty on success.
struct PnpOutcome {
  std::optional<PnpResult> result;
  std::string error;
  bool ok() const { return result.has_value(); }
};

/// Solves every view of a batch (1 to 6 views, per-view intrinsics) through
/// correspondence extraction and ransac_pnp. Per-view failures land in the
/// outcome slots without aborting the batch.
std::vector<PnpOutcome> poses_from_nocs(const std::vector<NocsMap>& maps,
                                        const std::vector<CameraIntrinsics>& k,
                                        const SolveConfig& config);

/// Root-mean-square reprojection error of `pose` over the flagged subset
/// (all correspondences when `subset` is empty).
double rms_reprojection_error(const std::vector<Correspondence>& corrs,
                              const CameraIntrinsics& k, const PoseSE3& pose,
                              const std::vector<bool>& subset = {});

}  // namespace nocspose

#endif  // NOCSPOSE_POSESOLVE_HPP
