// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Pose refinement against a mesh by descending a rendering loss (mask
// cross-entropy plus foreground RGB MSE) over SE(3), and selection among
// stochastic pose candidates by minimum post-refinement loss.

#ifndef NOCSPOSE_REFINE_HPP
#define NOCSPOSE_REFINE_HPP

#include <vector>

#include "nocspose/geometry.hpp"
#include "nocspose/image.hpp"
#include "nocspose/mesh.hpp"
#include "nocspose/raster.hpp"

namespace nocspose {

/// Weights of the two loss terms; not both zero.
struct RenderLossWeights {
  double lambda_mask = 1.0;
  double mu_rgb = 1.0;
};

struct RefineConfig {
  int max_iters = 100;
  double step_tolerance = 1e-5;
  double fd_epsilon = 1e-3;  // radians / NOCS units
  int max_backtracks = 8;
  int supersample = 4;
  bool parallel_gradient = true;
};

struct RefineResult {
  PoseSE3 pose;
  double final_loss = 0.0;
  double initial_loss = 0.0;
  int iterations = 0;  // accepted descent steps
  bool converged = false;
};

/// lambda * mean binary cross-entropy between the rendered coverage mask and
/// target mask (predictions clamped to [1e-6, 1-1e-6]) plus mu * MSE of RGB
/// over pixels where target_mask > 0.5, averaged over channels. Throws
/// ShapeMismatch.
double render_loss(const RenderBuffers& rendered, const Image& target_rgb,
                   const Image& target_mask, const RenderLossWeights& w);

/// Loss of rendering `mesh` at `pose` against the targets.
double render_loss_at(const TriangleMesh& mesh, const PoseSE3& pose,
                      const CameraIntrinsics& k, const Image& target_rgb,
                      const Image& target_mask, const RenderLossWeights& w,
                      int supersample = 4);

/// Descends the rendering loss from `init` using central finite differences
/// over the 6-dof local parameterization (12 perturbed renders plus the base
/// per gradient) with a backtracking line search. Returns the best pose
/// encountered; final_loss never exceeds initial_loss. Throws MeshNotVisible
/// when the initial render has zero coverage.
RefineResult refine_pose(const TriangleMesh& mesh, const Image& target_rgb,
                         const Image& target_mask, const CameraIntrinsics& k,
                         const PoseSE3& init, const RenderLossWeights& w,
                         const RefineConfig& config = {});

/// One view's refinement targets.
struct RefineView {
  Image rgb;
  Image mask;
  CameraIntrinsics intrinsics;
};

/// A candidate pose set: one pose per view.
using PoseSet = std::vector<PoseSE3>;

struct ExpertSelection {
  size_t index = 0;                       // winning candidate
  PoseSet refined;                        // its refined poses
  std::vector<double> total_losses;       // per candidate, summed over views
  std::vector<std::vector<RefineResult>> per_view;  // [candidate][view]
};

/// Refines every candidate on every view and returns the candidate with the
/// minimum total post-refinement loss (ties by lower index). Candidates whose
/// every view fails MeshNotVisible score +inf. Throws EmptyCandidates.
ExpertSelection select_expert(const std::vector<PoseSet>& candidates,
                              const TriangleMesh& mesh,
                              const std::vector<RefineView>& views,
                              const RenderLossWeights& w,
                              const RefineConfig& config = {});

}  // namespace nocspose

#endif  // NOCSPOSE_REFINE_HPP
