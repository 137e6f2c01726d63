// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#ifndef NOCSPOSE_MESH_HPP
#define NOCSPOSE_MESH_HPP

#include <Eigen/Core>
#include <array>
#include <vector>

#include "nocspose/geometry.hpp"

namespace nocspose {

/// Indexed triangle mesh with optional per-vertex normalized-object-space
/// coordinates and colors (both componentwise in [0,1] when present).
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Eigen::Vector3d> vertex_nocs;
  std::vector<Eigen::Vector3d> vertex_color;

  bool empty() const { return vertices.empty(); }
  bool has_nocs() const { return vertex_nocs.size() == vertices.size(); }
  bool has_color() const { return vertex_color.size() == vertices.size(); }

  /// Axis-aligned bounds of `vertices`. Mesh must be non-empty.
  void bounding_box(Eigen::Vector3d& lo, Eigen::Vector3d& hi) const;

  /// Sum of triangle areas.
  double surface_area() const;
};

/// Similarity map x_nocs = scale * rotation * x + offset taking mesh
/// coordinates into the normalized object cube.
struct NocsFrame {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return scale * (rotation * x) + offset;
  }
  Eigen::Vector3d invert(const Eigen::Vector3d& n) const {
    return rotation.transpose() * ((n - offset) / scale);
  }
  /// Composition: (a.after(b))(x) == a(b(x)).
  NocsFrame after(const NocsFrame& b) const;
};

/// Given a rigid world-to-camera pose and the world-to-NOCS similarity, the
/// rigid pose that reproduces the same projections on NOCS-frame points
/// (translation expressed in NOCS units).
PoseSE3 pose_in_nocs_frame(const PoseSE3& world_to_camera,
                           const NocsFrame& frame);

/// Fills vertex_nocs so the tight bounding box maps into [0,1]^3 with a
/// uniform scale: the longest axis spans [0,1] exactly and the others are
/// centered. Returns the applied world-to-NOCS map. Throws EmptyMesh.
NocsFrame normalize_to_nocs(TriangleMesh& mesh);

/// Rotates vertex_nocs by phi0 degrees about the up-axis through the cube
/// center, then re-fits to the cube by a uniform scale about the center and
/// clamps to [0,1]. When `frame` is given it receives the incremental
/// NOCS-to-NOCS similarity applied. Mesh must already have vertex_nocs.
TriangleMesh apply_azimuth_alignment(const TriangleMesh& mesh, double phi0_deg,
                                     NocsFrame* frame = nullptr);

/// Replaces vertices by vertex_nocs, making the mesh live in the NOCS frame.
TriangleMesh bake_nocs_frame(const TriangleMesh& mesh);

}  // namespace nocspose

#endif  // NOCSPOSE_MESH_HPP
