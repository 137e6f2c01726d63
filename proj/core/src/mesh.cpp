// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/mesh.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "nocspose/errors.hpp"

namespace nocspose {

void TriangleMesh::bounding_box(Eigen::Vector3d& lo, Eigen::Vector3d& hi) const {
  if (vertices.empty()) throw EmptyMesh("bounding_box: mesh has no vertices");
  lo = vertices.front();
  hi = vertices.front();
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

double TriangleMesh::surface_area() const {
  double area = 0.0;
  for (const auto& t : triangles) {
    const Eigen::Vector3d& a = vertices[static_cast<size_t>(t[0])];
    const Eigen::Vector3d& b = vertices[static_cast<size_t>(t[1])];
    const Eigen::Vector3d& c = vertices[static_cast<size_t>(t[2])];
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  return area;
}

NocsFrame NocsFrame::after(const NocsFrame& b) const {
  // a(b(x)) = sa*Ra*(sb*Rb*x + ob) + oa
  NocsFrame out;
  out.scale = scale * b.scale;
  out.rotation = rotation * b.rotation;
  out.offset = scale * (rotation * b.offset) + offset;
  return out;
}

PoseSE3 pose_in_nocs_frame(const PoseSE3& world_to_camera,
                           const NocsFrame& frame) {
  // With q = s*R_a*x + t_a and x_cam = R*x + t, the rigid pose
  // (R*R_a^T, s*t - R*R_a^T*t_a) maps q to s*x_cam, which projects to the
  // same pixels since perspective division cancels the uniform scale.
  PoseSE3 out;
  out.rotation = world_to_camera.rotation * frame.rotation.transpose();
  out.translation =
      frame.scale * world_to_camera.translation - out.rotation * frame.offset;
  return out;
}

NocsFrame normalize_to_nocs(TriangleMesh& mesh) {
  if (mesh.empty()) throw EmptyMesh("normalize_to_nocs: mesh has no vertices");
  Eigen::Vector3d lo, hi;
  mesh.bounding_box(lo, hi);
  const Eigen::Vector3d extent = hi - lo;
  const double longest = extent.maxCoeff();
  const double scale = longest > 0.0 ? 1.0 / longest : 1.0;
  const Eigen::Vector3d center = 0.5 * (lo + hi);

  NocsFrame frame;
  frame.scale = scale;
  frame.rotation = Eigen::Matrix3d::Identity();
  frame.offset = nocs_cube_center() - scale * center;

  mesh.vertex_nocs.resize(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    Eigen::Vector3d n = frame.apply(mesh.vertices[i]);
    mesh.vertex_nocs[i] = n.cwiseMax(0.0).cwiseMin(1.0);
  }
  return frame;
}

TriangleMesh apply_azimuth_alignment(const TriangleMesh& mesh, double phi0_deg,
                                     NocsFrame* frame) {
  if (!mesh.has_nocs()) {
    throw EmptyMesh("apply_azimuth_alignment: mesh has no NOCS coordinates");
  }
  const double phi = deg_to_rad(phi0_deg);
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  rot(0, 0) = std::cos(phi);
  rot(0, 2) = std::sin(phi);
  rot(2, 0) = -std::sin(phi);
  rot(2, 2) = std::cos(phi);

  const Eigen::Vector3d c = nocs_cube_center();
  std::vector<Eigen::Vector3d> rotated(mesh.vertex_nocs.size());
  double max_half_extent = 0.0;
  for (size_t i = 0; i < mesh.vertex_nocs.size(); ++i) {
    rotated[i] = rot * (mesh.vertex_nocs[i] - c);
    max_half_extent =
        std::max(max_half_extent, rotated[i].cwiseAbs().maxCoeff());
  }
  // Re-fit about the cube center: the largest half-extent maps back to 0.5.
  // Scaling about the center (rather than re-centering the bounding box)
  // keeps the cube center fixed, so directions measured from it survive the
  // alignment exactly.
  const double s = max_half_extent > 0.0 ? 0.5 / max_half_extent : 1.0;

  TriangleMesh out = mesh;
  for (size_t i = 0; i < rotated.size(); ++i) {
    const Eigen::Vector3d n = s * rotated[i] + c;
    out.vertex_nocs[i] = n.cwiseMax(0.0).cwiseMin(1.0);
  }
  if (frame) {
    frame->scale = s;
    frame->rotation = rot;
    frame->offset = c - s * (rot * c);
  }
  return out;
}

TriangleMesh bake_nocs_frame(const TriangleMesh& mesh) {
  if (!mesh.has_nocs()) {
    throw EmptyMesh("bake_nocs_frame: mesh has no NOCS coordinates");
  }
  TriangleMesh out = mesh;
  out.vertices = mesh.vertex_nocs;
  return out;
}

}  // namespace nocspose
