// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Shared test utilities. The oracles here stay deliberately independent of
// the library code paths they check: brute-force ray casting, explicit
// per-element arithmetic, closed-form rotations.

#ifndef NOCSPOSE_TESTS_SUPPORT_HPP
#define NOCSPOSE_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nocspose/geometry.hpp"
#include "nocspose/mesh.hpp"
#include "nocspose/random.hpp"

namespace testsupport {

inline Eigen::Matrix3d rot_x(double deg) {
  const double a = deg * M_PI / 180.0;
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(1, 1) = std::cos(a);
  m(1, 2) = -std::sin(a);
  m(2, 1) = std::sin(a);
  m(2, 2) = std::cos(a);
  return m;
}

inline Eigen::Matrix3d rot_y(double deg) {
  const double a = deg * M_PI / 180.0;
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = std::cos(a);
  m(0, 2) = std::sin(a);
  m(2, 0) = -std::sin(a);
  m(2, 2) = std::cos(a);
  return m;
}

inline Eigen::Matrix3d rot_z(double deg) {
  const double a = deg * M_PI / 180.0;
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = std::cos(a);
  m(0, 1) = -std::sin(a);
  m(1, 0) = std::sin(a);
  m(1, 1) = std::cos(a);
  return m;
}

inline Eigen::Matrix3d random_rotation(nocspose::Rng& rng) {
  // axis-angle from uniform axis and angle
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  while (axis.norm() < 1e-6) {
    axis = {rng.normal(), rng.normal(), rng.normal()};
  }
  axis.normalize();
  return Eigen::AngleAxisd(rng.uniform(0.0, M_PI), axis).toRotationMatrix();
}

inline nocspose::PoseSE3 random_pose(nocspose::Rng& rng, double t_scale = 1.0) {
  nocspose::PoseSE3 p;
  p.rotation = random_rotation(rng);
  p.translation = {rng.uniform(-t_scale, t_scale), rng.uniform(-t_scale, t_scale),
                   rng.uniform(0.5 * t_scale, 2.0 * t_scale)};
  return p;
}

/// Moller-Trumbore intersection; returns ray parameter t for p = o + t*d.
inline std::optional<double> ray_triangle(const Eigen::Vector3d& o,
                                          const Eigen::Vector3d& d,
                                          const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c) {
  const Eigen::Vector3d e1 = b - a;
  const Eigen::Vector3d e2 = c - a;
  const Eigen::Vector3d pvec = d.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv = 1.0 / det;
  const Eigen::Vector3d tvec = o - a;
  const double u = tvec.dot(pvec) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Eigen::Vector3d qvec = tvec.cross(e1);
  const double v = d.dot(qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv;
  return t > 0.0 ? std::optional<double>(t) : std::nullopt;
}

/// Nearest ray-mesh hit by brute force over all triangles; camera-frame
/// depth oracle for the rasterizer.
inline std::optional<double> raycast_depth(
    const nocspose::TriangleMesh& mesh, const nocspose::PoseSE3& pose,
    const nocspose::CameraIntrinsics& k, double px, double py) {
  // pixel ray in camera frame
  const Eigen::Vector3d dir((px - k.cx) / k.fx, (py - k.cy) / k.fy, 1.0);
  double best = std::numeric_limits<double>::infinity();
  bool hit = false;
  for (const auto& t : mesh.triangles) {
    const Eigen::Vector3d a = pose.apply(mesh.vertices[(size_t)t[0]]);
    const Eigen::Vector3d b = pose.apply(mesh.vertices[(size_t)t[1]]);
    const Eigen::Vector3d c = pose.apply(mesh.vertices[(size_t)t[2]]);
    if (const auto s = ray_triangle(Eigen::Vector3d::Zero(), dir, a, b, c)) {
      best = std::min(best, *s);  // z = t since dir.z == 1
      hit = true;
    }
  }
  return hit ? std::optional<double>(best) : std::nullopt;
}

/// Exact point-to-triangle distance.
inline double point_triangle_distance(const Eigen::Vector3d& p,
                                      const Eigen::Vector3d& a,
                                      const Eigen::Vector3d& b,
                                      const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a;
  const Eigen::Vector3d ac = c - a;
  const Eigen::Vector3d ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();
  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    return (ap - ab * (d1 / (d1 - d3))).norm();
  }
  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    return (ap - ac * (d2 / (d2 - d6))).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const Eigen::Vector3d closest =
      a + ab * (vb * denom) + ac * (vc * denom);
  return (p - closest).norm();
}

inline double point_mesh_distance(const Eigen::Vector3d& p,
                                  const nocspose::TriangleMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) {
    best = std::min(best, point_triangle_distance(
                              p, mesh.vertices[(size_t)t[0]],
                              mesh.vertices[(size_t)t[1]],
                              mesh.vertices[(size_t)t[2]]));
  }
  return best;
}

}  // namespace testsupport

#endif  // NOCSPOSE_TESTS_SUPPORT_HPP
