// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "nocspose/errors.hpp"

namespace nocspose {

PoseSE3 inverse(const PoseSE3& p) {
  PoseSE3 out;
  out.rotation = p.rotation.transpose();
  out.translation = -(out.rotation * p.translation);
  return out;
}

PoseSE3 compose(const PoseSE3& a, const PoseSE3& b) {
  PoseSE3 out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

PoseSE3 relative_pose(const PoseSE3& xi_i, const PoseSE3& xi_j) {
  return compose(inverse(xi_i), xi_j);
}

double rotation_error_deg(const Eigen::Matrix3d& r_pred,
                          const Eigen::Matrix3d& r_gt) {
  const double tr = (r_pred * r_gt.transpose()).trace();
  const double c = std::clamp((tr - 1.0) * 0.5, -1.0, 1.0);
  return rad_to_deg(std::acos(c));
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double angle = omega.norm();
  if (angle < 1e-12) {
    // first-order expansion keeps exp exact for the zero vector and smooth
    // just above it
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 1) = -omega.z();
    m(0, 2) = omega.y();
    m(1, 0) = omega.z();
    m(1, 2) = -omega.x();
    m(2, 0) = -omega.y();
    m(2, 1) = omega.x();
    return m;
  }
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

PoseSE3 se3_local_step(const PoseSE3& base,
                       const Eigen::Matrix<double, 6, 1>& delta) {
  if (delta.isZero(0.0)) return base;
  PoseSE3 out;
  out.rotation = so3_exp(delta.head<3>()) * base.rotation;
  out.translation = base.translation + delta.tail<3>();
  return out;
}

Eigen::Matrix<double, 6, 1> se3_local_delta(const PoseSE3& base,
                                            const PoseSE3& stepped) {
  Eigen::Matrix<double, 6, 1> delta;
  delta.head<3>() = so3_log(stepped.rotation * base.rotation.transpose());
  delta.tail<3>() = stepped.translation - base.translation;
  return delta;
}

CameraIntrinsics CameraIntrinsics::from_fov_deg(double fov_deg, int width,
                                                int height) {
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  const double f = 0.5 * width / std::tan(0.5 * deg_to_rad(fov_deg));
  k.fx = f;
  k.fy = f;
  k.cx = 0.5 * width;
  k.cy = 0.5 * height;
  return k;
}

CameraIntrinsics CameraIntrinsics::scaled_to_width(int new_width) const {
  const double s = static_cast<double>(new_width) / width;
  CameraIntrinsics k;
  k.fx = fx * s;
  k.fy = fy * s;
  k.cx = cx * s;
  k.cy = cy * s;
  k.width = new_width;
  k.height = static_cast<int>(std::lround(height * s));
  return k;
}

Eigen::Vector2d project(const Eigen::Vector3d& point,
                        const CameraIntrinsics& k) {
  if (point.z() <= 0.0) {
    throw NonPositiveDepth("project: point at non-positive depth z=" +
                           std::to_string(point.z()));
  }
  return {k.fx * point.x() / point.z() + k.cx,
          k.fy * point.y() / point.z() + k.cy};
}

Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                          const CameraIntrinsics& k) {
  return {(pixel.x() - k.cx) / k.fx * depth, (pixel.y() - k.cy) / k.fy * depth,
          depth};
}

PoseSE3 SphericalPose::to_pose() const {
  const double theta = deg_to_rad(elevation_deg);
  const double phi = deg_to_rad(azimuth_deg);
  const Eigen::Vector3d dir(std::cos(theta) * std::cos(phi), std::sin(theta),
                            std::cos(theta) * std::sin(phi));
  const Eigen::Vector3d center = target + radius * dir;
  const Eigen::Vector3d up(0.0, 1.0, 0.0);

  Eigen::Vector3d z_cam = (target - center).normalized();
  Eigen::Vector3d x_cam = z_cam.cross(up);
  if (x_cam.squaredNorm() < 1e-18) {
    // looking straight along the up-axis; pick a fixed horizontal reference
    x_cam = z_cam.cross(Eigen::Vector3d(1.0, 0.0, 0.0));
  }
  x_cam.normalize();
  const Eigen::Vector3d y_cam = z_cam.cross(x_cam);

  PoseSE3 pose;
  pose.rotation.row(0) = x_cam.transpose();
  pose.rotation.row(1) = y_cam.transpose();
  pose.rotation.row(2) = z_cam.transpose();
  pose.translation = -(pose.rotation * center);
  return pose;
}

double pose_azimuth_deg(const PoseSE3& pose, const Eigen::Vector3d& about) {
  const Eigen::Vector3d d = pose.center() - about;
  double az = rad_to_deg(std::atan2(d.z(), d.x()));
  if (az < 0.0) az += 360.0;
  return az;
}

std::vector<PoseSE3> target_camera_ring(double phi0_deg, double radius,
                                        double azimuth_offset_deg) {
  std::vector<PoseSE3> ring;
  ring.reserve(6);
  for (int i = 0; i < 6; ++i) {
    SphericalPose sp;
    sp.elevation_deg = kTargetRingElevationsDeg[static_cast<size_t>(i)];
    sp.azimuth_deg = phi0_deg + azimuth_offset_deg + 60.0 * i;
    sp.radius = radius;
    sp.target = nocs_cube_center();
    ring.push_back(sp.to_pose());
  }
  return ring;
}

}  // namespace nocspose
