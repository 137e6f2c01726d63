// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Rigid-body and pinhole-camera math. Poses map object/world points into an
// OpenCV-convention camera frame (x right, y down, z forward); the world
// up-axis is +y and azimuth is measured about it from +x toward +z.

#ifndef NOCSPOSE_GEOMETRY_HPP
#define NOCSPOSE_GEOMETRY_HPP

#include <Eigen/Core>
#include <array>
#include <vector>

namespace nocspose {

/// Rigid transform x_cam = rotation * x + translation.
struct PoseSE3 {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static PoseSE3 identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }

  /// Camera center in the source frame (-R^T t).
  Eigen::Vector3d center() const {
    return -(rotation.transpose() * translation);
  }

  /// Forward (optical) axis expressed in the source frame.
  Eigen::Vector3d forward_axis() const { return rotation.row(2).transpose(); }
};

PoseSE3 inverse(const PoseSE3& p);

/// Composition: result maps x to a(b(x)).
PoseSE3 compose(const PoseSE3& a, const PoseSE3& b);

/// Relative pose between two views sharing a frame: xi_i^-1 * xi_j.
PoseSE3 relative_pose(const PoseSE3& xi_i, const PoseSE3& xi_j);

/// Geodesic angle between two rotations, in degrees, clamped to [0, 180].
double rotation_error_deg(const Eigen::Matrix3d& r_pred,
                          const Eigen::Matrix3d& r_gt);

/// Rodrigues exponential of a rotation vector (radians).
Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega);

/// Rotation vector of a rotation matrix; inverse of so3_exp for angles < pi.
Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation);

/// Local update used by the optimizers: delta = (omega, v) applies
/// rotation' = exp([omega]x) * rotation and translation' = translation + v.
/// A zero delta returns the base pose bit-exactly.
PoseSE3 se3_local_step(const PoseSE3& base,
                       const Eigen::Matrix<double, 6, 1>& delta);

/// Recovers the delta such that se3_local_step(base, delta) == stepped,
/// valid for rotation offsets below pi.
Eigen::Matrix<double, 6, 1> se3_local_delta(const PoseSE3& base,
                                            const PoseSE3& stepped);

/// Pinhole camera, pixel units.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && cx >= 0.0 && cx < width && cy >= 0.0 &&
           cy < height;
  }

  /// Symmetric intrinsics from a horizontal field of view in degrees.
  static CameraIntrinsics from_fov_deg(double fov_deg, int width, int height);

  /// Same camera scaled to a new width (height scales proportionally).
  CameraIntrinsics scaled_to_width(int new_width) const;
};

/// Perspective projection of a camera-frame point to pixel coordinates.
/// Throws NonPositiveDepth when point.z() <= 0.
Eigen::Vector2d project(const Eigen::Vector3d& point,
                        const CameraIntrinsics& k);

/// Inverse of project at a given depth (camera z).
Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                          const CameraIntrinsics& k);

/// Camera placement on a viewing sphere. Elevation is measured from the
/// horizontal plane, azimuth about +y from +x toward +z; both in degrees.
struct SphericalPose {
  double elevation_deg = 0.0;
  double azimuth_deg = 0.0;
  double radius = 1.0;
  Eigen::Vector3d target = Eigen::Vector3d::Zero();

  /// World-to-camera pose looking at `target` with the world up-axis +y.
  PoseSE3 to_pose() const;
};

/// Azimuth in [0, 360) of a camera pose's center about `about`, degrees.
double pose_azimuth_deg(const PoseSE3& pose, const Eigen::Vector3d& about);

/// The fixed six-view target ring: elevations alternate +20/-10 degrees and
/// azimuths step by 60 degrees starting at phi0 (offset configurable via
/// azimuth_offset_deg, default 0). All views look at the unit-cube center.
std::vector<PoseSE3> target_camera_ring(double phi0_deg, double radius,
                                        double azimuth_offset_deg = 0.0);

/// Elevation pattern of the target ring, degrees.
constexpr std::array<double, 6> kTargetRingElevationsDeg = {20.0, -10.0, 20.0,
                                                            -10.0, 20.0, -10.0};

/// Center of the normalized object cube.
inline Eigen::Vector3d nocs_cube_center() {
  return Eigen::Vector3d(0.5, 0.5, 0.5);
}

constexpr double deg_to_rad(double deg) { return deg * M_PI / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / M_PI; }

}  // namespace nocspose

#endif  // NOCSPOSE_GEOMETRY_HPP
