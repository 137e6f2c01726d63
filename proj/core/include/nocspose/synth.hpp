// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic scene and camera generation: procedural colored primitives,
// camera sampling with a normally distributed field of view, episode
// rendering (RGB, mask, NOCS map, ground-truth poses), and corruption models
// emulating noisy upstream NOCS predictions.

#ifndef NOCSPOSE_SYNTH_HPP
#define NOCSPOSE_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nocspose/geometry.hpp"
#include "nocspose/image.hpp"
#include "nocspose/mesh.hpp"
#include "nocspose/nocs_map.hpp"

namespace nocspose {

enum class PrimitiveKind { kBox, kSphere, kCylinder, kCompositeMarker };

enum class ColorPattern { kAxisGradient, kChecker, kUniform };

struct SceneSpec {
  PrimitiveKind kind = PrimitiveKind::kBox;
  std::vector<double> dimensions;  // box: dx dy dz; sphere: radius [level];
                                   // cylinder: radius height [segments]
  ColorPattern pattern = ColorPattern::kAxisGradient;
};

PrimitiveKind primitive_kind_from_string(const std::string& name);
std::string to_string(PrimitiveKind kind);
ColorPattern color_pattern_from_string(const std::string& name);
std::string to_string(ColorPattern pattern);

/// Watertight colored primitive. The composite marker concatenates offset
/// boxes with no nontrivial rotational self-map, for symmetry
/// disambiguation. Throws InvalidSpec on nonpositive dimensions.
TriangleMesh make_primitive_scene(const SceneSpec& spec, std::uint64_t seed);

struct CameraSamplerConfig {
  double fov_mean_deg = 36.0;
  double fov_std_deg = 9.0;
  double fov_min_deg = 5.0;
  double fov_max_deg = 65.0;
  double elevation_min_deg = -10.0;
  double elevation_max_deg = 50.0;
  double azimuth_min_deg = 0.0;
  double azimuth_max_deg = 360.0;
  double radius_min = 1.8;
  double radius_max = 3.2;
  double principal_point_jitter_std_px = 2.0;
  int image_width = 256;
  int image_height = 256;
  std::uint64_t seed = 0;
};

struct SampledCamera {
  CameraIntrinsics intrinsics;
  PoseSE3 pose;  // world to camera
  SphericalPose spherical;
  double fov_deg = 0.0;
};

/// Draws intrinsics (FOV from a clamped normal distribution, jittered
/// principal point) and a look-at pose toward the cube center, uniform over
/// the configured elevation/azimuth/radius box. Deterministic per seed.
SampledCamera sample_camera(const CameraSamplerConfig& cfg);

struct EpisodeView {
  Image rgb;            // supersampled render
  Image mask;           // fractional coverage
  NocsMap nocs;         // one exact surface sample per pixel
  CameraIntrinsics intrinsics;
  PoseSE3 gt_pose;      // NOCS frame to camera
  double fov_deg = 0.0;
  SphericalPose spherical;
};

struct Episode {
  std::vector<EpisodeView> views;
  NocsFrame nocs_frame;    // azimuth alignment applied to the object
  TriangleMesh nocs_mesh;  // object baked into the NOCS frame
  double phi0_deg = 0.0;   // first view's azimuth before alignment
  std::uint64_t seed = 0;
};

/// Samples n_views cameras, aligns the object's NOCS frame to the first
/// view's azimuth, and renders ground-truth RGB/mask/NOCS products for each
/// view. The first view's pose has azimuth zero in the NOCS frame. Throws
/// EmptyMesh and InvalidSpec (n_views outside [1, 6]).
Episode make_episode(const TriangleMesh& mesh, int n_views,
                     const CameraSamplerConfig& cfg, std::uint64_t seed);

struct NoiseSpec {
  double gaussian_sigma = 0.0;    // NOCS units
  double outlier_fraction = 0.0;  // of valid pixels, floor rule
  int boundary_erosion_px = 0;
  std::uint64_t seed = 0;
};

/// Applies, in order: clamped Gaussian noise on valid coordinates, uniform
/// random replacement of floor(outlier_fraction * valid) pixels, and
/// 4-neighborhood erosion of the validity mask. An all-zero spec returns the
/// input bit-identically. Deterministic per seed.
NocsMap corrupt_nocs(const NocsMap& map, const NoiseSpec& spec);

/// The same pose as if the object's NOCS frame were spun by `degrees` about
/// the vertical axis through the cube center; models a symmetry-flipped
/// NOCS prediction.
PoseSE3 azimuth_flipped_pose(const PoseSE3& pose, double degrees);

}  // namespace nocspose

#endif  // NOCSPOSE_SYNTH_HPP
