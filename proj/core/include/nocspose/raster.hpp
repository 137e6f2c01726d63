// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic z-buffer software rasterizer. No culling: the nearest
// surface wins regardless of winding, and equal depths resolve to the lower
// triangle index. Attributes are interpolated perspective-correctly.

#ifndef NOCSPOSE_RASTER_HPP
#define NOCSPOSE_RASTER_HPP

#include "nocspose/geometry.hpp"
#include "nocspose/image.hpp"
#include "nocspose/mesh.hpp"
#include "nocspose/nocs_map.hpp"

namespace nocspose {

/// Output of one render. mask holds fractional sub-sample coverage in [0,1];
/// depth is camera-frame z of the sample nearest the pixel center (+inf where
/// empty); rgb and nocs are coverage-weighted means over covered sub-samples.
struct RenderBuffers {
  Image rgb;    // HxWx3
  Image mask;   // HxW
  Image depth;  // HxW, +inf where uncovered
  Image nocs;   // HxWx3, meaningful where mask > 0.5

  RenderBuffers() = default;
  RenderBuffers(int width, int height);
};

/// Renders the mesh under a world-to-camera pose with supersample^2
/// sub-pixel samples per pixel. Missing vertex colors render mid-gray and
/// missing NOCS coordinates render zero. An empty mesh yields an all-zero
/// mask. Bit-deterministic for fixed inputs.
RenderBuffers rasterize(const TriangleMesh& mesh, const PoseSE3& pose,
                        const CameraIntrinsics& k, int supersample = 4);

/// NOCS map of the mesh seen from `pose`: one surface sample at each pixel
/// center (supersample 1), valid where covered. Throws EmptyMesh when the
/// mesh has no vertices or no NOCS coordinates.
NocsMap render_nocs_view(const TriangleMesh& mesh, const PoseSE3& pose,
                         const CameraIntrinsics& k);

}  // namespace nocspose

#endif  // NOCSPOSE_RASTER_HPP
