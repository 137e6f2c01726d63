// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#ifndef NOCSPOSE_MESH_IO_HPP
#define NOCSPOSE_MESH_IO_HPP

#include <string>

#include "nocspose/mesh.hpp"

namespace nocspose {

/// OBJ with v/f records; per-vertex colors use the xyzrgb extension
/// ("v x y z r g b"). Faces with more than 3 vertices are fan-triangulated.
TriangleMesh read_obj(const std::string& path);

/// Writes v (with colors when present) and f records. Deterministic output.
void write_obj(const std::string& path, const TriangleMesh& mesh);

}  // namespace nocspose

#endif  // NOCSPOSE_MESH_IO_HPP
