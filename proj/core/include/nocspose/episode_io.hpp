// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Episode directory layout, the interchange contract for the CLI:
//   episode.json            ground-truth poses, intrinsics, seeds, NOCS frame
//   view_{i}_rgb.png        8-bit RGB render
//   view_{i}_mask.png       8-bit coverage mask
//   view_{i}_nocs.png       16-bit RGBA NOCS map (alpha = validity)
//   mesh.obj                object baked into the NOCS frame

#ifndef NOCSPOSE_EPISODE_IO_HPP
#define NOCSPOSE_EPISODE_IO_HPP

#include <string>
#include <vector>

#include "nocspose/synth.hpp"

namespace nocspose {

void write_episode_dir(const std::string& dir, const Episode& episode);

/// Reads an episode directory back. The mesh is optional on disk; absent
/// meshes load empty.
Episode read_episode_dir(const std::string& dir);

/// {"episodes": [name, ...]} in manifest.json.
void write_manifest(const std::string& dir,
                    const std::vector<std::string>& episode_names);
std::vector<std::string> read_manifest(const std::string& dir);

}  // namespace nocspose

#endif  // NOCSPOSE_EPISODE_IO_HPP
