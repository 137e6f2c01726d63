// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#ifndef NOCSPOSE_IMAGE_IO_HPP
#define NOCSPOSE_IMAGE_IO_HPP

#include <string>

#include "nocspose/image.hpp"
#include "nocspose/nocs_map.hpp"

namespace nocspose {

/// 8-bit PNG, gray (1 channel) or RGB (3 channels); values rounded from
/// [0,1] floats.
void write_png8(const std::string& path, const Image& image);
Image read_png8(const std::string& path);

/// NOCS map as 16-bit PNG: channel value = round(coord * 65535). With alpha
/// (the default) validity rides in the alpha channel; without it the caller
/// is expected to keep a sibling 8-bit mask next to the file.
void write_nocs_png(const std::string& path, const NocsMap& map,
                    bool with_alpha = true);

/// Reads a 16-bit NOCS PNG. RGBA input takes validity from alpha > 32767;
/// RGB input requires the sibling 8-bit mask (mask value > 127 is valid),
/// looked up by replacing a "_nocs.png" suffix with "_mask.png" unless
/// `mask_path` is given.
NocsMap read_nocs_png(const std::string& path,
                      const std::string& mask_path = "");

/// Raw float32 depth with a 16-byte header: magic "NPD1", width u32,
/// height u32, reserved u32, all little-endian, then row-major pixels.
void write_depth(const std::string& path, const Image& depth);
Image read_depth(const std::string& path);

}  // namespace nocspose

#endif  // NOCSPOSE_IMAGE_IO_HPP
