// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#ifndef NOCSPOSE_NOCS_MAP_HPP
#define NOCSPOSE_NOCS_MAP_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace nocspose {

/// Per-pixel normalized-object-space coordinates with a validity mask.
/// coords are stored row-major, three doubles per pixel, meaningful only
/// where valid is nonzero.
struct NocsMap {
  int width = 0;
  int height = 0;
  std::vector<double> coords;
  std::vector<std::uint8_t> valid;

  NocsMap() = default;
  NocsMap(int w, int h)
      : width(w), height(h),
        coords(static_cast<size_t>(w) * h * 3, 0.0),
        valid(static_cast<size_t>(w) * h, 0) {}

  size_t index(int x, int y) const {
    return static_cast<size_t>(y) * width + x;
  }
  bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }
  Eigen::Vector3d coord(int x, int y) const {
    const size_t i = index(x, y) * 3;
    return {coords[i], coords[i + 1], coords[i + 2]};
  }
  void set(int x, int y, const Eigen::Vector3d& c, bool v) {
    const size_t i = index(x, y) * 3;
    coords[i] = c.x();
    coords[i + 1] = c.y();
    coords[i + 2] = c.z();
    valid[index(x, y)] = v ? 1 : 0;
  }
  size_t valid_count() const {
    size_t n = 0;
    for (auto v : valid) n += v ? 1 : 0;
    return n;
  }
};

}  // namespace nocspose

#endif  // NOCSPOSE_NOCS_MAP_HPP
