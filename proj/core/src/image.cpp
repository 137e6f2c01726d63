// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/image.hpp"

#include <algorithm>
#include <cmath>

#include "nocspose/errors.hpp"

namespace nocspose {

Image resize_area(const Image& src, int new_width, int new_height) {
  if (new_width == src.width && new_height == src.height) return src;
  Image out(new_width, new_height, src.channels);
  const double sx = static_cast<double>(src.width) / new_width;
  const double sy = static_cast<double>(src.height) / new_height;
  for (int y = 0; y < new_height; ++y) {
    const double y0 = y * sy;
    const double y1 = (y + 1) * sy;
    const int iy0 = static_cast<int>(std::floor(y0));
    const int iy1 = std::min(src.height, static_cast<int>(std::ceil(y1)));
    for (int x = 0; x < new_width; ++x) {
      const double x0 = x * sx;
      const double x1 = (x + 1) * sx;
      const int ix0 = static_cast<int>(std::floor(x0));
      const int ix1 = std::min(src.width, static_cast<int>(std::ceil(x1)));
      for (int c = 0; c < src.channels; ++c) {
        double acc = 0.0;
        double wsum = 0.0;
        for (int yy = iy0; yy < iy1; ++yy) {
          const double wy =
              std::min<double>(yy + 1, y1) - std::max<double>(yy, y0);
          for (int xx = ix0; xx < ix1; ++xx) {
            const double wx =
                std::min<double>(xx + 1, x1) - std::max<double>(xx, x0);
            acc += wx * wy * src.at(xx, yy, c);
            wsum += wx * wy;
          }
        }
        out.at(x, y, c) = static_cast<float>(wsum > 0.0 ? acc / wsum : 0.0);
      }
    }
  }
  return out;
}

Image composite_over(const Image& rgb, const Image& mask, float background) {
  if (rgb.width != mask.width || rgb.height != mask.height) {
    throw ShapeMismatch("composite_over: rgb and mask sizes differ");
  }
  Image out = rgb;
  for (int y = 0; y < rgb.height; ++y) {
    for (int x = 0; x < rgb.width; ++x) {
      const float m = mask.at(x, y);
      for (int c = 0; c < rgb.channels; ++c) {
        out.at(x, y, c) = rgb.at(x, y, c) * m + background * (1.0f - m);
      }
    }
  }
  return out;
}

}  // namespace nocspose
