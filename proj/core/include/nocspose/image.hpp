// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#ifndef NOCSPOSE_IMAGE_HPP
#define NOCSPOSE_IMAGE_HPP

#include <cstddef>
#include <vector>

namespace nocspose {

/// Row-major float image with interleaved channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {}

  float& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

/// Area-averaging resize (box filter over exact fractional footprints).
Image resize_area(const Image& src, int new_width, int new_height);

/// out = rgb * mask + background * (1 - mask), per pixel.
Image composite_over(const Image& rgb, const Image& mask, float background);

}  // namespace nocspose

#endif  // NOCSPOSE_IMAGE_HPP
