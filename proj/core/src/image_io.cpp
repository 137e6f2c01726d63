// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <memory>
#include <vector>

#include "nocspose/errors.hpp"

namespace nocspose {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path);
  return f;
}

std::uint8_t to_u8(float v) {
  return static_cast<std::uint8_t>(
      std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::uint16_t to_u16(double v) {
  return static_cast<std::uint16_t>(
      std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

void write_png_impl(const std::string& path, int width, int height,
                    int bit_depth, int color_type,
                    const std::vector<png_bytep>& rows) {
  FilePtr f = open_file(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // buffers are host little-endian
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> buffer;  // rows, host endianness for 16-bit

  explicit PngReader(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
    info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw IoError("libpng failed reading " + path);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    bit_depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (bit_depth == 16) png_set_swap(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    const size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * static_cast<size_t>(height));
    std::vector<png_bytep> rows(static_cast<size_t>(height));
    for (int y = 0; y < height; ++y) {
      rows[static_cast<size_t>(y)] = buffer.data() + row_bytes * static_cast<size_t>(y);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

}  // namespace

void write_png8(const std::string& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw IoError("write_png8: expected 1 or 3 channels");
  }
  const size_t row_bytes =
      static_cast<size_t>(image.width) * static_cast<size_t>(image.channels);
  std::vector<std::uint8_t> bytes(row_bytes * static_cast<size_t>(image.height));
  for (size_t i = 0; i < image.data.size(); ++i) bytes[i] = to_u8(image.data[i]);
  std::vector<png_bytep> rows(static_cast<size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    rows[static_cast<size_t>(y)] = bytes.data() + row_bytes * static_cast<size_t>(y);
  }
  write_png_impl(path, image.width, image.height, 8,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY
                                     : PNG_COLOR_TYPE_RGB,
                 rows);
}

Image read_png8(const std::string& path) {
  PngReader r(path);
  if (r.bit_depth != 8) throw IoError("read_png8: not an 8-bit PNG: " + path);
  Image img(r.width, r.height, r.channels);
  for (size_t i = 0; i < img.data.size(); ++i) {
    img.data[i] = static_cast<float>(r.buffer[i]) / 255.0f;
  }
  return img;
}

void write_nocs_png(const std::string& path, const NocsMap& map,
                    bool with_alpha) {
  const size_t channels = with_alpha ? 4 : 3;
  const size_t row_words = static_cast<size_t>(map.width) * channels;
  std::vector<std::uint16_t> words(row_words * static_cast<size_t>(map.height));
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const size_t p = map.index(x, y);
      std::uint16_t* px = words.data() + row_words * static_cast<size_t>(y) +
                          static_cast<size_t>(x) * channels;
      px[0] = to_u16(map.coords[p * 3]);
      px[1] = to_u16(map.coords[p * 3 + 1]);
      px[2] = to_u16(map.coords[p * 3 + 2]);
      if (with_alpha) px[3] = map.valid[p] ? 65535 : 0;
    }
  }
  std::vector<png_bytep> rows(static_cast<size_t>(map.height));
  for (int y = 0; y < map.height; ++y) {
    rows[static_cast<size_t>(y)] = reinterpret_cast<png_bytep>(
        words.data() + row_words * static_cast<size_t>(y));
  }
  write_png_impl(path, map.width, map.height, 16,
                 with_alpha ? PNG_COLOR_TYPE_RGB_ALPHA : PNG_COLOR_TYPE_RGB,
                 rows);
}

NocsMap read_nocs_png(const std::string& path, const std::string& mask_path) {
  PngReader r(path);
  if (r.bit_depth != 16 || (r.channels != 3 && r.channels != 4)) {
    throw IoError("read_nocs_png: expected a 16-bit RGB or RGBA PNG: " + path);
  }
  NocsMap map(r.width, r.height);
  const auto* words = reinterpret_cast<const std::uint16_t*>(r.buffer.data());
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const std::uint16_t* px =
          words + (static_cast<size_t>(y) * r.width + x) * r.channels;
      const size_t p = map.index(x, y);
      for (int c = 0; c < 3; ++c) {
        map.coords[p * 3 + c] = static_cast<double>(px[c]) / 65535.0;
      }
      if (r.channels == 4) map.valid[p] = px[3] > 32767 ? 1 : 0;
    }
  }
  if (r.channels == 3) {
    std::string sibling = mask_path;
    if (sibling.empty()) {
      sibling = path;
      const std::string tag = "_nocs.png";
      const size_t pos = sibling.rfind(tag);
      if (pos == std::string::npos) {
        throw IoError("read_nocs_png: RGB map needs a sibling mask for " +
                      path);
      }
      sibling.replace(pos, tag.size(), "_mask.png");
    }
    const Image mask = read_png8(sibling);
    if (mask.width != r.width || mask.height != r.height) {
      throw ShapeMismatch("read_nocs_png: mask size differs from map");
    }
    for (size_t p = 0; p < map.valid.size(); ++p) {
      map.valid[p] = mask.data[p * static_cast<size_t>(mask.channels)] > 0.5f
                         ? 1
                         : 0;
    }
  }
  return map;
}

void write_depth(const std::string& path, const Image& depth) {
  if (depth.channels != 1) throw IoError("write_depth: expected 1 channel");
  FilePtr f = open_file(path, "wb");
  const char magic[4] = {'N', 'P', 'D', '1'};
  const std::uint32_t header[3] = {static_cast<std::uint32_t>(depth.width),
                                   static_cast<std::uint32_t>(depth.height),
                                   0u};
  if (std::fwrite(magic, 1, 4, f.get()) != 4 ||
      std::fwrite(header, 4, 3, f.get()) != 3 ||
      std::fwrite(depth.data.data(), 4, depth.data.size(), f.get()) !=
          depth.data.size()) {
    throw IoError("write_depth: short write to " + path);
  }
}

Image read_depth(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  char magic[4];
  std::uint32_t header[3];
  if (std::fread(magic, 1, 4, f.get()) != 4 ||
      std::memcmp(magic, "NPD1", 4) != 0 ||
      std::fread(header, 4, 3, f.get()) != 3) {
    throw IoError("read_depth: bad header in " + path);
  }
  Image depth(static_cast<int>(header[0]), static_cast<int>(header[1]), 1);
  if (std::fread(depth.data.data(), 4, depth.data.size(), f.get()) !=
      depth.data.size()) {
    throw IoError("read_depth: short read from " + path);
  }
  return depth;
}

}  // namespace nocspose
