#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "unlock/errors.hpp"
#include "unlock/mask.hpp"

namespace unlock {

// 8-bit raster, 1 (gray) or 3 (RGB) interleaved channels, row-major.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<std::uint8_t> samples;  // height * width * channels

  Image() = default;
  Image(int h, int w, int ch, std::uint8_t fill = 0);

  std::uint8_t& at(int r, int c, int ch);
  std::uint8_t at(int r, int c, int ch) const;

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  bool operator==(const Image& o) const = default;
};

// Rectangular crop, origin (r0, c0), size h x w. Must lie inside the image.
Image crop(const Image& img, int r0, int c0, int h, int w);

// Binary PPM (P6, 3 channel) and PGM (P5, 1 channel), maxval 255.
// write_pnm picks the format from the channel count and emits the canonical
// header "P6\n<width> <height>\n255\n". The reader accepts ordinary PNM
// whitespace and '#' comments.
void write_pnm(const std::filesystem::path& path, const Image& img);
Image read_pnm(const std::filesystem::path& path);

}  // namespace unlock
