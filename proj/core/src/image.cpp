#include "unlock/image.hpp"

#include <string>

#include "unlock/binio.hpp"

namespace unlock {

Image::Image(int h, int w, int ch, std::uint8_t fill) : height(h), width(w), channels(ch) {
  if (h < 0 || w < 0 || (ch != 1 && ch != 3)) {
    throw DimensionMismatch("Image: bad shape " + std::to_string(h) + "x" + std::to_string(w) +
                            "x" + std::to_string(ch));
  }
  samples.assign(static_cast<std::size_t>(h) * w * ch, fill);
}

std::uint8_t& Image::at(int r, int c, int ch) {
  return samples[(static_cast<std::size_t>(r) * width + c) * channels + ch];
}

std::uint8_t Image::at(int r, int c, int ch) const {
  return samples[(static_cast<std::size_t>(r) * width + c) * channels + ch];
}

Image crop(const Image& img, int r0, int c0, int h, int w) {
  if (r0 < 0 || c0 < 0 || h < 0 || w < 0 || r0 + h > img.height || c0 + w > img.width) {
    throw DimensionMismatch("crop: window " + std::to_string(h) + "x" + std::to_string(w) + "@(" +
                            std::to_string(r0) + "," + std::to_string(c0) + ") outside " +
                            std::to_string(img.height) + "x" + std::to_string(img.width));
  }
  Image out(h, w, img.channels);
  for (int r = 0; r < h; ++r) {
    const auto* src = &img.samples[(static_cast<std::size_t>(r0 + r) * img.width + c0) * img.channels];
    auto* dst = &out.samples[static_cast<std::size_t>(r) * w * img.channels];
    std::copy(src, src + static_cast<std::size_t>(w) * img.channels, dst);
  }
  return out;
}

void write_pnm(const std::filesystem::path& path, const Image& img) {
  ByteWriter w;
  w.text(img.channels == 3 ? "P6" : "P5");
  w.text("\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n");
  w.bytes(img.samples.data(), img.samples.size());
  write_file_bytes(path, w.data());
}

namespace {

// PNM token scanner: skips whitespace and '#' comments, reads one decimal.
int read_pnm_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos, const std::string& path) {
  while (pos < bytes.size()) {
    const char ch = static_cast<char>(bytes[pos]);
    if (ch == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') {
    throw IoError(path + ": expected integer in PNM header");
  }
  long v = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    v = v * 10 + (bytes[pos] - '0');
    if (v > 1000000000L) throw IoError(path + ": absurd integer in PNM header");
    ++pos;
  }
  return static_cast<int>(v);
}

}  // namespace

Image read_pnm(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  const std::string name = path.string();
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw IoError(name + ": not a binary PGM/PPM file");
  }
  const int channels = bytes[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  const int width = read_pnm_int(bytes, pos, name);
  const int height = read_pnm_int(bytes, pos, name);
  const int maxval = read_pnm_int(bytes, pos, name);
  if (maxval != 255) {
    throw IoError(name + ": unsupported maxval " + std::to_string(maxval));
  }
  // Single whitespace byte separates header from raster.
  if (pos >= bytes.size()) throw IoError(name + ": missing raster");
  ++pos;
  Image img(height, width, channels);
  if (bytes.size() - pos != img.samples.size()) {
    throw IoError(name + ": raster has " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                  std::to_string(img.samples.size()));
  }
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), img.samples.begin());
  return img;
}

}  // namespace unlock
