#include "unlock/semantic.hpp"

#include <cmath>

#include "unlock/binio.hpp"

namespace unlock {

SemanticPrediction::SemanticPrediction(int h, int w, int c) : height(h), width(w), num_classes(c) {
  if (h < 0 || w < 0 || c < 0) {
    throw DimensionMismatch("SemanticPrediction: bad shape");
  }
  data.assign(static_cast<std::size_t>(c) * h * w, 0.0f);
}

int SemanticPrediction::argmax_index(int r, int c) const {
  int best = 0;
  float best_p = num_classes > 0 ? at(0, r, c) : 0.0f;
  for (int k = 1; k < num_classes; ++k) {
    const float p = at(k, r, c);
    if (p > best_p) {  // strict: ties keep the lowest index
      best_p = p;
      best = k;
    }
  }
  return best;
}

float SemanticPrediction::max_prob(int r, int c) const {
  return num_classes > 0 ? at(argmax_index(r, c), r, c) : 0.0f;
}

void SemanticPrediction::validate_normalized(double tol) const {
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double sum = 0.0;
      for (int k = 0; k < num_classes; ++k) sum += at(k, r, c);
      if (std::abs(sum - 1.0) > tol) {
        throw ConfigError("semantic probabilities at (" + std::to_string(r) + "," +
                          std::to_string(c) + ") sum to " + std::to_string(sum));
      }
    }
  }
}

void write_semantic_prob(const std::filesystem::path& path, const SemanticPrediction& sem) {
  ByteWriter w;
  w.text("ULKP");
  w.u32le(static_cast<std::uint32_t>(sem.height));
  w.u32le(static_cast<std::uint32_t>(sem.width));
  w.u32le(static_cast<std::uint32_t>(sem.num_classes));
  for (float v : sem.data) w.f32le(v);
  write_file_bytes(path, w.data());
}

SemanticPrediction read_semantic_prob(const std::filesystem::path& path) {
  ByteReader r(read_file_bytes(path), path.string());
  r.expect_magic("ULKP");
  const std::uint32_t height = r.u32le();
  const std::uint32_t width = r.u32le();
  const std::uint32_t classes = r.u32le();
  SemanticPrediction sem(static_cast<int>(height), static_cast<int>(width),
                         static_cast<int>(classes));
  for (float& v : sem.data) v = r.f32le();
  r.expect_end();
  return sem;
}

SemanticMap::SemanticMap(int h, int w, std::uint8_t fill) : height(h), width(w) {
  if (h < 0 || w < 0) {
    throw DimensionMismatch("SemanticMap: bad shape");
  }
  labels.assign(static_cast<std::size_t>(h) * w, fill);
}

BinaryMask SemanticMap::pixels_equal(std::uint8_t value) const {
  BinaryMask m(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (at(r, c) == value) m.set(r, c, true);
    }
  }
  return m;
}

void write_semantic_map(const std::filesystem::path& path, const SemanticMap& map) {
  Image img(map.height, map.width, 1);
  img.samples = map.labels;
  write_pnm(path, img);
}

SemanticMap read_semantic_map(const std::filesystem::path& path) {
  const Image img = read_pnm(path);
  if (img.channels != 1) {
    throw IoError(path.string() + ": semantic map must be single channel");
  }
  SemanticMap map(img.height, img.width);
  map.labels = img.samples;
  return map;
}

}  // namespace unlock
