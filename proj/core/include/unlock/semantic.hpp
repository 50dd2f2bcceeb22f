#pragma once

#include <filesystem>
#include <vector>

#include "unlock/classes.hpp"
#include "unlock/image.hpp"
#include "unlock/mask.hpp"

namespace unlock {

// Per-pixel class probability grid, plane-major: plane c holds the H x W
// probabilities of class index c. Class *index* is the position in the
// accompanying ClassTable's def list, so planes stay dense even when ids are
// not. Values are f32 on disk, held as float in memory, and each pixel's
// column is expected to sum to 1 within a small tolerance.
struct SemanticPrediction {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::vector<float> data;  // num_classes * height * width

  SemanticPrediction() = default;
  SemanticPrediction(int h, int w, int c);

  float at(int cls_index, int r, int c) const {
    return data[(static_cast<std::size_t>(cls_index) * height + r) * width + c];
  }
  float& at(int cls_index, int r, int c) {
    return data[(static_cast<std::size_t>(cls_index) * height + r) * width + c];
  }

  // Index of the most probable class at a pixel; ties go to the lowest index.
  int argmax_index(int r, int c) const;
  float max_prob(int r, int c) const;

  // Throws ConfigError when any pixel's probabilities sum outside 1 +- tol.
  void validate_normalized(double tol = 1e-5) const;
};

// "ULKP": magic, u32 height, u32 width, u32 class count, then f32 LE planes.
void write_semantic_prob(const std::filesystem::path& path, const SemanticPrediction& sem);
SemanticPrediction read_semantic_prob(const std::filesystem::path& path);

// Per-pixel u8 class-id grid. In generated pseudo-labels 254 marks uncertain
// pixels; ground-truth maps may use 255 for ignored pixels. Stored on disk as
// PGM P5 since that is exactly a u8 grid with dimensions.
struct SemanticMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  SemanticMap() = default;
  SemanticMap(int h, int w, std::uint8_t fill = 0);

  std::uint8_t at(int r, int c) const { return labels[static_cast<std::size_t>(r) * width + c]; }
  std::uint8_t& at(int r, int c) { return labels[static_cast<std::size_t>(r) * width + c]; }

  BinaryMask pixels_equal(std::uint8_t value) const;
  bool operator==(const SemanticMap&) const = default;
};

void write_semantic_map(const std::filesystem::path& path, const SemanticMap& map);
SemanticMap read_semantic_map(const std::filesystem::path& path);

}  // namespace unlock
