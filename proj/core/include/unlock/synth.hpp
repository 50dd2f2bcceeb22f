#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "unlock/classes.hpp"
#include "unlock/dataset.hpp"
#include "unlock/image.hpp"

namespace unlock {

// Synthetic scenes: a stuff background in horizontal bands plus a stack of
// rectangles and ellipses drawn back to front, so every later object occludes
// every earlier one it touches. Geometry is integer-exact (no anti-aliasing,
// ellipses by the exact center test), and everything derives from the seed.
struct SceneConfig {
  int height = 64;
  int width = 96;
  int min_objects = 2;
  int max_objects = 6;
  // 0 means automatic: min max(2, min(h,w)/8), max max(min, min(h,w)/2).
  int min_extent = 0;
  int max_extent = 0;

  enum class Shapes { Rect, Ellipse, Both };
  Shapes shapes = Shapes::Both;

  ClassTable classes;

  // When set, this class is excluded from the random class draw and exactly
  // `rare_per_scene` objects of it are appended in front of the stack, so
  // every scene is guaranteed to contain them.
  std::optional<ClassId> rare_class;
  int rare_per_scene = 0;

  void validate() const;
};

struct SyntheticScene {
  GroundTruthImage gt;
  Image image;
};

SyntheticScene generate_scene(const SceneConfig& config, std::uint64_t seed);

// Noise model for turning a scene into simulated model output.
//  - mask_radius: each predicted mask is the ground truth eroded or dilated
//    (coin flip per object per branch) by this Chebyshev radius;
//  - score_jitter: scores are clamp(IoU(pred, gt) + U(-j, +j), 0, 1);
//  - miss_rate / spurious_rate: dropped real objects and injected fake ones;
//  - semantic_softening: probability mass moved off the argmax class;
//  - score_schedule: per-class fixed score lists, cycled over that class's
//    objects within each image (applies identically to both branches).
// All zeros reproduces the ground truth exactly with every score at 1.
struct NoiseConfig {
  int mask_radius = 0;
  double score_jitter = 0.0;
  double miss_rate = 0.0;
  double spurious_rate = 0.0;
  double semantic_softening = 0.0;
  std::map<ClassId, std::vector<double>> score_schedule;

  void validate() const;
};

ImagePredictions simulate_predictions(const SyntheticScene& scene, const ClassTable& classes,
                                      const NoiseConfig& noise, std::uint64_t seed);

// Chebyshev-disc morphology used by the simulator; out-of-frame pixels count
// as unset for erosion and are clipped for dilation.
BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask dilate(const BinaryMask& mask, int radius);

// Whole dataset in one call: image ids scene_0000..., per-image seeds drawn
// from the master seed, object ordinals assigned in dataset order.
struct SynthDatasetConfig {
  SceneConfig scene;
  NoiseConfig noise;
  std::size_t image_count = 8;
  std::uint64_t seed = 0;
};

void build_synth_dataset(const SynthDatasetConfig& config, GroundTruthDataset& gt,
                         PredictionDataset& preds);

// Palette used by the command line tool when none is configured: two stuff
// classes and three thing classes, the last thing class reserved for rare
// object injection.
ClassTable default_palette();
inline constexpr ClassId kDefaultRareClass = 4;

}  // namespace unlock
