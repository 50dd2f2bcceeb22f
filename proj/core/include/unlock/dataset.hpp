#pragma once

#include <string>
#include <vector>

#include "unlock/classes.hpp"
#include "unlock/image.hpp"
#include "unlock/instance.hpp"
#include "unlock/semantic.hpp"

namespace unlock {

// One image's worth of raw model output: a semantic probability grid plus the
// two instance-level branches (visible masks and amodal masks).
struct ImagePredictions {
  std::string id;
  Image image;  // source pixels; required by the mixing stage
  SemanticPrediction semantic;
  std::vector<InstancePrediction> instance;
  std::vector<InstancePrediction> amodal;
};

// One ground-truth object of a synthetic scene. depth is the draw order;
// larger depth is closer to the camera and occludes smaller.
struct GroundTruthObject {
  ClassId class_id = 0;
  int depth = 0;
  BinaryMask amodal;
  BinaryMask visible;
};

struct GroundTruthImage {
  std::string id;
  int height = 0;
  int width = 0;
  SemanticMap semantic;
  std::vector<GroundTruthObject> objects;
};

struct PredictionDataset {
  ClassTable classes;
  std::vector<ImagePredictions> images;

  // Reassigns object_seq ordinals (independent counters per branch) and
  // returns nothing; call after any restructuring so ties stay deterministic.
  void assign_object_seqs();

  // Pixel ordinal of the first pixel of image `index`: cumulative pixel count
  // of all earlier images. Semantic selection ranks pixels with these.
  std::uint64_t pixel_seq_base(std::size_t index) const;
};

struct GroundTruthDataset {
  ClassTable classes;
  std::vector<GroundTruthImage> images;
};

}  // namespace unlock
