#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "unlock/classes.hpp"
#include "unlock/dataset.hpp"
#include "unlock/instance.hpp"
#include "unlock/semantic.hpp"

namespace unlock {

struct PanopticSegment {
  std::uint32_t id = 0;  // 1-based; 0 in the grid means "no segment"
  ClassId class_id = 0;
  double score = 0.0;
  std::uint64_t seq = 0;
  BinaryMask visible;
  std::optional<BinaryMask> amodal;  // always a superset of visible when present
};

// Seamless per-pixel labeling: a class for every pixel, a segment id for
// pixels claimed by a thing instance. Stuff never carries a segment id here;
// metrics treat each stuff class as one implicit segment per image.
struct PanopticMap {
  int height = 0;
  int width = 0;
  SemanticMap class_map;
  std::vector<std::uint32_t> segment_ids;  // row-major
  std::vector<PanopticSegment> segments;

  std::uint32_t segment_at(int r, int c) const {
    return segment_ids[static_cast<std::size_t>(r) * width + c];
  }

  // Checks structural invariants: visible masks disjoint and consistent with
  // the id grid, class map agreeing with segment classes, visible inside
  // amodal where amodal is present. Throws on violation.
  void validate() const;
};

struct FusedOutputs {
  SemanticMap semantic;
  std::vector<InstancePrediction> instances;
  std::vector<InstancePrediction> amodal_instances;
  PanopticMap panoptic;
  PanopticMap amodal_panoptic;  // same segments, amodal masks attached
};

inline constexpr double kDefaultConfidenceFloor = 0.5;

// Occlusion-aware fusion of the three heads into the five outputs.
//
// Instances at or above the confidence floor are painted in (score desc,
// object_seq asc) order; each claims the pixels no earlier instance took, and
// an instance left with nothing is dropped. Unclaimed pixels fall back to the
// semantic argmax; thing-class fallback pixels keep their class but carry no
// segment id. Amodal predictions are attached to the painted segments with
// match_amodal_to_visible; a segment with no attachment reuses its visible
// mask, and an attached amodal mask is widened to contain the visible mask.
FusedOutputs fuse_outputs(const SemanticPrediction& sem,
                          const std::vector<InstancePrediction>& instances,
                          const std::vector<InstancePrediction>& amodal,
                          const ClassTable& classes,
                          double confidence_floor = kDefaultConfidenceFloor);

// Reference panoptic view of a ground-truth scene: one segment per object
// (visible and amodal masks from the scene), classes from the scene's
// semantic map, all scores 1.
PanopticMap panoptic_from_ground_truth(const GroundTruthImage& gt);

}  // namespace unlock
