#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unlock/dataset.hpp"
#include "unlock/image.hpp"
#include "unlock/instance.hpp"
#include "unlock/opll.hpp"

namespace unlock {

// One bankable object cut from a source image. o_ful is its full predicted
// amodal extent; o_ovp is the part of that extent shared with other objects
// of the same source image (o_ovp is always a subset of o_ful). pixels holds
// the source image cropped to o_ful's bounding box, so a pasted object lands
// at its original coordinates.
struct PoolObject {
  ClassId class_id = 0;
  double score = 0.0;
  BinaryMask o_ful;
  BinaryMask o_ovp;
  Image pixels;  // bounding-box crop of the source image
  std::string source_image_id;

  void validate() const;
};

inline constexpr std::size_t kDefaultPoolCapacity = 2048;

// Overlap test for pool membership: an object qualifies only when the shared
// region is less than half of its full extent (2 * |o_ovp| < |o_ful|, exact
// integer arithmetic). Heavier overlap means most of the predicted extent was
// never observed, which makes the cut pixels unreliable.
//
// `others` are the other thing-gated amodal predictions of the same image
// (the candidate itself is excluded by object_seq). The candidate must
// already have passed selection at the strict thresholds; this function only
// applies the overlap rule and cuts the pixels.
std::optional<PoolObject> admit_object(const InstancePrediction& candidate,
                                       const std::vector<InstancePrediction>& others,
                                       const Image& source, const std::string& source_image_id);

struct ObjectPool {
  std::vector<PoolObject> objects;
  std::map<ClassId, std::size_t> class_histogram() const;
};

// Runs the strict selection over the dataset's amodal branch (statistics
// pass, then compute_cs_thresholds at the strict pair), applies the overlap
// rule, and collects admitted objects in dataset order. When more than
// `capacity` objects qualify, the highest-scoring `capacity` survive (score
// ties keep earlier dataset order) and the survivors stay in dataset order.
ObjectPool build_object_pool(const PredictionDataset& data, double strict_fix, double strict_per,
                             std::size_t capacity = kDefaultPoolCapacity);

struct PasteOutcome {
  std::size_t pool_index = 0;
  bool kept = true;  // false: fully occluded by later pastes and removed
};

struct MixedSample {
  Image image;
  OmniPseudoLabel labels;
  std::vector<PasteOutcome> paste_log;
};

// Pastes `count` pool objects onto a base image and reconciles its labels.
// Draws are seeded (SplitMix64), without replacement when the pool is large
// enough, with replacement otherwise. Each paste copies the object's pixels
// under o_ful at original coordinates, then zeroes the o_ovp pixels; later
// pastes sit in front of earlier ones. An object left with no visible pixel
// is dropped from the labels and logged as removed.
//
// Label reconciliation:
//  - kept pastes contribute an amodal label (o_ful), an instance label
//    (o_ful minus later pastes) and semantic pixels (class on the unzeroed
//    part, uncertain on the zeroed part, later pastes overwrite);
//  - base objects whose visible mask is buried under the paste union lose
//    their instance label and the amodal label attached to it (attachment by
//    match_amodal_to_visible); an unattached base amodal label is removed
//    only when its own mask is buried;
//  - branch uncertain regions shrink by the paste union, since pasted area
//    now carries definite labels.
MixedSample spatial_aware_mix(const Image& base, const OmniPseudoLabel& base_labels,
                              const ObjectPool& pool, std::size_t count, std::uint64_t seed);

}  // namespace unlock
