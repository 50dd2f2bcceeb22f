#pragma once

#include <cstdint>

#include "unlock/classes.hpp"
#include "unlock/mask.hpp"

namespace unlock {

// One predicted object. Which mask it carries (visible extent or amodal
// extent) depends on the branch the prediction came from; the struct is the
// same either way. object_seq is a stable per-dataset ordinal assigned in
// manifest order and is the deterministic tie breaker everywhere scores tie.
struct InstancePrediction {
  ClassId class_id = 0;
  double score = 0.0;
  BinaryMask mask;
  std::uint64_t object_seq = 0;

  void validate() const {
    if (score < 0.0 || score > 1.0) {
      throw ConfigError("instance score " + std::to_string(score) + " outside [0, 1]");
    }
    if (mask.empty()) {
      throw ConfigError("instance mask is empty");
    }
  }
};

}  // namespace unlock
