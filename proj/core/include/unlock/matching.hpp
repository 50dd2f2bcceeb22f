#pragma once

#include <vector>

#include "unlock/instance.hpp"

namespace unlock {

// Attaches amodal predictions to visible ones: visible objects are walked in
// (score desc, object_seq asc) order and each takes the not-yet-consumed
// amodal prediction of its class with the largest mask intersection (ties by
// amodal object_seq). Entries with no overlapping candidate stay unmatched.
//
// Returns one entry per visible prediction: the index into `amodal` or -1.
std::vector<int> match_amodal_to_visible(const std::vector<InstancePrediction>& visible,
                                         const std::vector<InstancePrediction>& amodal);

}  // namespace unlock
