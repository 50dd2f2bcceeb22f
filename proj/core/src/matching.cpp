#include "unlock/matching.hpp"

#include <algorithm>

namespace unlock {

std::vector<int> match_amodal_to_visible(const std::vector<InstancePrediction>& visible,
                                         const std::vector<InstancePrediction>& amodal) {
  std::vector<std::size_t> order(visible.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (visible[a].score != visible[b].score) return visible[a].score > visible[b].score;
    return visible[a].object_seq < visible[b].object_seq;
  });

  std::vector<int> match(visible.size(), -1);
  std::vector<char> consumed(amodal.size(), 0);
  for (std::size_t vi : order) {
    std::size_t best_overlap = 0;
    int best = -1;
    for (std::size_t ai = 0; ai < amodal.size(); ++ai) {
      if (consumed[ai] || amodal[ai].class_id != visible[vi].class_id) continue;
      const std::size_t overlap = intersection_area(visible[vi].mask, amodal[ai].mask);
      if (overlap == 0) continue;
      if (overlap > best_overlap ||
          (overlap == best_overlap && best >= 0 &&
           amodal[ai].object_seq < amodal[static_cast<std::size_t>(best)].object_seq)) {
        best_overlap = overlap;
        best = static_cast<int>(ai);
      }
    }
    if (best >= 0) {
      consumed[static_cast<std::size_t>(best)] = 1;
      match[vi] = best;
    }
  }
  return match;
}

}  // namespace unlock
