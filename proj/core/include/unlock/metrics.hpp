#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unlock/classes.hpp"
#include "unlock/fusion.hpp"
#include "unlock/instance.hpp"
#include "unlock/semantic.hpp"

namespace unlock {

struct ClassCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

// One metric over one dataset: per-class values in [0, 1], their mean, and
// the raw counts behind them (pixels for the pixel metric, segments or
// matches for the others). The CLI multiplies by 100 for display only.
struct MetricReport {
  std::string metric;
  std::map<ClassId, double> per_class;
  std::map<ClassId, ClassCounts> counts;
  double mean = 0.0;
};

// Pixel IoU per class from a confusion count; ground-truth pixels labeled
// kIgnoreLabel are excluded entirely. Per-class values cover classes present
// in either map; the mean covers only classes present in the ground truth.
MetricReport compute_miou(const SemanticMap& pred, const SemanticMap& gt,
                          const ClassTable& classes);
MetricReport compute_miou_dataset(const std::vector<SemanticMap>& pred,
                                  const std::vector<SemanticMap>& gt, const ClassTable& classes);

enum class SegmentationMode { Visible, Amodal };

// Segment quality: segments match when they share a class and IoU exceeds
// 0.5 (exact integer test). Things use visible masks, or amodal masks in
// amodal mode; every stuff class forms one implicit segment per image and is
// always measured on its visible pixels. Per class,
// PQ = sum of matched IoU / (TP + FP/2 + FN/2), mean over classes with at
// least one segment in ground truth or prediction.
//
// Matching maximizes total matched IoU exactly. For disjoint masks the >0.5
// rule makes matches unique and this degenerates to the obvious pairing;
// amodal masks may overlap, so conflicting candidates are resolved by a small
// exact assignment search.
MetricReport compute_pq(const std::vector<PanopticMap>& pred, const std::vector<PanopticMap>& gt,
                        const ClassTable& classes, SegmentationMode mode);

struct GtInstance {
  ClassId class_id = 0;
  BinaryMask mask;
};

// COCO-style average precision over IoU thresholds 0.50 to 0.95 in steps of
// 0.05 (inclusive IoU >= t, exact integer test). Per class and threshold,
// predictions are walked in (score desc, object_seq asc) order and greedily
// matched to the unmatched same-class ground-truth object of highest IoU in
// their image; the all-point interpolated area under the resulting
// precision-recall curve is AP_t, AP_c averages the ten thresholds, and the
// mean covers classes present in the ground truth. Reported counts are the
// match counts at threshold 0.50.
MetricReport compute_ap(const std::vector<std::vector<InstancePrediction>>& preds_per_image,
                        const std::vector<std::vector<GtInstance>>& gts_per_image);

}  // namespace unlock
