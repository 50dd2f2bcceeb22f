#include "unlock/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace unlock {

namespace {

// Canonical sum: ascending order before accumulation, so any two matchings
// with the same IoU multiset produce bit-identical totals.
double canonical_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

double mean_of(const std::map<ClassId, double>& values, const std::set<ClassId>& domain) {
  if (domain.empty()) return 0.0;
  double sum = 0.0;
  for (ClassId cls : domain) {
    const auto it = values.find(cls);
    sum += it == values.end() ? 0.0 : it->second;
  }
  return sum / static_cast<double>(domain.size());
}

}  // namespace

MetricReport compute_miou_dataset(const std::vector<SemanticMap>& pred,
                                  const std::vector<SemanticMap>& gt, const ClassTable& classes) {
  if (pred.size() != gt.size()) {
    throw DimensionMismatch("compute_miou: " + std::to_string(pred.size()) + " predictions vs " +
                            std::to_string(gt.size()) + " ground-truth maps");
  }
  std::map<ClassId, ClassCounts> counts;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const SemanticMap& p = pred[i];
    const SemanticMap& g = gt[i];
    if (p.height != g.height || p.width != g.width) {
      throw DimensionMismatch("compute_miou: image " + std::to_string(i) + " shape mismatch");
    }
    for (std::size_t k = 0; k < p.labels.size(); ++k) {
      const std::uint8_t gl = g.labels[k];
      if (gl == kIgnoreLabel) continue;
      const std::uint8_t pl = p.labels[k];
      if (!classes.contains(gl)) {
        throw ConfigError("compute_miou: ground-truth label " + std::to_string(gl) +
                          " not in the class table");
      }
      if (!classes.contains(pl)) {
        throw ConfigError("compute_miou: predicted label " + std::to_string(pl) +
                          " not in the class table");
      }
      if (pl == gl) {
        ++counts[gl].tp;
      } else {
        ++counts[pl].fp;
        ++counts[gl].fn;
      }
    }
  }

  MetricReport report;
  report.metric = "miou";
  report.counts = counts;
  std::set<ClassId> gt_classes;
  for (const auto& [cls, c] : counts) {
    const std::int64_t denom = c.tp + c.fp + c.fn;
    if (denom == 0) continue;
    report.per_class[cls] = static_cast<double>(c.tp) / static_cast<double>(denom);
    if (c.tp + c.fn > 0) gt_classes.insert(cls);
  }
  report.mean = mean_of(report.per_class, gt_classes);
  return report;
}

MetricReport compute_miou(const SemanticMap& pred, const SemanticMap& gt,
                          const ClassTable& classes) {
  return compute_miou_dataset({pred}, {gt}, classes);
}

namespace {

struct SegEntry {
  BinaryMask mask;
  std::size_t area = 0;
};

// Segment lists per class for one panoptic map. Thing segments come from the
// table (mask choice per mode), stuff classes contribute one segment holding
// all their pixels.
std::map<ClassId, std::vector<SegEntry>> collect_segments(const PanopticMap& pm,
                                                          const ClassTable& classes,
                                                          SegmentationMode mode) {
  std::map<ClassId, std::vector<SegEntry>> out;
  for (const PanopticSegment& seg : pm.segments) {
    const BinaryMask& m =
        (mode == SegmentationMode::Amodal && seg.amodal) ? *seg.amodal : seg.visible;
    out[seg.class_id].push_back({m, m.area()});
  }
  for (ClassId cls : classes.stuff_ids()) {
    BinaryMask m = pm.class_map.pixels_equal(static_cast<std::uint8_t>(cls));
    const std::size_t area = m.area();
    if (area > 0) out[cls].push_back({std::move(m), area});
  }
  return out;
}

struct Candidate {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double iou = 0.0;
};

// Exact best-total-IoU one-to-one matching among candidate pairs. Candidates
// within one connected component are resolved by exhaustive search (component
// sizes are tiny: a pair needs IoU > 0.5, so conflicts require overlapping
// masks). Returns indices into `cands`.
std::vector<std::size_t> best_matching(const std::vector<Candidate>& cands) {
  // Group candidates into components via union-find over pred/gt nodes.
  std::map<std::size_t, std::size_t> pred_comp, gt_comp;
  std::vector<std::size_t> comp_of(cands.size());
  std::vector<std::size_t> parent(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (auto it = pred_comp.find(cands[i].pred); it != pred_comp.end()) {
      parent[find(i)] = find(it->second);
    } else {
      pred_comp[cands[i].pred] = i;
    }
    if (auto it = gt_comp.find(cands[i].gt); it != gt_comp.end()) {
      parent[find(i)] = find(it->second);
    } else {
      gt_comp[cands[i].gt] = i;
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < cands.size(); ++i) components[find(i)].push_back(i);

  std::vector<std::size_t> chosen;
  for (const auto& [root, members] : components) {
    if (members.size() == 1) {
      chosen.push_back(members[0]);
      continue;
    }
    if (members.size() > 20) {
      // Degenerate pile-up of overlapping candidates; exhaustive search is no
      // longer cheap, fall back to greedy by descending IoU. Needs masks that
      // overlap each other heavily, which disjoint segmentations cannot
      // produce at all.
      std::vector<std::size_t> by_iou = members;
      std::sort(by_iou.begin(), by_iou.end(), [&](std::size_t a, std::size_t b) {
        if (cands[a].iou != cands[b].iou) return cands[a].iou > cands[b].iou;
        if (cands[a].gt != cands[b].gt) return cands[a].gt < cands[b].gt;
        return cands[a].pred < cands[b].pred;
      });
      std::set<std::size_t> used_pred, used_gt;
      for (std::size_t m : by_iou) {
        if (used_pred.count(cands[m].pred) || used_gt.count(cands[m].gt)) continue;
        used_pred.insert(cands[m].pred);
        used_gt.insert(cands[m].gt);
        chosen.push_back(m);
      }
      continue;
    }
    // Exhaustive search over subsets of this component's candidate pairs.
    std::vector<std::size_t> best_set;
    double best_sum = -1.0;
    std::vector<std::size_t> current;
    std::function<void(std::size_t)> dfs = [&](std::size_t idx) {
      if (idx == members.size()) {
        std::vector<double> ious;
        for (std::size_t m : current) ious.push_back(cands[m].iou);
        const double sum = canonical_sum(std::move(ious));
        if (sum > best_sum) {
          best_sum = sum;
          best_set = current;
        }
        return;
      }
      const Candidate& cand = cands[members[idx]];
      bool conflict = false;
      for (std::size_t m : current) {
        if (cands[m].pred == cand.pred || cands[m].gt == cand.gt) {
          conflict = true;
          break;
        }
      }
      if (!conflict) {
        current.push_back(members[idx]);
        dfs(idx + 1);
        current.pop_back();
      }
      dfs(idx + 1);
    };
    dfs(0);
    chosen.insert(chosen.end(), best_set.begin(), best_set.end());
  }
  return chosen;
}

}  // namespace

MetricReport compute_pq(const std::vector<PanopticMap>& pred, const std::vector<PanopticMap>& gt,
                        const ClassTable& classes, SegmentationMode mode) {
  if (pred.size() != gt.size()) {
    throw DimensionMismatch("compute_pq: " + std::to_string(pred.size()) + " predictions vs " +
                            std::to_string(gt.size()) + " ground-truth maps");
  }
  std::map<ClassId, std::vector<double>> matched_iou;
  std::map<ClassId, ClassCounts> counts;
  std::set<ClassId> present;

  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto pred_segs = collect_segments(pred[i], classes, mode);
    auto gt_segs = collect_segments(gt[i], classes, mode);
    std::set<ClassId> image_classes;
    for (const auto& [cls, v] : pred_segs) image_classes.insert(cls);
    for (const auto& [cls, v] : gt_segs) image_classes.insert(cls);

    for (ClassId cls : image_classes) {
      present.insert(cls);
      const auto& ps = pred_segs[cls];
      const auto& gs = gt_segs[cls];
      counts[cls].fp += static_cast<std::int64_t>(ps.size());
      counts[cls].fn += static_cast<std::int64_t>(gs.size());

      std::vector<Candidate> cands;
      for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        for (std::size_t gi = 0; gi < gs.size(); ++gi) {
          const std::size_t inter = intersection_area(ps[pi].mask, gs[gi].mask);
          const std::size_t uni = ps[pi].area + gs[gi].area - inter;
          if (2 * inter > uni) {  // IoU strictly above one half
            cands.push_back({pi, gi, static_cast<double>(inter) / static_cast<double>(uni)});
          }
        }
      }
      for (std::size_t ci : best_matching(cands)) {
        matched_iou[cls].push_back(cands[ci].iou);
        ++counts[cls].tp;
        --counts[cls].fp;
        --counts[cls].fn;
      }
    }
  }

  MetricReport report;
  report.metric = mode == SegmentationMode::Amodal ? "apq" : "pq";
  report.counts = counts;
  for (ClassId cls : present) {
    const ClassCounts& c = counts[cls];
    const double denom = static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp) +
                         0.5 * static_cast<double>(c.fn);
    const double sum = canonical_sum(matched_iou[cls]);
    report.per_class[cls] = denom > 0.0 ? sum / denom : 0.0;
  }
  report.mean = mean_of(report.per_class, present);
  return report;
}

MetricReport compute_ap(const std::vector<std::vector<InstancePrediction>>& preds_per_image,
                        const std::vector<std::vector<GtInstance>>& gts_per_image) {
  if (preds_per_image.size() != gts_per_image.size()) {
    throw DimensionMismatch("compute_ap: prediction and ground-truth image counts differ");
  }
  const std::size_t num_images = gts_per_image.size();

  std::set<ClassId> gt_classes;
  for (const auto& gts : gts_per_image) {
    for (const GtInstance& g : gts) gt_classes.insert(g.class_id);
  }

  struct PredRef {
    std::size_t image = 0;
    std::size_t index = 0;
    double score = 0.0;
    std::uint64_t seq = 0;
  };

  MetricReport report;
  report.metric = "ap";

  for (ClassId cls : gt_classes) {
    std::vector<PredRef> preds;
    std::size_t total_gt = 0;
    for (std::size_t i = 0; i < num_images; ++i) {
      for (std::size_t k = 0; k < preds_per_image[i].size(); ++k) {
        const InstancePrediction& p = preds_per_image[i][k];
        if (p.class_id == cls) preds.push_back({i, k, p.score, p.object_seq});
      }
      for (const GtInstance& g : gts_per_image[i]) {
        if (g.class_id == cls) ++total_gt;
      }
    }
    std::sort(preds.begin(), preds.end(), [](const PredRef& a, const PredRef& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.seq < b.seq;
    });

    // Per-image ground-truth indices and areas for this class.
    std::vector<std::vector<std::size_t>> gt_index(num_images);
    std::vector<std::vector<std::size_t>> gt_area(num_images);
    for (std::size_t i = 0; i < num_images; ++i) {
      for (std::size_t k = 0; k < gts_per_image[i].size(); ++k) {
        if (gts_per_image[i][k].class_id == cls) {
          gt_index[i].push_back(k);
          gt_area[i].push_back(gts_per_image[i][k].mask.area());
        }
      }
    }

    double ap_sum = 0.0;
    for (int t_pct = 50; t_pct <= 95; t_pct += 5) {
      std::vector<std::vector<char>> taken(num_images);
      for (std::size_t i = 0; i < num_images; ++i) taken[i].assign(gt_index[i].size(), 0);

      std::vector<char> is_tp(preds.size(), 0);
      std::size_t tp_total = 0;
      for (std::size_t pi = 0; pi < preds.size(); ++pi) {
        const PredRef& ref = preds[pi];
        const InstancePrediction& p = preds_per_image[ref.image][ref.index];
        const std::size_t p_area = p.mask.area();
        // Best unmatched ground truth by exact rational IoU, requiring
        // 100 * inter >= t * union; equal IoU keeps the earliest object.
        std::size_t best_inter = 0, best_uni = 1;
        int best_gt = -1;
        for (std::size_t gi = 0; gi < gt_index[ref.image].size(); ++gi) {
          if (taken[ref.image][gi]) continue;
          const GtInstance& g = gts_per_image[ref.image][gt_index[ref.image][gi]];
          const std::size_t inter = intersection_area(p.mask, g.mask);
          const std::size_t uni = p_area + gt_area[ref.image][gi] - inter;
          if (100 * inter < static_cast<std::size_t>(t_pct) * uni) continue;
          if (best_gt < 0 || inter * best_uni > best_inter * uni) {
            best_inter = inter;
            best_uni = uni;
            best_gt = static_cast<int>(gi);
          }
        }
        if (best_gt >= 0) {
          taken[ref.image][static_cast<std::size_t>(best_gt)] = 1;
          is_tp[pi] = 1;
          ++tp_total;
        }
      }
      if (t_pct == 50) {
        ClassCounts& c = report.counts[cls];
        c.tp = static_cast<std::int64_t>(tp_total);
        c.fp = static_cast<std::int64_t>(preds.size() - tp_total);
        c.fn = static_cast<std::int64_t>(total_gt - tp_total);
      }

      // All-point interpolation: precision envelope from the right, area
      // accumulated at every recall step.
      const std::size_t n = preds.size();
      std::vector<double> precision(n), recall(n);
      std::size_t tp_cum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp_cum += is_tp[i];
        precision[i] = static_cast<double>(tp_cum) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp_cum) / static_cast<double>(total_gt);
      }
      for (std::size_t i = n; i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
      }
      double ap_t = 0.0;
      double prev_recall = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (is_tp[i]) {
          ap_t += (recall[i] - prev_recall) * precision[i];
          prev_recall = recall[i];
        }
      }
      ap_sum += ap_t;
    }
    report.per_class[cls] = ap_sum / 10.0;
  }

  report.mean = mean_of(report.per_class, gt_classes);
  return report;
}

}  // namespace unlock
