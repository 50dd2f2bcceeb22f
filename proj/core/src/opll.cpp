#include "unlock/opll.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace unlock {

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::Semantic:
      return "semantic";
    case Branch::Instance:
      return "instance";
    case Branch::Amodal:
      return "amodal";
  }
  return "?";
}

BinaryMask compute_thing_mask(const SemanticPrediction& sem, const ClassTable& classes) {
  if (static_cast<int>(classes.size()) != sem.num_classes) {
    throw DimensionMismatch("compute_thing_mask: " + std::to_string(sem.num_classes) +
                            " probability planes vs " + std::to_string(classes.size()) +
                            " classes");
  }
  // Per-plane thing flag, then a plain argmax scan.
  std::vector<char> thing(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    thing[i] = classes.defs()[i].kind == ClassKind::Thing;
  }
  BinaryMask mask(sem.height, sem.width);
  for (int r = 0; r < sem.height; ++r) {
    for (int c = 0; c < sem.width; ++c) {
      if (thing[sem.argmax_index(r, c)]) mask.set(r, c, true);
    }
  }
  return mask;
}

std::optional<InstancePrediction> gate_prediction(const InstancePrediction& pred,
                                                  const BinaryMask& thing_mask) {
  InstancePrediction gated = pred;
  gated.mask = mask_and(pred.mask, thing_mask);
  if (gated.mask.empty()) return std::nullopt;
  return gated;
}

void BranchStats::merge(const BranchStats& other) {
  if (other.branch_ != branch_) {
    throw BranchMismatch(std::string("BranchStats::merge: ") + branch_name(branch_) + " vs " +
                         branch_name(other.branch_));
  }
  for (const auto& [cls, samples] : other.samples_) {
    auto& dst = samples_[cls];
    dst.insert(dst.end(), samples.begin(), samples.end());
  }
}

void collect_instance_stats(BranchStats& stats, const std::vector<InstancePrediction>& gated) {
  for (const InstancePrediction& p : gated) stats.add(p.class_id, p.score, p.object_seq);
}

void collect_semantic_stats(BranchStats& stats, const SemanticPrediction& sem,
                            const ClassTable& classes, std::uint64_t pixel_seq_base) {
  if (static_cast<int>(classes.size()) != sem.num_classes) {
    throw DimensionMismatch("collect_semantic_stats: plane/class count mismatch");
  }
  std::uint64_t seq = pixel_seq_base;
  for (int r = 0; r < sem.height; ++r) {
    for (int c = 0; c < sem.width; ++c, ++seq) {
      const int idx = sem.argmax_index(r, c);
      stats.add(classes.defs()[idx].id, sem.at(idx, r, c), seq);
    }
  }
}

bool BranchThresholds::admits(ClassId cls, double score, std::uint64_t seq) const {
  const auto it = per_class.find(cls);
  if (it == per_class.end()) {
    return score > fix;
  }
  const ClassThreshold& t = it->second;
  if (t.rule == ClassRule::Fixed) {
    return score > t.cutoff;
  }
  return score > t.cutoff || (score == t.cutoff && seq <= t.tie_seq_limit);
}

BranchThresholds compute_cs_thresholds(const BranchStats& stats, double fix, double per) {
  if (fix < 0.0 || fix > 1.0 || per < 0.0 || per > 1.0) {
    throw ConfigError("threshold pair (" + std::to_string(fix) + ", " + std::to_string(per) +
                      ") outside [0, 1]");
  }
  BranchThresholds th;
  th.branch = stats.branch();
  th.fix = fix;
  th.per = per;
  for (const auto& [cls, raw] : stats.samples()) {
    std::vector<ScoreSample> samples = raw;
    std::sort(samples.begin(), samples.end(), [](const ScoreSample& a, const ScoreSample& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.seq < b.seq;
    });
    const std::size_t n = samples.size();
    std::size_t n_fix = 0;
    while (n_fix < n && samples[n_fix].score > fix) ++n_fix;
    const std::size_t k =
        n == 0 ? 0 : static_cast<std::size_t>(std::ceil(per * static_cast<double>(n)));
    ClassThreshold t;
    if (n_fix >= k) {  // ties go to the fixed rule
      t.rule = ClassRule::Fixed;
      t.cutoff = fix;
      t.admitted = n_fix;
    } else {
      t.rule = ClassRule::Percentile;
      t.cutoff = samples[k - 1].score;
      t.admitted = k;
      // Sorted by (score desc, seq asc), so entry k-1 is the last admitted
      // sample and carries the largest admitted seq at the cutoff score.
      t.tie_seq_limit = samples[k - 1].seq;
    }
    th.per_class.emplace(cls, t);
  }
  return th;
}

std::vector<InstancePrediction> select_certain_objects(const std::vector<InstancePrediction>& gated,
                                                       const BranchThresholds& th,
                                                       Branch expected) {
  if (th.branch != expected) {
    throw BranchMismatch(std::string("select_certain_objects: thresholds are for ") +
                         branch_name(th.branch) + ", caller expected " + branch_name(expected));
  }
  std::vector<InstancePrediction> certain;
  for (const InstancePrediction& p : gated) {
    if (th.admits(p.class_id, p.score, p.object_seq)) certain.push_back(p);
  }
  return certain;
}

BinaryMask compute_uncertain_region(const std::vector<InstancePrediction>& gated,
                                    const std::vector<InstancePrediction>& certain, int height,
                                    int width) {
  std::unordered_set<std::uint64_t> certain_seqs;
  certain_seqs.reserve(certain.size());
  for (const InstancePrediction& p : certain) certain_seqs.insert(p.object_seq);

  BinaryMask rejected_union(height, width);
  BinaryMask certain_union(height, width);
  for (const InstancePrediction& p : gated) {
    if (certain_seqs.count(p.object_seq)) {
      certain_union = mask_or(certain_union, p.mask);
    } else {
      rejected_union = mask_or(rejected_union, p.mask);
    }
  }
  return mask_diff(rejected_union, certain_union);
}

SemanticMap generate_semantic_pseudo_label(const SemanticPrediction& sem, const ClassTable& classes,
                                           const BranchThresholds& th,
                                           std::uint64_t pixel_seq_base) {
  if (th.branch != Branch::Semantic) {
    throw BranchMismatch(std::string("generate_semantic_pseudo_label: thresholds are for ") +
                         branch_name(th.branch));
  }
  if (static_cast<int>(classes.size()) != sem.num_classes) {
    throw DimensionMismatch("generate_semantic_pseudo_label: plane/class count mismatch");
  }
  SemanticMap map(sem.height, sem.width, kUncertainLabel);
  std::uint64_t seq = pixel_seq_base;
  for (int r = 0; r < sem.height; ++r) {
    for (int c = 0; c < sem.width; ++c, ++seq) {
      const int idx = sem.argmax_index(r, c);
      const ClassId cls = classes.defs()[idx].id;
      if (th.admits(cls, sem.at(idx, r, c), seq)) {
        map.at(r, c) = static_cast<std::uint8_t>(cls);
      }
    }
  }
  return map;
}

OmniPseudoLabel generate_omni_label(const ImagePredictions& preds, const ClassTable& classes,
                                    const OmniThresholds& th, std::uint64_t pixel_seq_base) {
  const BinaryMask thing_mask = compute_thing_mask(preds.semantic, classes);

  const auto gate_all = [&](const std::vector<InstancePrediction>& raw) {
    std::vector<InstancePrediction> gated;
    for (const InstancePrediction& p : raw) {
      if (auto g = gate_prediction(p, thing_mask)) gated.push_back(std::move(*g));
    }
    return gated;
  };

  const int h = preds.semantic.height;
  const int w = preds.semantic.width;

  OmniPseudoLabel label;
  const std::vector<InstancePrediction> gated_instance = gate_all(preds.instance);
  const std::vector<InstancePrediction> gated_amodal = gate_all(preds.amodal);
  label.certain_instance = select_certain_objects(gated_instance, th.instance, Branch::Instance);
  label.certain_amodal = select_certain_objects(gated_amodal, th.amodal, Branch::Amodal);
  label.uncertain_instance = compute_uncertain_region(gated_instance, label.certain_instance, h, w);
  label.uncertain_amodal = compute_uncertain_region(gated_amodal, label.certain_amodal, h, w);
  label.semantic = generate_semantic_pseudo_label(preds.semantic, classes, th.semantic, pixel_seq_base);
  return label;
}

LossResult uncertainty_guided_bce(const std::vector<double>& prob, const BinaryMask& target,
                                  const BinaryMask& uncertain) {
  if (!target.same_shape(uncertain)) {
    throw DimensionMismatch("uncertainty_guided_bce: target vs uncertain shape");
  }
  const std::size_t n = target.pixel_count();
  if (prob.size() != n) {
    throw DimensionMismatch("uncertainty_guided_bce: probability grid has " +
                            std::to_string(prob.size()) + " entries, masks have " +
                            std::to_string(n) + " pixels");
  }
  LossResult out;
  out.gradient.assign(n, 0.0);
  if (n == 0) return out;

  const int w = target.width();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int r = static_cast<int>(i) / w;
    const int c = static_cast<int>(i) % w;
    if (uncertain.get(r, c)) continue;
    const double p = std::clamp(prob[i], kProbClamp, 1.0 - kProbClamp);
    const double y = target.get(r, c) ? 1.0 : 0.0;
    sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    out.gradient[i] = (-y / p + (1.0 - y) / (1.0 - p)) / static_cast<double>(n);
  }
  out.loss = sum / static_cast<double>(n);
  return out;
}

LossResult masked_cross_entropy(const SemanticPrediction& sem, const SemanticMap& target,
                                const ClassTable& classes) {
  if (sem.height != target.height || sem.width != target.width) {
    throw DimensionMismatch("masked_cross_entropy: prediction vs target shape");
  }
  if (static_cast<int>(classes.size()) != sem.num_classes) {
    throw DimensionMismatch("masked_cross_entropy: plane/class count mismatch");
  }
  // Map class ids to plane indices once.
  std::vector<int> plane_of(static_cast<std::size_t>(kMaxClassId) + 1, -1);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    plane_of[static_cast<std::size_t>(classes.defs()[i].id)] = static_cast<int>(i);
  }

  LossResult out;
  out.gradient.assign(sem.data.size(), 0.0);

  // First pass counts certain pixels so gradients use the final divisor.
  std::size_t certain = 0;
  for (std::uint8_t label : target.labels) {
    if (label == kUncertainLabel || label == kIgnoreLabel) continue;
    if (plane_of[label] < 0) {
      throw ConfigError("masked_cross_entropy: label " + std::to_string(label) +
                        " is not in the class table");
    }
    ++certain;
  }
  if (certain == 0) return out;

  double sum = 0.0;
  for (int r = 0; r < sem.height; ++r) {
    for (int c = 0; c < sem.width; ++c) {
      const std::uint8_t label = target.at(r, c);
      if (label == kUncertainLabel || label == kIgnoreLabel) continue;
      const int plane = plane_of[label];
      const double p = std::max(static_cast<double>(sem.at(plane, r, c)), kProbClamp);
      sum += -std::log(p);
      out.gradient[(static_cast<std::size_t>(plane) * sem.height + r) * sem.width + c] =
          -1.0 / (p * static_cast<double>(certain));
    }
  }
  out.loss = sum / static_cast<double>(certain);
  return out;
}

}  // namespace unlock
