#include "unlock/adcl.hpp"

#include <algorithm>

#include "unlock/matching.hpp"
#include "unlock/rng.hpp"

namespace unlock {

void PoolObject::validate() const {
  if (!o_ovp.same_shape(o_ful)) {
    throw DimensionMismatch("PoolObject: o_ovp shape differs from o_ful");
  }
  if (!is_subset(o_ovp, o_ful)) {
    throw ConfigError("PoolObject: o_ovp is not contained in o_ful");
  }
  if (o_ful.empty()) {
    throw ConfigError("PoolObject: empty full mask");
  }
  if (score < 0.0 || score > 1.0) {
    throw ConfigError("PoolObject: score outside [0, 1]");
  }
}

std::optional<PoolObject> admit_object(const InstancePrediction& candidate,
                                       const std::vector<InstancePrediction>& others,
                                       const Image& source, const std::string& source_image_id) {
  if (source.height != candidate.mask.height() || source.width != candidate.mask.width()) {
    throw DimensionMismatch("admit_object: source image " + std::to_string(source.height) + "x" +
                            std::to_string(source.width) + " vs mask " +
                            std::to_string(candidate.mask.height()) + "x" +
                            std::to_string(candidate.mask.width()));
  }
  BinaryMask overlap_union(candidate.mask.height(), candidate.mask.width());
  for (const InstancePrediction& other : others) {
    if (other.object_seq == candidate.object_seq) continue;
    overlap_union = mask_or(overlap_union, other.mask);
  }
  const BinaryMask o_ovp = mask_and(candidate.mask, overlap_union);
  if (2 * o_ovp.area() >= candidate.mask.area()) {
    return std::nullopt;
  }
  PoolObject obj;
  obj.class_id = candidate.class_id;
  obj.score = candidate.score;
  obj.o_ful = candidate.mask;
  obj.o_ovp = o_ovp;
  obj.source_image_id = source_image_id;
  const BinaryMask::Box box = candidate.mask.bounding_box();
  obj.pixels = crop(source, box.r0, box.c0, box.box_height(), box.box_width());
  return obj;
}

std::map<ClassId, std::size_t> ObjectPool::class_histogram() const {
  std::map<ClassId, std::size_t> hist;
  for (const PoolObject& obj : objects) ++hist[obj.class_id];
  return hist;
}

ObjectPool build_object_pool(const PredictionDataset& data, double strict_fix, double strict_per,
                             std::size_t capacity) {
  // Statistics pass over the thing-gated amodal branch.
  BranchStats stats(Branch::Amodal);
  std::vector<std::vector<InstancePrediction>> gated_per_image(data.images.size());
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const ImagePredictions& img = data.images[i];
    const BinaryMask thing_mask = compute_thing_mask(img.semantic, data.classes);
    for (const InstancePrediction& p : img.amodal) {
      if (auto g = gate_prediction(p, thing_mask)) gated_per_image[i].push_back(std::move(*g));
    }
    collect_instance_stats(stats, gated_per_image[i]);
  }
  const BranchThresholds strict = compute_cs_thresholds(stats, strict_fix, strict_per);

  ObjectPool pool;
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const std::vector<InstancePrediction> certain =
        select_certain_objects(gated_per_image[i], strict, Branch::Amodal);
    for (const InstancePrediction& candidate : certain) {
      if (auto obj = admit_object(candidate, gated_per_image[i], data.images[i].image,
                                  data.images[i].id)) {
        pool.objects.push_back(std::move(*obj));
      }
    }
  }

  if (pool.objects.size() > capacity) {
    // Keep the `capacity` highest scores; stable sort preserves dataset order
    // among equal scores and the survivors are put back in dataset order.
    std::vector<std::size_t> order(pool.objects.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pool.objects[a].score > pool.objects[b].score;
    });
    order.resize(capacity);
    std::sort(order.begin(), order.end());
    std::vector<PoolObject> kept;
    kept.reserve(capacity);
    for (std::size_t idx : order) kept.push_back(std::move(pool.objects[idx]));
    pool.objects = std::move(kept);
  }
  return pool;
}

std::vector<std::size_t> sample_without_replacement(SplitMix64& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t i = 0; i < k && i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
    picked.push_back(pool[i]);
  }
  return picked;
}

MixedSample spatial_aware_mix(const Image& base, const OmniPseudoLabel& base_labels,
                              const ObjectPool& pool, std::size_t count, std::uint64_t seed) {
  MixedSample out;
  out.image = base;
  out.labels = base_labels;
  if (pool.objects.empty() || count == 0) {
    return out;  // nothing to paste, mixing is the identity
  }

  for (const PoolObject& obj : pool.objects) {
    if (obj.o_ful.height() != base.height || obj.o_ful.width() != base.width) {
      throw DimensionMismatch("spatial_aware_mix: pool object mask " +
                              std::to_string(obj.o_ful.height()) + "x" +
                              std::to_string(obj.o_ful.width()) + " vs base image " +
                              std::to_string(base.height) + "x" + std::to_string(base.width));
    }
  }

  // Draw the paste sequence.
  SplitMix64 rng(seed);
  std::vector<std::size_t> draws;
  if (pool.objects.size() >= count) {
    draws = sample_without_replacement(rng, pool.objects.size(), count);
  } else {
    draws.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      draws.push_back(static_cast<std::size_t>(rng.below(pool.objects.size())));
    }
  }

  // Union of full masks of pastes strictly after position i decides both
  // visibility (fully covered means removed) and the pasted instance labels.
  std::vector<BinaryMask> later_union(draws.size());
  BinaryMask acc(base.height, base.width);
  for (std::size_t i = draws.size(); i-- > 0;) {
    later_union[i] = acc;
    acc = mask_or(acc, pool.objects[draws[i]].o_ful);
  }
  const BinaryMask& paste_union = acc;

  // Compose pixels and semantic labels front to back in paste order; later
  // pastes overwrite earlier ones.
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const PoolObject& obj = pool.objects[draws[i]];
    const BinaryMask::Box box = obj.o_ful.bounding_box();
    for (int r = box.r0; r <= box.r1; ++r) {
      for (int c = box.c0; c <= box.c1; ++c) {
        if (!obj.o_ful.get(r, c)) continue;
        const bool zeroed = obj.o_ovp.get(r, c);
        for (int ch = 0; ch < base.channels; ++ch) {
          out.image.at(r, c, ch) =
              zeroed ? 0 : obj.pixels.at(r - box.r0, c - box.c0, std::min(ch, obj.pixels.channels - 1));
        }
        out.labels.semantic.at(r, c) =
            zeroed ? kUncertainLabel : static_cast<std::uint8_t>(obj.class_id);
      }
    }
  }

  // Base objects buried under the paste union lose their labels. Amodal
  // labels ride along with the instance label they attach to.
  const std::vector<int> attached =
      match_amodal_to_visible(base_labels.certain_instance, base_labels.certain_amodal);
  std::vector<char> amodal_removed(base_labels.certain_amodal.size(), 0);
  std::vector<char> amodal_attached(base_labels.certain_amodal.size(), 0);
  for (int ai : attached) {
    if (ai >= 0) amodal_attached[static_cast<std::size_t>(ai)] = 1;
  }
  std::vector<InstancePrediction> kept_instance;
  for (std::size_t i = 0; i < base_labels.certain_instance.size(); ++i) {
    if (is_subset(base_labels.certain_instance[i].mask, paste_union)) {
      if (attached[i] >= 0) amodal_removed[static_cast<std::size_t>(attached[i])] = 1;
    } else {
      kept_instance.push_back(base_labels.certain_instance[i]);
    }
  }
  std::vector<InstancePrediction> kept_amodal;
  for (std::size_t i = 0; i < base_labels.certain_amodal.size(); ++i) {
    if (amodal_removed[i]) continue;
    if (!amodal_attached[i] && is_subset(base_labels.certain_amodal[i].mask, paste_union)) continue;
    kept_amodal.push_back(base_labels.certain_amodal[i]);
  }
  out.labels.certain_instance = std::move(kept_instance);
  out.labels.certain_amodal = std::move(kept_amodal);

  // Pasted area now carries definite labels, certain or explicitly uncertain.
  out.labels.uncertain_instance = mask_diff(base_labels.uncertain_instance, paste_union);
  out.labels.uncertain_amodal = mask_diff(base_labels.uncertain_amodal, paste_union);

  // Fresh label ordinals continue after the largest base ordinal per branch.
  std::uint64_t next_instance_seq = 0;
  for (const InstancePrediction& p : out.labels.certain_instance) {
    next_instance_seq = std::max(next_instance_seq, p.object_seq + 1);
  }
  std::uint64_t next_amodal_seq = 0;
  for (const InstancePrediction& p : out.labels.certain_amodal) {
    next_amodal_seq = std::max(next_amodal_seq, p.object_seq + 1);
  }

  for (std::size_t i = 0; i < draws.size(); ++i) {
    const PoolObject& obj = pool.objects[draws[i]];
    const BinaryMask visible_extent = mask_diff(obj.o_ful, later_union[i]);
    if (visible_extent.empty()) {
      out.paste_log.push_back({draws[i], false});
      continue;
    }
    out.paste_log.push_back({draws[i], true});
    InstancePrediction amodal_label;
    amodal_label.class_id = obj.class_id;
    amodal_label.score = obj.score;
    amodal_label.mask = obj.o_ful;
    amodal_label.object_seq = next_amodal_seq++;
    out.labels.certain_amodal.push_back(std::move(amodal_label));

    InstancePrediction instance_label;
    instance_label.class_id = obj.class_id;
    instance_label.score = obj.score;
    instance_label.mask = visible_extent;
    instance_label.object_seq = next_instance_seq++;
    out.labels.certain_instance.push_back(std::move(instance_label));
  }
  return out;
}

}  // namespace unlock
