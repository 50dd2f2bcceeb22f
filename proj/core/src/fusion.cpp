#include "unlock/fusion.hpp"

#include <algorithm>

#include "unlock/matching.hpp"

namespace unlock {

void PanopticMap::validate() const {
  if (class_map.height != height || class_map.width != width) {
    throw DimensionMismatch("PanopticMap: class map shape");
  }
  if (segment_ids.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionMismatch("PanopticMap: id grid size");
  }
  BinaryMask claimed(height, width);
  for (const PanopticSegment& seg : segments) {
    if (seg.id == 0) throw ConfigError("PanopticMap: segment with reserved id 0");
    if (seg.visible.empty()) throw ConfigError("PanopticMap: segment with empty visible mask");
    if (intersects(claimed, seg.visible)) {
      throw ConfigError("PanopticMap: overlapping visible masks");
    }
    claimed = mask_or(claimed, seg.visible);
    if (seg.amodal && !is_subset(seg.visible, *seg.amodal)) {
      throw ConfigError("PanopticMap: visible mask escapes amodal mask");
    }
  }
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const std::uint32_t id = segment_at(r, c);
      bool inside = false;
      for (const PanopticSegment& seg : segments) {
        if (seg.visible.get(r, c)) {
          inside = true;
          if (seg.id != id) throw ConfigError("PanopticMap: id grid disagrees with a mask");
          if (class_map.at(r, c) != seg.class_id) {
            throw ConfigError("PanopticMap: class map disagrees with a segment class");
          }
        }
      }
      if (!inside && id != 0) throw ConfigError("PanopticMap: dangling segment id in grid");
    }
  }
}

FusedOutputs fuse_outputs(const SemanticPrediction& sem,
                          const std::vector<InstancePrediction>& instances,
                          const std::vector<InstancePrediction>& amodal,
                          const ClassTable& classes, double confidence_floor) {
  if (static_cast<int>(classes.size()) != sem.num_classes) {
    throw DimensionMismatch("fuse_outputs: plane/class count mismatch");
  }
  const int h = sem.height;
  const int w = sem.width;

  FusedOutputs out;
  for (const InstancePrediction& p : instances) {
    if (p.score >= confidence_floor) out.instances.push_back(p);
  }
  for (const InstancePrediction& p : amodal) {
    if (p.score >= confidence_floor) out.amodal_instances.push_back(p);
  }

  // Paint order: best score first, object_seq breaks ties.
  std::vector<std::size_t> order(out.instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out.instances[a].score != out.instances[b].score) {
      return out.instances[a].score > out.instances[b].score;
    }
    return out.instances[a].object_seq < out.instances[b].object_seq;
  });

  PanopticMap pan;
  pan.height = h;
  pan.width = w;
  pan.class_map = SemanticMap(h, w);
  pan.segment_ids.assign(static_cast<std::size_t>(h) * w, 0);

  BinaryMask claimed(h, w);
  for (std::size_t idx : order) {
    const InstancePrediction& p = out.instances[idx];
    if (p.mask.height() != h || p.mask.width() != w) {
      throw DimensionMismatch("fuse_outputs: instance mask shape vs semantic grid");
    }
    const BinaryMask visible = mask_diff(p.mask, claimed);
    if (visible.empty()) continue;  // fully hidden behind better instances
    claimed = mask_or(claimed, visible);
    PanopticSegment seg;
    seg.id = static_cast<std::uint32_t>(pan.segments.size() + 1);
    seg.class_id = p.class_id;
    seg.score = p.score;
    seg.seq = p.object_seq;
    seg.visible = visible;
    pan.segments.push_back(std::move(seg));
  }

  // Pixel labels: claimed pixels take their segment's class, the rest fall
  // back to the semantic argmax (things included, without a segment id).
  for (const PanopticSegment& seg : pan.segments) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (seg.visible.get(r, c)) {
          pan.class_map.at(r, c) = static_cast<std::uint8_t>(seg.class_id);
          pan.segment_ids[static_cast<std::size_t>(r) * w + c] = seg.id;
        }
      }
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!claimed.get(r, c)) {
        pan.class_map.at(r, c) =
            static_cast<std::uint8_t>(classes.defs()[sem.argmax_index(r, c)].id);
      }
    }
  }

  // Amodal attachment on the painted segments.
  std::vector<InstancePrediction> seg_as_pred(pan.segments.size());
  for (std::size_t i = 0; i < pan.segments.size(); ++i) {
    seg_as_pred[i].class_id = pan.segments[i].class_id;
    seg_as_pred[i].score = pan.segments[i].score;
    seg_as_pred[i].mask = pan.segments[i].visible;
    seg_as_pred[i].object_seq = pan.segments[i].seq;
  }
  const std::vector<int> attach = match_amodal_to_visible(seg_as_pred, out.amodal_instances);

  PanopticMap apan = pan;
  for (std::size_t i = 0; i < apan.segments.size(); ++i) {
    if (attach[i] >= 0) {
      // Widen to contain the visible mask so occlusion never shrinks extent.
      apan.segments[i].amodal =
          mask_or(out.amodal_instances[static_cast<std::size_t>(attach[i])].mask,
                  apan.segments[i].visible);
    } else {
      apan.segments[i].amodal = apan.segments[i].visible;
    }
  }

  out.semantic = pan.class_map;
  out.panoptic = std::move(pan);
  out.amodal_panoptic = std::move(apan);
  return out;
}

PanopticMap panoptic_from_ground_truth(const GroundTruthImage& gt) {
  PanopticMap pan;
  pan.height = gt.height;
  pan.width = gt.width;
  pan.class_map = gt.semantic;
  pan.segment_ids.assign(static_cast<std::size_t>(gt.height) * gt.width, 0);
  for (const GroundTruthObject& obj : gt.objects) {
    PanopticSegment seg;
    seg.id = static_cast<std::uint32_t>(pan.segments.size() + 1);
    seg.class_id = obj.class_id;
    seg.score = 1.0;
    seg.seq = pan.segments.size();
    seg.visible = obj.visible;
    seg.amodal = mask_or(obj.amodal, obj.visible);
    for (int r = 0; r < gt.height; ++r) {
      for (int c = 0; c < gt.width; ++c) {
        if (obj.visible.get(r, c)) {
          pan.segment_ids[static_cast<std::size_t>(r) * gt.width + c] = seg.id;
        }
      }
    }
    pan.segments.push_back(std::move(seg));
  }
  return pan;
}

}  // namespace unlock
