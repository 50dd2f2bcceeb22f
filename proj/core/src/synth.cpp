#include "unlock/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "unlock/errors.hpp"
#include "unlock/rng.hpp"

namespace unlock {
namespace {

struct Extents {
  int lo;
  int hi;
};

int irange(SplitMix64& rng, int lo, int hi) { return int(rng.range(lo, hi)); }

Extents extent_bounds(const SceneConfig& config) {
  const int frame = std::min(config.height, config.width);
  int lo = config.min_extent > 0 ? config.min_extent : std::max(2, frame / 8);
  int hi = config.max_extent > 0 ? config.max_extent : std::max(lo, frame / 2);
  lo = std::min(lo, frame);
  hi = std::min(std::max(hi, lo), frame);
  return {lo, hi};
}

BinaryMask rect_mask(int height, int width, int r0, int c0, int h, int w) {
  BinaryMask mask(height, width);
  for (int r = r0; r < r0 + h; ++r) {
    for (int c = c0; c < c0 + w; ++c) {
      mask.set(r, c, true);
    }
  }
  return mask;
}

BinaryMask ellipse_mask(int height, int width, int cr, int cc, int ra, int rc) {
  BinaryMask mask(height, width);
  const std::int64_t a2 = std::int64_t(ra) * ra;
  const std::int64_t b2 = std::int64_t(rc) * rc;
  for (int r = std::max(0, cr - ra); r <= std::min(height - 1, cr + ra); ++r) {
    const std::int64_t dr = r - cr;
    for (int c = std::max(0, cc - rc); c <= std::min(width - 1, cc + rc); ++c) {
      const std::int64_t dc = c - cc;
      if (dr * dr * b2 + dc * dc * a2 <= a2 * b2) {
        mask.set(r, c, true);
      }
    }
  }
  return mask;
}

// Stable pseudo-random color for an object; mixing the class id in keeps
// same-class objects in related hues only by accident, which is fine.
void object_color(std::uint64_t scene_seed, std::size_t index, ClassId cls,
                  std::uint8_t rgb[3]) {
  SplitMix64 rng(scene_seed ^ (0x9E3779B97F4A7C15ull * (index + 1)) ^
                 (0xBF58476D1CE4E5B9ull * std::uint64_t(cls + 7)));
  const std::uint64_t bits = rng.next();
  rgb[0] = std::uint8_t(40 + (bits & 0xFF) * 4 / 5);
  rgb[1] = std::uint8_t(40 + ((bits >> 8) & 0xFF) * 4 / 5);
  rgb[2] = std::uint8_t(40 + ((bits >> 16) & 0xFF) * 4 / 5);
}

void stuff_color(ClassId cls, std::uint8_t rgb[3]) {
  SplitMix64 rng(0x243F6A8885A308D3ull + std::uint64_t(cls));
  const std::uint64_t bits = rng.next();
  rgb[0] = std::uint8_t(16 + (bits & 0x3F));
  rgb[1] = std::uint8_t(16 + ((bits >> 8) & 0x3F));
  rgb[2] = std::uint8_t(16 + ((bits >> 16) & 0x3F));
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  const std::uint64_t inter = intersection_area(a, b);
  const std::uint64_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

}  // namespace

void SceneConfig::validate() const {
  if (height < 8 || width < 8) {
    throw ConfigError("scene: height and width must be at least 8");
  }
  if (min_objects < 0 || max_objects < min_objects) {
    throw ConfigError("scene: object count range is invalid");
  }
  if (min_extent < 0 || max_extent < 0 || (max_extent > 0 && max_extent < min_extent)) {
    throw ConfigError("scene: extent range is invalid");
  }
  if (classes.stuff_ids().empty()) {
    throw ConfigError("scene: palette needs at least one stuff class for the background");
  }
  const bool wants_objects = max_objects > 0 || rare_per_scene > 0;
  if (wants_objects && classes.thing_ids().empty()) {
    throw ConfigError("scene: palette needs a thing class to draw objects from");
  }
  if (rare_per_scene < 0) {
    throw ConfigError("scene: rare_per_scene must be non-negative");
  }
  if (rare_per_scene > 0) {
    if (!rare_class) {
      throw ConfigError("scene: rare_per_scene set without a rare class");
    }
    if (!classes.contains(*rare_class) || !classes.is_thing(*rare_class)) {
      throw ConfigError("scene: rare class must be a thing class in the palette");
    }
  }
}

void NoiseConfig::validate() const {
  if (mask_radius < 0) {
    throw ConfigError("noise: mask_radius must be non-negative");
  }
  if (score_jitter < 0.0 || miss_rate < 0.0 || miss_rate > 1.0 || spurious_rate < 0.0) {
    throw ConfigError("noise: rates out of range");
  }
  if (semantic_softening < 0.0 || semantic_softening >= 0.5) {
    throw ConfigError("noise: semantic_softening must be in [0, 0.5)");
  }
  for (const auto& [cls, scores] : score_schedule) {
    if (scores.empty()) {
      throw ConfigError("noise: empty score schedule for class " + std::to_string(cls));
    }
    for (double s : scores) {
      if (s < 0.0 || s > 1.0) {
        throw ConfigError("noise: scheduled scores must be in [0, 1]");
      }
    }
  }
}

SyntheticScene generate_scene(const SceneConfig& config, std::uint64_t seed) {
  config.validate();
  SplitMix64 rng(seed);
  const int h = config.height;
  const int w = config.width;

  // Class pool for the random draw; the rare class only enters via the
  // explicit per-scene quota.
  std::vector<ClassId> draw_pool;
  for (ClassId cls : config.classes.thing_ids()) {
    if (!(config.rare_class && cls == *config.rare_class)) {
      draw_pool.push_back(cls);
    }
  }

  struct Draft {
    ClassId cls;
    BinaryMask amodal;
  };
  std::vector<Draft> drafts;

  const Extents ext = extent_bounds(config);
  const std::size_t regular =
      std::size_t(rng.range(config.min_objects, config.max_objects));
  const std::size_t total = regular + std::size_t(config.rare_per_scene);

  for (std::size_t i = 0; i < total; ++i) {
    const bool rare_slot = i >= regular;
    ClassId cls;
    if (rare_slot) {
      cls = *config.rare_class;
    } else if (!draw_pool.empty()) {
      cls = draw_pool[rng.below(draw_pool.size())];
    } else {
      cls = *config.rare_class;  // palette held only the rare thing class
    }

    bool ellipse = false;
    switch (config.shapes) {
      case SceneConfig::Shapes::Rect: break;
      case SceneConfig::Shapes::Ellipse: ellipse = true; break;
      case SceneConfig::Shapes::Both: ellipse = rng.coin(); break;
    }

    BinaryMask amodal(h, w);
    if (ellipse) {
      const int ra = std::max(1, irange(rng, ext.lo, ext.hi) / 2);
      const int rc = std::max(1, irange(rng, ext.lo, ext.hi) / 2);
      const int cr = irange(rng, ra, h - 1 - ra >= ra ? h - 1 - ra : ra);
      const int cc = irange(rng, rc, w - 1 - rc >= rc ? w - 1 - rc : rc);
      amodal = ellipse_mask(h, w, cr, cc, ra, rc);
    } else {
      const int oh = std::min(irange(rng, ext.lo, ext.hi), h);
      const int ow = std::min(irange(rng, ext.lo, ext.hi), w);
      const int r0 = irange(rng, 0, h - oh);
      const int c0 = irange(rng, 0, w - ow);
      amodal = rect_mask(h, w, r0, c0, oh, ow);
    }
    drafts.push_back({cls, std::move(amodal)});
  }

  // Visibility: each object keeps what no later (in-front) object covers.
  // Fully hidden objects are dropped from the ground truth entirely.
  SyntheticScene scene;
  scene.gt.height = h;
  scene.gt.width = w;
  BinaryMask cover(h, w);
  std::vector<BinaryMask> visibles(drafts.size(), BinaryMask(0, 0));
  for (std::size_t i = drafts.size(); i-- > 0;) {
    visibles[i] = mask_diff(drafts[i].amodal, cover);
    cover = mask_or(cover, drafts[i].amodal);
  }
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    if (visibles[i].empty()) {
      continue;
    }
    GroundTruthObject obj;
    obj.class_id = drafts[i].cls;
    obj.depth = int(i);
    obj.amodal = drafts[i].amodal;
    obj.visible = std::move(visibles[i]);
    scene.gt.objects.push_back(std::move(obj));
  }

  // Semantic map: stuff bands underneath, visible object pixels on top.
  const std::vector<ClassId>& stuff = config.classes.stuff_ids();
  SemanticMap sem;
  sem.height = h;
  sem.width = w;
  sem.labels.assign(std::size_t(h) * std::size_t(w), 0);
  for (int r = 0; r < h; ++r) {
    const std::size_t band = std::min(stuff.size() - 1, std::size_t(r) * stuff.size() / h);
    for (int c = 0; c < w; ++c) {
      sem.at(r, c) = std::uint8_t(stuff[band]);
    }
  }

  Image img;
  img.height = h;
  img.width = w;
  img.channels = 3;
  img.samples.assign(std::size_t(h) * std::size_t(w) * 3, 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::uint8_t rgb[3];
      stuff_color(ClassId(sem.at(r, c)), rgb);
      for (int ch = 0; ch < 3; ++ch) {
        img.at(r, c, ch) = rgb[ch];
      }
    }
  }

  for (std::size_t i = 0; i < scene.gt.objects.size(); ++i) {
    const GroundTruthObject& obj = scene.gt.objects[i];
    std::uint8_t rgb[3];
    object_color(seed, std::size_t(obj.depth), obj.class_id, rgb);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (obj.visible.get(r, c)) {
          sem.at(r, c) = std::uint8_t(obj.class_id);
          for (int ch = 0; ch < 3; ++ch) {
            img.at(r, c, ch) = rgb[ch];
          }
        }
      }
    }
  }

  scene.gt.semantic = std::move(sem);
  scene.image = std::move(img);
  return scene;
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  if (radius <= 0 || mask.empty()) {
    return mask;
  }
  BinaryMask out(mask.height(), mask.width());
  const BinaryMask::Box box = mask.bounding_box();
  for (int r = box.r0; r <= box.r1; ++r) {
    for (int c = box.c0; c <= box.c1; ++c) {
      bool keep = mask.get(r, c);
      for (int dr = -radius; keep && dr <= radius; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= mask.height()) {
          keep = false;
          break;
        }
        for (int dc = -radius; dc <= radius; ++dc) {
          const int cc = c + dc;
          if (cc < 0 || cc >= mask.width() || !mask.get(rr, cc)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) {
        out.set(r, c, true);
      }
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius <= 0 || mask.empty()) {
    return mask;
  }
  BinaryMask out(mask.height(), mask.width());
  const BinaryMask::Box box = mask.bounding_box();
  for (int r = std::max(0, box.r0 - radius);
       r <= std::min(mask.height() - 1, box.r1 + radius); ++r) {
    for (int c = std::max(0, box.c0 - radius);
         c <= std::min(mask.width() - 1, box.c1 + radius); ++c) {
      bool hit = false;
      for (int dr = -radius; !hit && dr <= radius; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= mask.height()) {
          continue;
        }
        for (int dc = -radius; dc <= radius; ++dc) {
          const int cc = c + dc;
          if (cc >= 0 && cc < mask.width() && mask.get(rr, cc)) {
            hit = true;
            break;
          }
        }
      }
      if (hit) {
        out.set(r, c, true);
      }
    }
  }
  return out;
}

namespace {

// Shared mask corruption: erode or dilate by the coin flip, falling back to
// the original when erosion wipes the mask out. Draw order is part of the
// output contract, so radius gates the flip draw and jitter gates its draw.
BinaryMask corrupt_mask(const BinaryMask& mask, const NoiseConfig& noise, SplitMix64& rng) {
  if (noise.mask_radius <= 0) {
    return mask;
  }
  if (rng.coin()) {
    BinaryMask eroded = erode(mask, noise.mask_radius);
    return eroded.empty() ? mask : eroded;
  }
  return dilate(mask, noise.mask_radius);
}

double noisy_score(double iou, const NoiseConfig& noise, SplitMix64& rng) {
  double score = iou;
  if (noise.score_jitter > 0.0) {
    score += rng.uniform(-noise.score_jitter, noise.score_jitter);
  }
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace

ImagePredictions simulate_predictions(const SyntheticScene& scene, const ClassTable& classes,
                                      const NoiseConfig& noise, std::uint64_t seed) {
  noise.validate();
  SplitMix64 rng(seed);
  const int h = scene.gt.height;
  const int w = scene.gt.width;

  ImagePredictions preds;
  preds.id = scene.gt.id;
  preds.image = scene.image;

  // Instance and amodal branches walk the objects in ground truth order with
  // independent noise. Scheduled classes replace the noisy score with the
  // next entry of their cycle; the cycle position is shared across branches
  // because both walks see the same objects in the same order.
  std::map<ClassId, std::size_t> schedule_pos_instance;
  std::map<ClassId, std::size_t> schedule_pos_amodal;
  auto scheduled = [&noise](std::map<ClassId, std::size_t>& pos, ClassId cls,
                            double fallback) {
    const auto it = noise.score_schedule.find(cls);
    if (it == noise.score_schedule.end()) {
      return fallback;
    }
    const double value = it->second[pos[cls] % it->second.size()];
    ++pos[cls];
    return value;
  };

  for (const GroundTruthObject& obj : scene.gt.objects) {
    const bool miss_instance = rng.unit() < noise.miss_rate;
    const bool miss_amodal = rng.unit() < noise.miss_rate;

    if (!miss_instance) {
      InstancePrediction p;
      p.class_id = obj.class_id;
      p.mask = corrupt_mask(obj.visible, noise, rng);
      p.score = scheduled(schedule_pos_instance, obj.class_id,
                          noisy_score(mask_iou(p.mask, obj.visible), noise, rng));
      preds.instance.push_back(std::move(p));
    }
    if (!miss_amodal) {
      InstancePrediction p;
      p.class_id = obj.class_id;
      p.mask = corrupt_mask(obj.amodal, noise, rng);
      p.score = scheduled(schedule_pos_amodal, obj.class_id,
                          noisy_score(mask_iou(p.mask, obj.amodal), noise, rng));
      preds.amodal.push_back(std::move(p));
    }
  }

  // Spurious detections: random rectangles of random thing classes. Their
  // score keeps the IoU-plus-jitter model against the best same-class truth,
  // which is near zero unless a fake happens to land on a real object.
  const std::vector<ClassId>& things = classes.thing_ids();
  if (noise.spurious_rate > 0.0 && !things.empty()) {
    for (int branch = 0; branch < 2; ++branch) {
      std::size_t count = std::size_t(noise.spurious_rate);
      if (rng.unit() < noise.spurious_rate - double(count)) {
        ++count;
      }
      for (std::size_t i = 0; i < count; ++i) {
        const ClassId cls = things[rng.below(things.size())];
        const int oh = irange(rng, 2, std::max(2, h / 4));
        const int ow = irange(rng, 2, std::max(2, w / 4));
        BinaryMask mask = rect_mask(h, w, irange(rng, 0, h - oh), irange(rng, 0, w - ow), oh, ow);
        double best = 0.0;
        for (const GroundTruthObject& obj : scene.gt.objects) {
          if (obj.class_id != cls) {
            continue;
          }
          best = std::max(best, mask_iou(mask, branch == 0 ? obj.visible : obj.amodal));
        }
        InstancePrediction p;
        p.class_id = cls;
        p.mask = std::move(mask);
        p.score = noisy_score(best, noise, rng);
        (branch == 0 ? preds.instance : preds.amodal).push_back(std::move(p));
      }
    }
  }

  // Semantic head: repaint the scene with per-branch-independent corrupted
  // visible masks, then soften the one-hot distribution.
  SemanticMap painted;
  painted.height = h;
  painted.width = w;
  painted.labels = scene.gt.semantic.labels;
  if (noise.mask_radius > 0) {
    // Strip the objects first: stuff pixels stay, object pixels revert to
    // their row's band colour (rows fully covered by objects fall back to the
    // first stuff class). Erosion then leaves background showing through.
    for (int r = 0; r < h; ++r) {
      std::uint8_t band = std::uint8_t(classes.stuff_ids().empty()
                                           ? 0
                                           : classes.stuff_ids().front());
      for (int c = 0; c < w; ++c) {
        const std::uint8_t v = scene.gt.semantic.at(r, c);
        if (classes.contains(ClassId(v)) && classes.is_stuff(ClassId(v))) {
          band = v;
          break;
        }
      }
      for (int c = 0; c < w; ++c) {
        const std::uint8_t v = scene.gt.semantic.at(r, c);
        const bool was_stuff = classes.contains(ClassId(v)) && classes.is_stuff(ClassId(v));
        painted.at(r, c) = was_stuff ? v : band;
      }
    }
    for (const GroundTruthObject& obj : scene.gt.objects) {
      const BinaryMask noisy = corrupt_mask(obj.visible, noise, rng);
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          if (noisy.get(r, c)) {
            painted.at(r, c) = std::uint8_t(obj.class_id);
          }
        }
      }
    }
  }

  const std::size_t num_classes = classes.size();
  SemanticPrediction sem;
  sem.height = h;
  sem.width = w;
  sem.num_classes = int(num_classes);
  sem.data.assign(num_classes * std::size_t(h) * std::size_t(w), 0.0f);
  const double off = num_classes > 1
                         ? noise.semantic_softening / double(num_classes - 1)
                         : 0.0;
  const double on = num_classes > 1 ? 1.0 - noise.semantic_softening : 1.0;
  std::vector<std::size_t> plane_of(std::size_t(kMaxClassId) + 1, 0);
  for (std::size_t i = 0; i < num_classes; ++i) {
    plane_of[std::size_t(classes.defs()[i].id)] = i;
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t hot = plane_of[painted.at(r, c)];
      for (std::size_t p = 0; p < num_classes; ++p) {
        sem.at(p, r, c) = float(p == hot ? on : off);
      }
    }
  }
  preds.semantic = std::move(sem);
  return preds;
}

void build_synth_dataset(const SynthDatasetConfig& config, GroundTruthDataset& gt,
                         PredictionDataset& preds) {
  config.scene.validate();
  config.noise.validate();
  gt.classes = config.scene.classes;
  preds.classes = config.scene.classes;
  gt.images.clear();
  preds.images.clear();

  SplitMix64 master(config.seed);
  for (std::size_t i = 0; i < config.image_count; ++i) {
    const std::uint64_t scene_seed = master.next();
    const std::uint64_t noise_seed = master.next();
    SyntheticScene scene = generate_scene(config.scene, scene_seed);
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04zu", i);
    scene.gt.id = name;
    ImagePredictions p =
        simulate_predictions(scene, config.scene.classes, config.noise, noise_seed);
    p.id = scene.gt.id;
    gt.images.push_back(std::move(scene.gt));
    preds.images.push_back(std::move(p));
  }
  preds.assign_object_seqs();
}

ClassTable default_palette() {
  return ClassTable({{0, "sky", ClassKind::Stuff},
                     {1, "ground", ClassKind::Stuff},
                     {2, "box", ClassKind::Thing},
                     {3, "disc", ClassKind::Thing},
                     {kDefaultRareClass, "marker", ClassKind::Thing}});
}

}  // namespace unlock
