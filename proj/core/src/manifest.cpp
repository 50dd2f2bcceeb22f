#include "unlock/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <utility>

#include <json.hpp>

#include "unlock/binio.hpp"
#include "unlock/errors.hpp"
#include "unlock/image.hpp"
#include "unlock/mask_io.hpp"

namespace unlock {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& file, const std::string& field,
                       const std::string& what) {
  throw ManifestError(file + ": " + field + ": " + what);
}

json parse_json_file(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ManifestError(path + ": " + e.what());
  }
}

void write_json_file(const json& j, const fs::path& path) {
  const std::string text = j.dump(2) + "\n";
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

const json& require(const json& j, const char* key, const std::string& file,
                    const std::string& field) {
  if (!j.is_object() || !j.contains(key)) {
    fail(file, field, "missing required field");
  }
  return j[key];
}

std::string require_string(const json& j, const char* key, const std::string& file,
                           const std::string& field) {
  const json& v = require(j, key, file, field);
  if (!v.is_string()) {
    fail(file, field, "expected a string");
  }
  return v.get<std::string>();
}

double require_number(const json& j, const char* key, const std::string& file,
                      const std::string& field) {
  const json& v = require(j, key, file, field);
  if (!v.is_number()) {
    fail(file, field, "expected a number");
  }
  return v.get<double>();
}

std::int64_t require_int(const json& j, const char* key, const std::string& file,
                         const std::string& field) {
  const json& v = require(j, key, file, field);
  if (!v.is_number_integer()) {
    fail(file, field, "expected an integer");
  }
  return v.get<std::int64_t>();
}

const json& require_array(const json& j, const char* key, const std::string& file,
                          const std::string& field) {
  const json& v = require(j, key, file, field);
  if (!v.is_array()) {
    fail(file, field, "expected an array");
  }
  return v;
}

std::string field_at(const std::string& base, const char* key, std::size_t index) {
  return base + "." + key + "[" + std::to_string(index) + "]";
}

json classes_to_json(const ClassTable& classes) {
  json out = json::array();
  for (const ClassDef& def : classes.defs()) {
    out.push_back(json{{"id", def.id},
                       {"name", def.name},
                       {"kind", def.kind == ClassKind::Thing ? "thing" : "stuff"}});
  }
  return out;
}

ClassTable classes_from_json(const json& root, const std::string& file) {
  const json& arr = require_array(root, "classes", file, "manifest");
  std::vector<ClassDef> defs;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string field = "classes[" + std::to_string(i) + "]";
    ClassDef def;
    def.id = ClassId(require_int(arr[i], "id", file, field + ".id"));
    def.name = require_string(arr[i], "name", file, field + ".name");
    const std::string kind = require_string(arr[i], "kind", file, field + ".kind");
    if (kind == "thing") {
      def.kind = ClassKind::Thing;
    } else if (kind == "stuff") {
      def.kind = ClassKind::Stuff;
    } else {
      fail(file, field + ".kind", "expected \"thing\" or \"stuff\"");
    }
    defs.push_back(std::move(def));
  }
  try {
    return ClassTable(std::move(defs));
  } catch (const ConfigError& e) {
    fail(file, "classes", e.what());
  }
}

// Resolves a manifest-relative reference; rejects empty and absolute paths so
// a manifest can never point outside its own tree by accident.
fs::path resolve(const std::string& file, const std::string& field, const std::string& ref) {
  if (ref.empty()) {
    fail(file, field, "empty file reference");
  }
  const fs::path p(ref);
  if (p.is_absolute()) {
    fail(file, field, "absolute paths are not allowed in manifests");
  }
  return fs::path(file).parent_path() / p;
}

BinaryMask load_mask_checked(const std::string& file, const std::string& field,
                             const std::string& ref, int height, int width) {
  const BinaryMask mask = read_mask(resolve(file, field, ref));
  if (mask.height() != height || mask.width() != width) {
    fail(file, field, "mask dimensions disagree with the image");
  }
  return mask;
}

double checked_score(const json& j, const std::string& file, const std::string& field) {
  const double score = require_number(j, "score", file, field + ".score");
  if (score < 0.0 || score > 1.0) {
    fail(file, field + ".score", "score outside [0, 1]");
  }
  return score;
}

ClassId checked_class(const json& j, const ClassTable& classes, const std::string& file,
                      const std::string& field) {
  const ClassId cls = ClassId(require_int(j, "class", file, field + ".class"));
  if (!classes.contains(cls)) {
    fail(file, field + ".class", "class id not in the class table");
  }
  return cls;
}

std::string mask_name(const std::string& id, const char* tag, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%s_%03zu.ulkm", tag, k);
  return id + buf;
}

json save_objects(const std::vector<InstancePrediction>& objects, const std::string& id,
                  const char* tag, const fs::path& dir) {
  json arr = json::array();
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const std::string name = mask_name(id, tag, k);
    write_mask(dir / name, objects[k].mask);
    arr.push_back(json{{"class", objects[k].class_id},
                       {"score", objects[k].score},
                       {"mask", name}});
  }
  return arr;
}

std::vector<InstancePrediction> load_objects(const json& image, const char* key,
                                             const ClassTable& classes, const std::string& file,
                                             const std::string& base, int height, int width) {
  const json& arr = require_array(image, key, file, base);
  std::vector<InstancePrediction> out;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string field = field_at(base, key, k);
    InstancePrediction pred;
    pred.class_id = checked_class(arr[k], classes, file, field);
    pred.score = checked_score(arr[k], file, field);
    pred.mask = load_mask_checked(file, field + ".mask",
                                  require_string(arr[k], "mask", file, field + ".mask"),
                                  height, width);
    if (pred.mask.empty()) {
      fail(file, field + ".mask", "object mask has no pixels");
    }
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Predictions
// ---------------------------------------------------------------------------

void save_prediction_dataset(const PredictionDataset& data, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);

  json images = json::array();
  for (const ImagePredictions& img : data.images) {
    write_pnm(root / (img.id + ".ppm"), img.image);
    write_semantic_prob(root / (img.id + ".ulkp"), img.semantic);
    json entry{{"id", img.id},
               {"height", img.image.height},
               {"width", img.image.width},
               {"image", img.id + ".ppm"},
               {"semantic_prob", img.id + ".ulkp"}};
    entry["instance"] = save_objects(img.instance, img.id, "inst", root);
    entry["amodal"] = save_objects(img.amodal, img.id, "amod", root);
    images.push_back(std::move(entry));
  }

  json manifest{{"classes", classes_to_json(data.classes)}, {"images", images}};
  write_json_file(manifest, root / "prediction_manifest.json");
}

PredictionDataset load_prediction_dataset(const std::string& manifest_path) {
  const json root = parse_json_file(manifest_path);
  PredictionDataset data;
  data.classes = classes_from_json(root, manifest_path);

  const json& images = require_array(root, "images", manifest_path, "manifest");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string base = "images[" + std::to_string(i) + "]";
    const json& entry = images[i];
    ImagePredictions img;
    img.id = require_string(entry, "id", manifest_path, base + ".id");
    const int height = int(require_int(entry, "height", manifest_path, base + ".height"));
    const int width = int(require_int(entry, "width", manifest_path, base + ".width"));
    if (height <= 0 || width <= 0) {
      fail(manifest_path, base + ".height", "image dimensions must be positive");
    }

    img.image = read_pnm(resolve(manifest_path, base + ".image",
                                 require_string(entry, "image", manifest_path, base + ".image")));
    if (img.image.height != height || img.image.width != width) {
      fail(manifest_path, base + ".image", "pixel dimensions disagree with the manifest");
    }

    img.semantic = read_semantic_prob(
        resolve(manifest_path, base + ".semantic_prob",
                require_string(entry, "semantic_prob", manifest_path, base + ".semantic_prob")));
    if (img.semantic.height != height || img.semantic.width != width) {
      fail(manifest_path, base + ".semantic_prob", "grid dimensions disagree with the manifest");
    }
    if (img.semantic.num_classes != int(data.classes.size())) {
      fail(manifest_path, base + ".semantic_prob",
           "plane count disagrees with the class table");
    }

    img.instance =
        load_objects(entry, "instance", data.classes, manifest_path, base, height, width);
    img.amodal = load_objects(entry, "amodal", data.classes, manifest_path, base, height, width);
    data.images.push_back(std::move(img));
  }

  data.assign_object_seqs();
  return data;
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

void save_ground_truth_dataset(const GroundTruthDataset& data, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);

  json images = json::array();
  for (const GroundTruthImage& img : data.images) {
    write_semantic_map(root / (img.id + "_sem.pgm"), img.semantic);
    json objects = json::array();
    for (std::size_t k = 0; k < img.objects.size(); ++k) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "_obj_%03zu", k);
      const std::string stem = img.id + buf;
      write_mask(root / (stem + "_amodal.ulkm"), img.objects[k].amodal);
      write_mask(root / (stem + "_visible.ulkm"), img.objects[k].visible);
      objects.push_back(json{{"class", img.objects[k].class_id},
                             {"depth", img.objects[k].depth},
                             {"amodal_mask", stem + "_amodal.ulkm"},
                             {"visible_mask", stem + "_visible.ulkm"}});
    }
    images.push_back(json{{"id", img.id},
                          {"height", img.height},
                          {"width", img.width},
                          {"semantic_map", img.id + "_sem.pgm"},
                          {"objects", objects}});
  }

  json manifest{{"classes", classes_to_json(data.classes)}, {"images", images}};
  write_json_file(manifest, root / "gt_manifest.json");
}

GroundTruthDataset load_ground_truth_dataset(const std::string& manifest_path) {
  const json root = parse_json_file(manifest_path);
  GroundTruthDataset data;
  data.classes = classes_from_json(root, manifest_path);

  const json& images = require_array(root, "images", manifest_path, "manifest");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string base = "images[" + std::to_string(i) + "]";
    const json& entry = images[i];
    GroundTruthImage img;
    img.id = require_string(entry, "id", manifest_path, base + ".id");
    img.height = int(require_int(entry, "height", manifest_path, base + ".height"));
    img.width = int(require_int(entry, "width", manifest_path, base + ".width"));
    if (img.height <= 0 || img.width <= 0) {
      fail(manifest_path, base + ".height", "image dimensions must be positive");
    }

    img.semantic = read_semantic_map(
        resolve(manifest_path, base + ".semantic_map",
                require_string(entry, "semantic_map", manifest_path, base + ".semantic_map")));
    if (img.semantic.height != img.height || img.semantic.width != img.width) {
      fail(manifest_path, base + ".semantic_map", "map dimensions disagree with the manifest");
    }
    for (std::uint8_t v : img.semantic.labels) {
      if (v == kIgnoreLabel) {
        continue;  // explicit don't-care pixels are allowed in ground truth
      }
      if (v == kUncertainLabel || !data.classes.contains(ClassId(v))) {
        fail(manifest_path, base + ".semantic_map",
             "label " + std::to_string(int(v)) + " not in the class table");
      }
    }

    const json& objects = require_array(entry, "objects", manifest_path, base);
    for (std::size_t k = 0; k < objects.size(); ++k) {
      const std::string field = field_at(base, "objects", k);
      GroundTruthObject obj;
      obj.class_id = checked_class(objects[k], data.classes, manifest_path, field);
      obj.depth = int(require_int(objects[k], "depth", manifest_path, field + ".depth"));
      obj.amodal = load_mask_checked(
          manifest_path, field + ".amodal_mask",
          require_string(objects[k], "amodal_mask", manifest_path, field + ".amodal_mask"),
          img.height, img.width);
      obj.visible = load_mask_checked(
          manifest_path, field + ".visible_mask",
          require_string(objects[k], "visible_mask", manifest_path, field + ".visible_mask"),
          img.height, img.width);
      if (obj.visible.empty()) {
        fail(manifest_path, field + ".visible_mask", "visible mask has no pixels");
      }
      if (!is_subset(obj.visible, obj.amodal)) {
        fail(manifest_path, field + ".visible_mask", "visible mask escapes the amodal mask");
      }
      img.objects.push_back(std::move(obj));
    }
    data.images.push_back(std::move(img));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Thresholds report
// ---------------------------------------------------------------------------

namespace {

json branch_to_json(const BranchThresholds& th) {
  json classes = json::object();
  for (const auto& [cls, rule] : th.per_class) {
    json entry{{"rule", rule.rule == ClassRule::Fixed ? "fixed" : "percentile"},
               {"cutoff", rule.cutoff},
               {"admitted", rule.admitted}};
    if (rule.rule == ClassRule::Percentile) {
      entry["tie_seq_limit"] = rule.tie_seq_limit;
    }
    classes[std::to_string(cls)] = std::move(entry);
  }
  return json{{"fix", th.fix}, {"per", th.per}, {"classes", classes}};
}

}  // namespace

void save_thresholds(const OmniThresholds& thresholds, const std::string& path) {
  json j{{"branches", json{{"semantic", branch_to_json(thresholds.semantic)},
                           {"instance", branch_to_json(thresholds.instance)},
                           {"amodal", branch_to_json(thresholds.amodal)}}}};
  write_json_file(j, path);
}

// ---------------------------------------------------------------------------
// Pseudo labels / mixed data
// ---------------------------------------------------------------------------

namespace {

// Shared body for pseudo-label and mixed-data entries; both hold the same
// label set, mixed entries add pixels and a paste log on top.
json label_entry(const OmniPseudoLabel& label, const std::string& id, const fs::path& dir) {
  write_semantic_map(dir / (id + "_sem.pgm"), label.semantic);
  write_mask(dir / (id + "_unc_inst.ulkm"), label.uncertain_instance);
  write_mask(dir / (id + "_unc_amod.ulkm"), label.uncertain_amodal);
  json entry{{"id", id},
             {"height", label.semantic.height},
             {"width", label.semantic.width},
             {"semantic_map", id + "_sem.pgm"},
             {"uncertain_instance", id + "_unc_inst.ulkm"},
             {"uncertain_amodal", id + "_unc_amod.ulkm"}};
  entry["instance"] = save_objects(label.certain_instance, id, "cert_inst", dir);
  entry["amodal"] = save_objects(label.certain_amodal, id, "cert_amod", dir);
  return entry;
}

}  // namespace

void save_pseudo_labels(const std::vector<OmniPseudoLabel>& labels,
                        const PredictionDataset& source, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  json images = json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    images.push_back(label_entry(labels[i], source.images[i].id, root));
  }
  json manifest{{"classes", classes_to_json(source.classes)}, {"images", images}};
  write_json_file(manifest, root / "pseudo_labels.json");
}

void save_mixed(const std::vector<MixedSample>& mixed, const std::vector<std::string>& ids,
                const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  json images = json::array();
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    json entry = label_entry(mixed[i].labels, ids[i], root);
    write_pnm(root / (ids[i] + ".ppm"), mixed[i].image);
    entry["image"] = ids[i] + ".ppm";
    json log = json::array();
    for (const PasteOutcome& p : mixed[i].paste_log) {
      log.push_back(json{{"pool_index", p.pool_index}, {"kept", p.kept}});
    }
    entry["paste_log"] = std::move(log);
    images.push_back(std::move(entry));
  }
  json manifest{{"images", images}};
  write_json_file(manifest, root / "mixed_manifest.json");
}

// ---------------------------------------------------------------------------
// Object pool
// ---------------------------------------------------------------------------

void save_pool(const ObjectPool& pool, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  json objects = json::array();
  for (std::size_t k = 0; k < pool.objects.size(); ++k) {
    const PoolObject& obj = pool.objects[k];
    char buf[32];
    std::snprintf(buf, sizeof(buf), "obj_%04zu", k);
    const std::string stem = buf;
    const std::string pix = stem + (obj.pixels.channels == 1 ? "_pix.pgm" : "_pix.ppm");
    write_mask(root / (stem + "_full.ulkm"), obj.o_ful);
    write_mask(root / (stem + "_ovp.ulkm"), obj.o_ovp);
    write_pnm(root / pix, obj.pixels);
    objects.push_back(json{{"class", obj.class_id},
                           {"score", obj.score},
                           {"source_image_id", obj.source_image_id},
                           {"full_mask", stem + "_full.ulkm"},
                           {"overlap_mask", stem + "_ovp.ulkm"},
                           {"pixels", pix}});
  }
  write_json_file(json{{"objects", objects}}, root / "index.json");
}

ObjectPool load_pool(const std::string& dir) {
  const std::string file = (fs::path(dir) / "index.json").string();
  const json root = parse_json_file(file);
  const json& arr = require_array(root, "objects", file, "index");

  ObjectPool pool;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string field = "objects[" + std::to_string(k) + "]";
    PoolObject obj;
    obj.class_id = ClassId(require_int(arr[k], "class", file, field + ".class"));
    obj.score = checked_score(arr[k], file, field);
    obj.source_image_id =
        require_string(arr[k], "source_image_id", file, field + ".source_image_id");
    obj.o_ful = read_mask(resolve(
        file, field + ".full_mask", require_string(arr[k], "full_mask", file, field + ".full_mask")));
    obj.o_ovp = read_mask(
        resolve(file, field + ".overlap_mask",
                require_string(arr[k], "overlap_mask", file, field + ".overlap_mask")));
    obj.pixels = read_pnm(
        resolve(file, field + ".pixels", require_string(arr[k], "pixels", file, field + ".pixels")));
    try {
      obj.validate();
    } catch (const Error& e) {
      fail(file, field, e.what());
    }
    const BinaryMask::Box box = obj.o_ful.bounding_box();
    if (obj.pixels.height != box.box_height() || obj.pixels.width != box.box_width()) {
      fail(file, field + ".pixels", "crop dimensions disagree with the mask bounding box");
    }
    pool.objects.push_back(std::move(obj));
  }
  return pool;
}

// ---------------------------------------------------------------------------
// Fused outputs
// ---------------------------------------------------------------------------

void write_id_grid(const PanopticMap& map, const std::string& path) {
  ByteWriter w;
  for (std::uint32_t id : map.segment_ids) {
    w.u32le(id);
  }
  write_file_bytes(path, w.take());
}

namespace {

std::vector<std::uint32_t> read_id_grid(const std::string& path, int height, int width,
                                        const std::string& file, const std::string& field) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  const std::size_t expected = std::size_t(height) * std::size_t(width) * 4;
  if (bytes.size() != expected) {
    fail(file, field, "grid file size disagrees with the image dimensions");
  }
  ByteReader r(bytes, path);
  std::vector<std::uint32_t> grid(std::size_t(height) * std::size_t(width));
  for (std::uint32_t& v : grid) {
    v = r.u32le();
  }
  return grid;
}

json panoptic_to_json(const PanopticMap& map, const std::string& id, const char* tag,
                      bool with_amodal, const fs::path& dir) {
  const std::string grid = id + "_" + tag + ".u32";
  write_id_grid(map, (dir / grid).string());
  json segments = json::array();
  for (std::size_t k = 0; k < map.segments.size(); ++k) {
    const PanopticSegment& seg = map.segments[k];
    json entry{{"id", seg.id}, {"class", seg.class_id}, {"score", seg.score}};
    if (with_amodal) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "_%s_seg_%03zu_amodal.ulkm", tag, k);
      const std::string name = id + buf;
      // A segment with no attached amodal mask falls back to its visible one.
      write_mask(dir / name, seg.amodal ? *seg.amodal : seg.visible);
      entry["amodal"] = name;
    }
    segments.push_back(std::move(entry));
  }
  return json{{"grid", grid}, {"segments", segments}};
}

PanopticMap panoptic_from_json(const json& j, const SemanticMap& class_map, int height,
                               int width, bool with_amodal, const std::string& file,
                               const std::string& base) {
  PanopticMap map;
  map.height = height;
  map.width = width;
  map.class_map = class_map;
  map.segment_ids = read_id_grid(
      resolve(file, base + ".grid", require_string(j, "grid", file, base + ".grid")).string(),
      height, width, file, base + ".grid");

  const json& segments = require_array(j, "segments", file, base);
  std::vector<BinaryMask> visibles;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const std::string field = field_at(base, "segments", k);
    PanopticSegment seg;
    seg.id = std::uint32_t(require_int(segments[k], "id", file, field + ".id"));
    if (seg.id == 0) {
      fail(file, field + ".id", "segment ids are 1-based");
    }
    seg.class_id = ClassId(require_int(segments[k], "class", file, field + ".class"));
    seg.score = checked_score(segments[k], file, field);
    seg.seq = k;
    seg.visible = BinaryMask(height, width);
    if (with_amodal) {
      seg.amodal = read_mask(resolve(
          file, field + ".amodal", require_string(segments[k], "amodal", file, field + ".amodal")));
      if (seg.amodal->height() != height || seg.amodal->width() != width) {
        fail(file, field + ".amodal", "mask dimensions disagree with the image");
      }
    }
    map.segments.push_back(std::move(seg));
  }

  // Rebuild visible masks from the grid; every non-zero id must be declared.
  std::map<std::uint32_t, std::size_t> by_id;
  for (std::size_t k = 0; k < map.segments.size(); ++k) {
    if (!by_id.emplace(map.segments[k].id, k).second) {
      fail(file, base, "duplicate segment id " + std::to_string(map.segments[k].id));
    }
  }
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const std::uint32_t id = map.segment_ids[std::size_t(r) * width + c];
      if (id == 0) {
        continue;
      }
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        fail(file, base + ".grid", "grid references undeclared segment id " + std::to_string(id));
      }
      map.segments[it->second].visible.set(r, c, true);
    }
  }
  for (PanopticSegment& seg : map.segments) {
    if (seg.amodal) {
      seg.amodal = mask_or(*seg.amodal, seg.visible);
    }
  }

  try {
    map.validate();
  } catch (const Error& e) {
    fail(file, base, e.what());
  }
  return map;
}

}  // namespace

void save_fused(const std::vector<FusedOutputs>& fused, const std::vector<std::string>& ids,
                const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  json images = json::array();
  for (std::size_t i = 0; i < fused.size(); ++i) {
    const FusedOutputs& f = fused[i];
    const std::string& id = ids[i];
    write_semantic_map(root / (id + "_sem.pgm"), f.semantic);
    json entry{{"id", id},
               {"height", f.semantic.height},
               {"width", f.semantic.width},
               {"semantic", id + "_sem.pgm"}};
    entry["instances"] = save_objects(f.instances, id, "inst", root);
    entry["amodal_instances"] = save_objects(f.amodal_instances, id, "amod", root);
    entry["panoptic"] = panoptic_to_json(f.panoptic, id, "pan", false, root);
    entry["amodal_panoptic"] = panoptic_to_json(f.amodal_panoptic, id, "apan", true, root);
    images.push_back(std::move(entry));
  }
  write_json_file(json{{"images", images}}, root / "fused_index.json");
}

std::vector<FusedOutputs> load_fused(const std::string& dir, std::vector<std::string>* ids) {
  const std::string file = (fs::path(dir) / "fused_index.json").string();
  const json root = parse_json_file(file);
  const json& images = require_array(root, "images", file, "index");

  // Loose class table: instance loading only checks membership, and fused
  // files may reference any id below the reserved band.
  std::vector<ClassDef> any;
  for (ClassId c = 0; c <= kMaxClassId; ++c) {
    any.push_back({c, "c" + std::to_string(c), ClassKind::Thing});
  }
  const ClassTable permissive(std::move(any));

  std::vector<FusedOutputs> out;
  std::uint64_t inst_seq = 0;
  std::uint64_t amod_seq = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string base = "images[" + std::to_string(i) + "]";
    const json& entry = images[i];
    if (ids) {
      ids->push_back(require_string(entry, "id", file, base + ".id"));
    }
    const int height = int(require_int(entry, "height", file, base + ".height"));
    const int width = int(require_int(entry, "width", file, base + ".width"));
    if (height <= 0 || width <= 0) {
      fail(file, base + ".height", "image dimensions must be positive");
    }

    FusedOutputs f;
    f.semantic = read_semantic_map(
        resolve(file, base + ".semantic", require_string(entry, "semantic", file, base + ".semantic")));
    if (f.semantic.height != height || f.semantic.width != width) {
      fail(file, base + ".semantic", "map dimensions disagree with the index");
    }
    f.instances = load_objects(entry, "instances", permissive, file, base, height, width);
    f.amodal_instances =
        load_objects(entry, "amodal_instances", permissive, file, base, height, width);
    for (InstancePrediction& p : f.instances) {
      p.object_seq = inst_seq++;
    }
    for (InstancePrediction& p : f.amodal_instances) {
      p.object_seq = amod_seq++;
    }
    f.panoptic = panoptic_from_json(require(entry, "panoptic", file, base + ".panoptic"),
                                    f.semantic, height, width, false, file, base + ".panoptic");
    f.amodal_panoptic =
        panoptic_from_json(require(entry, "amodal_panoptic", file, base + ".amodal_panoptic"),
                           f.semantic, height, width, true, file, base + ".amodal_panoptic");
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace unlock
