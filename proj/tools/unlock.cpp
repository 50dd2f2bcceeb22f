// Command line front end for the adaptation pipeline. Every stage reads and
// writes manifest directories; see the README for the file formats. Machine
// logs go to stdout as JSON lines; data files never contain timestamps, so
// re-running a stage with the same inputs reproduces its outputs byte for
// byte.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unlock/binio.hpp"
#include "unlock/config.hpp"
#include "unlock/errors.hpp"
#include "unlock/manifest.hpp"
#include "unlock/pipeline.hpp"
#include "unlock/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void log_line(json fields) {
  fields["ts"] = now_iso8601();
  std::cout << fields.dump() << "\n";
}

unlock::PipelineConfig read_config(const std::string& path) {
  if (path.empty()) {
    return unlock::PipelineConfig{};
  }
  return unlock::load_config(path);
}

// Stage inputs may be given as the manifest file itself or as the directory
// holding it under its conventional name.
std::string locate(const std::string& arg, const char* filename) {
  const fs::path p(arg);
  if (fs::is_directory(p)) {
    return (p / filename).string();
  }
  return arg;
}

json report_to_json(const std::vector<unlock::MetricReport>& reports) {
  json metrics = json::object();
  json means = json::object();
  for (const unlock::MetricReport& r : reports) {
    json per_class = json::object();
    json counts = json::object();
    for (const auto& [cls, value] : r.per_class) {
      per_class[std::to_string(cls)] = value;
    }
    for (const auto& [cls, c] : r.counts) {
      counts[std::to_string(cls)] = json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
    }
    metrics[r.metric] = json{{"mean", r.mean},
                             {"mean_x100", r.mean * 100.0},
                             {"per_class", per_class},
                             {"counts", counts}};
    means[r.metric] = r.mean * 100.0;
  }
  return json{{"metrics", metrics}, {"means_x100", means}};
}

void print_report(const std::vector<unlock::MetricReport>& reports) {
  std::printf("%-6s %9s  per class (x100)\n", "metric", "mean_x100");
  for (const unlock::MetricReport& r : reports) {
    std::printf("%-6s %9.2f ", r.metric.c_str(), r.mean * 100.0);
    for (const auto& [cls, value] : r.per_class) {
      std::printf(" %d:%.2f", cls, value * 100.0);
    }
    std::printf("\n");
  }
}

void write_report(const std::vector<unlock::MetricReport>& reports, const fs::path& path) {
  const std::string text = report_to_json(reports).dump(2) + "\n";
  unlock::write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

struct SynthArgs {
  std::string out;
  std::size_t count = 8;
  std::uint64_t seed = 0;
  int height = 64;
  int width = 96;
  int min_objects = 2;
  int max_objects = 6;
  std::string shapes = "both";
  int mask_radius = 0;
  double score_jitter = 0.0;
  double miss_rate = 0.0;
  double spurious_rate = 0.0;
  double softening = 0.0;
  int rare_count = 0;
  std::vector<double> rare_scores;
};

void run_synth(const SynthArgs& a) {
  unlock::SynthDatasetConfig config;
  config.image_count = a.count;
  config.seed = a.seed;
  config.scene.height = a.height;
  config.scene.width = a.width;
  config.scene.min_objects = a.min_objects;
  config.scene.max_objects = a.max_objects;
  config.scene.classes = unlock::default_palette();
  if (a.shapes == "rect") {
    config.scene.shapes = unlock::SceneConfig::Shapes::Rect;
  } else if (a.shapes == "ellipse") {
    config.scene.shapes = unlock::SceneConfig::Shapes::Ellipse;
  } else if (a.shapes == "both") {
    config.scene.shapes = unlock::SceneConfig::Shapes::Both;
  } else {
    throw unlock::ConfigError("synth: unknown shape set " + a.shapes);
  }
  if (a.rare_count > 0) {
    config.scene.rare_class = unlock::kDefaultRareClass;
    config.scene.rare_per_scene = a.rare_count;
    if (!a.rare_scores.empty()) {
      config.noise.score_schedule[unlock::kDefaultRareClass] = a.rare_scores;
    }
  }
  config.noise.mask_radius = a.mask_radius;
  config.noise.score_jitter = a.score_jitter;
  config.noise.miss_rate = a.miss_rate;
  config.noise.spurious_rate = a.spurious_rate;
  config.noise.semantic_softening = a.softening;

  unlock::GroundTruthDataset gt;
  unlock::PredictionDataset preds;
  unlock::build_synth_dataset(config, gt, preds);
  unlock::save_ground_truth_dataset(gt, a.out);
  unlock::save_prediction_dataset(preds, a.out);

  std::size_t objects = 0;
  for (const unlock::GroundTruthImage& img : gt.images) {
    objects += img.objects.size();
  }
  log_line(json{{"stage", "synth"},
                {"status", "ok"},
                {"images", gt.images.size()},
                {"objects", objects},
                {"out", a.out}});
}

void run_thresholds(const std::string& manifest, const std::string& config_path,
                    const std::string& out, int jobs) {
  const unlock::PipelineConfig config = read_config(config_path);
  const unlock::PredictionDataset data =
      unlock::load_prediction_dataset(locate(manifest, "prediction_manifest.json"));
  const unlock::OmniThresholds th = unlock::compute_dataset_thresholds(data, config, jobs);
  unlock::save_thresholds(th, out);
  log_line(json{{"stage", "thresholds"},
                {"status", "ok"},
                {"images", data.images.size()},
                {"out", out}});
}

void run_pseudo_label(const std::string& manifest, const std::string& config_path,
                      const std::string& out, int jobs) {
  const unlock::PipelineConfig config = read_config(config_path);
  const unlock::PredictionDataset data =
      unlock::load_prediction_dataset(locate(manifest, "prediction_manifest.json"));
  const unlock::OmniThresholds th = unlock::compute_dataset_thresholds(data, config, jobs);
  const std::vector<unlock::OmniPseudoLabel> labels =
      unlock::generate_dataset_labels(data, th, jobs);
  unlock::save_pseudo_labels(labels, data, out);

  std::size_t certain = 0;
  for (const unlock::OmniPseudoLabel& l : labels) {
    certain += l.certain_instance.size() + l.certain_amodal.size();
  }
  log_line(json{{"stage", "pseudo-label"},
                {"status", "ok"},
                {"images", labels.size()},
                {"certain_objects", certain},
                {"out", out}});
}

void run_pool_build(const std::string& manifest, const std::string& config_path,
                    const std::string& out) {
  const unlock::PipelineConfig config = read_config(config_path);
  config.validate();
  const unlock::PredictionDataset data =
      unlock::load_prediction_dataset(locate(manifest, "prediction_manifest.json"));
  const unlock::ObjectPool pool = unlock::build_object_pool(
      data, config.strict.fix, config.strict.per, config.pool_capacity);
  unlock::save_pool(pool, out);
  log_line(json{{"stage", "pool-build"},
                {"status", "ok"},
                {"objects", pool.objects.size()},
                {"out", out}});
}

void run_mix(const std::string& manifest, const std::string& pool_dir,
             const std::string& config_path, const std::string& out, std::size_t count,
             bool count_set, std::uint64_t seed, bool seed_set, int jobs) {
  unlock::PipelineConfig config = read_config(config_path);
  if (count_set) {
    config.mix_count = count;
  }
  if (seed_set) {
    config.seed = seed;
  }
  const unlock::PredictionDataset data =
      unlock::load_prediction_dataset(locate(manifest, "prediction_manifest.json"));
  const unlock::ObjectPool pool = unlock::load_pool(pool_dir);
  const unlock::OmniThresholds th = unlock::compute_dataset_thresholds(data, config, jobs);
  const std::vector<unlock::OmniPseudoLabel> labels =
      unlock::generate_dataset_labels(data, th, jobs);
  const std::vector<unlock::MixedSample> mixed =
      unlock::mix_dataset(data, labels, pool, config, jobs);

  std::vector<std::string> ids;
  for (const unlock::ImagePredictions& img : data.images) {
    ids.push_back(img.id);
  }
  unlock::save_mixed(mixed, ids, out);

  std::size_t pastes = 0, kept = 0;
  for (const unlock::MixedSample& m : mixed) {
    pastes += m.paste_log.size();
    for (const unlock::PasteOutcome& p : m.paste_log) {
      kept += p.kept ? 1 : 0;
    }
  }
  log_line(json{{"stage", "mix"},
                {"status", "ok"},
                {"images", mixed.size()},
                {"pastes", pastes},
                {"kept", kept},
                {"out", out}});
}

void run_fuse(const std::string& manifest, const std::string& config_path,
              const std::string& out, double floor, bool floor_set, int jobs) {
  unlock::PipelineConfig config = read_config(config_path);
  if (floor_set) {
    config.confidence_floor = floor;
  }
  config.validate();
  const unlock::PredictionDataset data =
      unlock::load_prediction_dataset(locate(manifest, "prediction_manifest.json"));
  const std::vector<unlock::FusedOutputs> fused = unlock::fuse_dataset(data, config, jobs);
  std::vector<std::string> ids;
  for (const unlock::ImagePredictions& img : data.images) {
    ids.push_back(img.id);
  }
  unlock::save_fused(fused, ids, out);
  log_line(json{{"stage", "fuse"}, {"status", "ok"}, {"images", fused.size()}, {"out", out}});
}

void run_eval(const std::string& pred_dir, const std::string& gt_arg, const std::string& out) {
  const std::vector<unlock::FusedOutputs> fused = unlock::load_fused(pred_dir, nullptr);
  const unlock::GroundTruthDataset gt =
      unlock::load_ground_truth_dataset(locate(gt_arg, "gt_manifest.json"));
  const std::vector<unlock::MetricReport> reports = unlock::evaluate_outputs(fused, gt);
  if (!out.empty()) {
    write_report(reports, out);
  }
  print_report(reports);
}

void run_pipeline_cmd(const std::string& data_dir, const std::string& config_path,
                      const std::string& out, int jobs) {
  const unlock::PipelineConfig config = read_config(config_path);
  config.validate();
  const unlock::PredictionDataset data =
      unlock::load_prediction_dataset(locate(data_dir, "prediction_manifest.json"));
  const unlock::GroundTruthDataset gt =
      unlock::load_ground_truth_dataset(locate(data_dir, "gt_manifest.json"));

  const fs::path root(out);
  fs::create_directories(root);

  const unlock::OmniThresholds th = unlock::compute_dataset_thresholds(data, config, jobs);
  unlock::save_thresholds(th, (root / "thresholds.json").string());
  log_line(json{{"stage", "thresholds"}, {"status", "ok"}});

  const std::vector<unlock::OmniPseudoLabel> labels =
      unlock::generate_dataset_labels(data, th, jobs);
  unlock::save_pseudo_labels(labels, data, (root / "pseudo_labels").string());
  log_line(json{{"stage", "pseudo-label"}, {"status", "ok"}, {"images", labels.size()}});

  const unlock::ObjectPool pool = unlock::build_object_pool(
      data, config.strict.fix, config.strict.per, config.pool_capacity);
  unlock::save_pool(pool, (root / "pool").string());
  log_line(json{{"stage", "pool-build"}, {"status", "ok"}, {"objects", pool.objects.size()}});

  const std::vector<unlock::MixedSample> mixed =
      unlock::mix_dataset(data, labels, pool, config, jobs);
  std::vector<std::string> ids;
  for (const unlock::ImagePredictions& img : data.images) {
    ids.push_back(img.id);
  }
  unlock::save_mixed(mixed, ids, (root / "mixed").string());
  log_line(json{{"stage", "mix"}, {"status", "ok"}, {"images", mixed.size()}});

  const std::vector<unlock::FusedOutputs> fused = unlock::fuse_dataset(data, config, jobs);
  unlock::save_fused(fused, ids, (root / "fused").string());
  log_line(json{{"stage", "fuse"}, {"status", "ok"}, {"images", fused.size()}});

  const std::vector<unlock::MetricReport> reports = unlock::evaluate_outputs(fused, gt);
  write_report(reports, root / "report.json");
  log_line(json{{"stage", "eval"}, {"status", "ok"}});
  print_report(reports);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-free adaptation data pipeline"};
  app.require_subcommand(1);

  int jobs = 0;  // 0: UNLOCK_JOBS env, else 1
  app.add_option("--jobs", jobs, "Worker threads (default: UNLOCK_JOBS env or 1)");

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--count", synth.count, "Number of images");
  synth_cmd->add_option("--seed", synth.seed, "Master seed");
  synth_cmd->add_option("--height", synth.height, "Image height");
  synth_cmd->add_option("--width", synth.width, "Image width");
  synth_cmd->add_option("--min-objects", synth.min_objects, "Minimum objects per scene");
  synth_cmd->add_option("--max-objects", synth.max_objects, "Maximum objects per scene");
  synth_cmd->add_option("--shapes", synth.shapes, "Object shapes: rect, ellipse or both");
  synth_cmd->add_option("--mask-radius", synth.mask_radius,
                        "Erode or dilate predicted masks by this radius");
  synth_cmd->add_option("--score-jitter", synth.score_jitter, "Uniform score noise half-width");
  synth_cmd->add_option("--miss-rate", synth.miss_rate, "Probability of dropping a detection");
  synth_cmd->add_option("--spurious-rate", synth.spurious_rate,
                        "Expected fake detections per image per branch");
  synth_cmd->add_option("--softening", synth.softening,
                        "Probability mass moved off the semantic argmax");
  synth_cmd->add_option("--rare-count", synth.rare_count,
                        "Guaranteed objects of the rare class per scene");
  synth_cmd->add_option("--rare-scores", synth.rare_scores,
                        "Fixed score cycle for the rare class");

  std::string manifest, config_path, out, pool_dir, pred_dir, gt_arg, data_dir;
  std::size_t mix_count = 0;
  std::uint64_t mix_seed = 0;
  double floor = 0.0;

  CLI::App* th_cmd = app.add_subcommand("thresholds", "Compute class-wise selection rules");
  th_cmd->add_option("--manifest", manifest, "Prediction manifest (file or directory)")
      ->required();
  th_cmd->add_option("--config", config_path, "Pipeline config JSON");
  th_cmd->add_option("--out", out, "Output JSON path")->required();

  CLI::App* pl_cmd = app.add_subcommand("pseudo-label", "Generate omni pseudo-labels");
  pl_cmd->add_option("--manifest", manifest, "Prediction manifest (file or directory)")
      ->required();
  pl_cmd->add_option("--config", config_path, "Pipeline config JSON");
  pl_cmd->add_option("--out", out, "Output directory")->required();

  CLI::App* pool_cmd = app.add_subcommand("pool", "Object pool operations");
  pool_cmd->require_subcommand(1);
  CLI::App* pool_build = pool_cmd->add_subcommand("build", "Bank paste candidates");
  pool_build->add_option("--manifest", manifest, "Prediction manifest (file or directory)")
      ->required();
  pool_build->add_option("--config", config_path, "Pipeline config JSON");
  pool_build->add_option("--out", out, "Output directory")->required();

  CLI::App* mix_cmd = app.add_subcommand("mix", "Paste pool objects onto the dataset");
  mix_cmd->add_option("--manifest", manifest, "Prediction manifest (file or directory)")
      ->required();
  mix_cmd->add_option("--pool", pool_dir, "Pool directory")->required();
  mix_cmd->add_option("--config", config_path, "Pipeline config JSON");
  mix_cmd->add_option("--out", out, "Output directory")->required();
  CLI::Option* mix_count_opt =
      mix_cmd->add_option("--count", mix_count, "Pastes per image (overrides config)");
  CLI::Option* mix_seed_opt =
      mix_cmd->add_option("--seed", mix_seed, "Mixing seed (overrides config)");

  CLI::App* fuse_cmd = app.add_subcommand("fuse", "Fuse heads into the five outputs");
  fuse_cmd->add_option("--manifest", manifest, "Prediction manifest (file or directory)")
      ->required();
  fuse_cmd->add_option("--config", config_path, "Pipeline config JSON");
  fuse_cmd->add_option("--out", out, "Output directory")->required();
  CLI::Option* floor_opt =
      fuse_cmd->add_option("--floor", floor, "Confidence floor (overrides config)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Score fused outputs against ground truth");
  eval_cmd->add_option("--pred", pred_dir, "Fused output directory")->required();
  eval_cmd->add_option("--gt", gt_arg, "Ground truth manifest (file or directory)")->required();
  eval_cmd->add_option("--out", out, "Report JSON path");

  CLI::App* pipe_cmd = app.add_subcommand("pipeline", "Run every stage end to end");
  pipe_cmd->add_option("--data", data_dir, "Dataset directory (both manifests)")->required();
  pipe_cmd->add_option("--config", config_path, "Pipeline config JSON");
  pipe_cmd->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      run_synth(synth);
    } else if (*th_cmd) {
      run_thresholds(manifest, config_path, out, jobs);
    } else if (*pl_cmd) {
      run_pseudo_label(manifest, config_path, out, jobs);
    } else if (*pool_build) {
      run_pool_build(manifest, config_path, out);
    } else if (*mix_cmd) {
      run_mix(manifest, pool_dir, config_path, out, mix_count, mix_count_opt->count() > 0,
              mix_seed, mix_seed_opt->count() > 0, jobs);
    } else if (*fuse_cmd) {
      run_fuse(manifest, config_path, out, floor, floor_opt->count() > 0, jobs);
    } else if (*eval_cmd) {
      run_eval(pred_dir, gt_arg, out);
    } else if (*pipe_cmd) {
      run_pipeline_cmd(data_dir, config_path, out, jobs);
    }
  } catch (const unlock::ManifestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const unlock::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const unlock::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
