#include <benchmark/benchmark.h>

#include <vector>

#include "unlock/adcl.hpp"
#include "unlock/pipeline.hpp"
#include "unlock/synth.hpp"

namespace {

using namespace unlock;

struct PipelineFixture {
  GroundTruthDataset gt;
  PredictionDataset preds;
  OmniThresholds thresholds;
  std::vector<OmniPseudoLabel> labels;
  ObjectPool pool;

  PipelineFixture() {
    SynthDatasetConfig cfg;
    cfg.scene.height = 96;
    cfg.scene.width = 128;
    cfg.scene.min_objects = 4;
    cfg.scene.max_objects = 8;
    cfg.scene.classes = default_palette();
    cfg.noise.mask_radius = 1;
    cfg.noise.score_jitter = 0.1;
    cfg.noise.spurious_rate = 0.5;
    cfg.noise.semantic_softening = 0.1;
    cfg.image_count = 8;
    cfg.seed = 11;
    build_synth_dataset(cfg, gt, preds);
    const PipelineConfig config;
    thresholds = compute_dataset_thresholds(preds, config);
    labels = generate_dataset_labels(preds, thresholds);
    pool = build_object_pool(preds, 0.5, 0.1);
  }
};

const PipelineFixture& fixture() {
  static const PipelineFixture f;
  return f;
}

void BM_ThresholdPass(benchmark::State& state) {
  const PipelineFixture& f = fixture();
  const PipelineConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_dataset_thresholds(f.preds, config));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.preds.images.size()));
}
BENCHMARK(BM_ThresholdPass);

void BM_LabelGeneration(benchmark::State& state) {
  const PipelineFixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_dataset_labels(f.preds, f.thresholds));
  }
}
BENCHMARK(BM_LabelGeneration);

void BM_SpatialMix(benchmark::State& state) {
  const PipelineFixture& f = fixture();
  const Image& base = f.preds.images[0].image;
  const OmniPseudoLabel& labels = f.labels[0];
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(spatial_aware_mix(base, labels, f.pool, 10, seed++));
  }
}
BENCHMARK(BM_SpatialMix);

void BM_Fusion(benchmark::State& state) {
  const PipelineFixture& f = fixture();
  const ImagePredictions& img = f.preds.images[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fuse_outputs(img.semantic, img.instance, img.amodal, f.preds.classes, 0.5));
  }
}
BENCHMARK(BM_Fusion);

}  // namespace
