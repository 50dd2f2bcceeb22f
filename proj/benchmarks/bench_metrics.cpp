#include <benchmark/benchmark.h>

#include <vector>

#include "unlock/fusion.hpp"
#include "unlock/metrics.hpp"
#include "unlock/pipeline.hpp"
#include "unlock/synth.hpp"

namespace {

using namespace unlock;

// One noisy dataset shared by the metric benchmarks, built once. Noise keeps
// the matching stage honest; a clean dataset would only measure the trivial
// diagonal case.
struct MetricFixture {
  GroundTruthDataset gt;
  PredictionDataset preds;
  std::vector<FusedOutputs> fused;
  std::vector<PanopticMap> pred_pan, gt_pan;
  std::vector<PanopticMap> pred_apan, gt_apan;

  MetricFixture() {
    SynthDatasetConfig cfg;
    cfg.scene.height = 96;
    cfg.scene.width = 128;
    cfg.scene.min_objects = 4;
    cfg.scene.max_objects = 8;
    cfg.scene.classes = default_palette();
    cfg.noise.mask_radius = 1;
    cfg.noise.score_jitter = 0.2;
    cfg.noise.miss_rate = 0.05;
    cfg.noise.spurious_rate = 0.5;
    cfg.noise.semantic_softening = 0.1;
    cfg.image_count = 8;
    cfg.seed = 7;
    build_synth_dataset(cfg, gt, preds);
    fused = fuse_dataset(preds, PipelineConfig{});
    for (std::size_t i = 0; i < fused.size(); ++i) {
      pred_pan.push_back(fused[i].panoptic);
      pred_apan.push_back(fused[i].amodal_panoptic);
      const PanopticMap g = panoptic_from_ground_truth(gt.images[i]);
      gt_pan.push_back(g);
      gt_apan.push_back(g);
    }
  }
};

const MetricFixture& fixture() {
  static const MetricFixture f;
  return f;
}

void BM_PanopticQuality(benchmark::State& state) {
  const MetricFixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        compute_pq(f.pred_pan, f.gt_pan, f.preds.classes, SegmentationMode::Visible));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.pred_pan.size()));
}
BENCHMARK(BM_PanopticQuality);

void BM_AmodalPanopticQuality(benchmark::State& state) {
  const MetricFixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        compute_pq(f.pred_apan, f.gt_apan, f.preds.classes, SegmentationMode::Amodal));
  }
}
BENCHMARK(BM_AmodalPanopticQuality);

void BM_AveragePrecision(benchmark::State& state) {
  const MetricFixture& f = fixture();
  std::vector<std::vector<InstancePrediction>> preds;
  std::vector<std::vector<GtInstance>> gts;
  for (std::size_t i = 0; i < f.fused.size(); ++i) {
    preds.push_back(f.fused[i].instances);
    std::vector<GtInstance> g;
    for (const GroundTruthObject& obj : f.gt.images[i].objects) {
      g.push_back({obj.class_id, obj.visible});
    }
    gts.push_back(std::move(g));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_ap(preds, gts));
  }
}
BENCHMARK(BM_AveragePrecision);

void BM_SemanticIou(benchmark::State& state) {
  const MetricFixture& f = fixture();
  std::vector<SemanticMap> pred, gt;
  for (std::size_t i = 0; i < f.fused.size(); ++i) {
    pred.push_back(f.fused[i].semantic);
    gt.push_back(f.gt.images[i].semantic);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_miou_dataset(pred, gt, f.preds.classes));
  }
}
BENCHMARK(BM_SemanticIou);

}  // namespace
