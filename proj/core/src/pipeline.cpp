#include "unlock/pipeline.hpp"

#include <utility>

#include "unlock/errors.hpp"
#include "unlock/parallel.hpp"
#include "unlock/rng.hpp"

namespace unlock {

OmniThresholds compute_dataset_thresholds(const PredictionDataset& data,
                                          const PipelineConfig& config, int jobs) {
  config.validate();
  const std::size_t n = data.images.size();

  // Per-image partial statistics, merged in image order so the result is
  // independent of the worker count.
  struct Partial {
    BranchStats semantic{Branch::Semantic};
    BranchStats instance{Branch::Instance};
    BranchStats amodal{Branch::Amodal};
  };
  std::vector<Partial> partials(n);

  parallel_for(n, jobs, [&](std::size_t i) {
    const ImagePredictions& img = data.images[i];
    const BinaryMask thing_mask = compute_thing_mask(img.semantic, data.classes);
    Partial& p = partials[i];
    for (const InstancePrediction& pred : img.instance) {
      if (auto gated = gate_prediction(pred, thing_mask)) {
        p.instance.add(gated->class_id, gated->score, gated->object_seq);
      }
    }
    for (const InstancePrediction& pred : img.amodal) {
      if (auto gated = gate_prediction(pred, thing_mask)) {
        p.amodal.add(gated->class_id, gated->score, gated->object_seq);
      }
    }
    collect_semantic_stats(p.semantic, img.semantic, data.classes, data.pixel_seq_base(i));
  });

  BranchStats semantic(Branch::Semantic);
  BranchStats instance(Branch::Instance);
  BranchStats amodal(Branch::Amodal);
  for (Partial& p : partials) {
    semantic.merge(p.semantic);
    instance.merge(p.instance);
    amodal.merge(p.amodal);
  }

  OmniThresholds th;
  th.semantic = compute_cs_thresholds(semantic, config.semantic.fix, config.semantic.per);
  th.instance = compute_cs_thresholds(instance, config.instance.fix, config.instance.per);
  th.amodal = compute_cs_thresholds(amodal, config.amodal.fix, config.amodal.per);
  return th;
}

std::vector<OmniPseudoLabel> generate_dataset_labels(const PredictionDataset& data,
                                                     const OmniThresholds& thresholds,
                                                     int jobs) {
  std::vector<OmniPseudoLabel> labels(data.images.size());
  parallel_for(data.images.size(), jobs, [&](std::size_t i) {
    labels[i] = generate_omni_label(data.images[i], data.classes, thresholds,
                                    data.pixel_seq_base(i));
  });
  return labels;
}

std::vector<MixedSample> mix_dataset(const PredictionDataset& data,
                                     const std::vector<OmniPseudoLabel>& labels,
                                     const ObjectPool& pool, const PipelineConfig& config,
                                     int jobs) {
  if (labels.size() != data.images.size()) {
    throw DimensionMismatch("mix: label count disagrees with the dataset");
  }
  // One independent seed per image, all derived from the config seed, so a
  // re-run reproduces every draw no matter how images are scheduled.
  std::vector<std::uint64_t> seeds(data.images.size());
  SplitMix64 master(config.seed);
  for (std::uint64_t& s : seeds) {
    s = master.next();
  }

  std::vector<MixedSample> mixed(data.images.size());
  parallel_for(data.images.size(), jobs, [&](std::size_t i) {
    mixed[i] = spatial_aware_mix(data.images[i].image, labels[i], pool, config.mix_count,
                                 seeds[i]);
  });
  return mixed;
}

std::vector<FusedOutputs> fuse_dataset(const PredictionDataset& data,
                                       const PipelineConfig& config, int jobs) {
  std::vector<FusedOutputs> fused(data.images.size());
  parallel_for(data.images.size(), jobs, [&](std::size_t i) {
    const ImagePredictions& img = data.images[i];
    fused[i] = fuse_outputs(img.semantic, img.instance, img.amodal, data.classes,
                            config.confidence_floor);
  });
  return fused;
}

std::vector<MetricReport> evaluate_outputs(const std::vector<FusedOutputs>& fused,
                                           const GroundTruthDataset& gt) {
  if (fused.size() != gt.images.size()) {
    throw DimensionMismatch("eval: output count disagrees with the ground truth");
  }
  const std::size_t n = fused.size();

  std::vector<SemanticMap> pred_sem, gt_sem;
  std::vector<PanopticMap> pred_pan, pred_apan, gt_pan;
  std::vector<std::vector<InstancePrediction>> pred_inst(n), pred_amod(n);
  std::vector<std::vector<GtInstance>> gt_inst(n), gt_amod(n);
  for (std::size_t i = 0; i < n; ++i) {
    pred_sem.push_back(fused[i].semantic);
    gt_sem.push_back(gt.images[i].semantic);
    pred_pan.push_back(fused[i].panoptic);
    pred_apan.push_back(fused[i].amodal_panoptic);
    gt_pan.push_back(panoptic_from_ground_truth(gt.images[i]));
    pred_inst[i] = fused[i].instances;
    pred_amod[i] = fused[i].amodal_instances;
    for (const GroundTruthObject& obj : gt.images[i].objects) {
      gt_inst[i].push_back({obj.class_id, obj.visible});
      gt_amod[i].push_back({obj.class_id, mask_or(obj.amodal, obj.visible)});
    }
  }

  std::vector<MetricReport> reports;
  reports.push_back(compute_miou_dataset(pred_sem, gt_sem, gt.classes));
  reports.push_back(compute_pq(pred_pan, gt_pan, gt.classes, SegmentationMode::Visible));
  reports.push_back(compute_pq(pred_apan, gt_pan, gt.classes, SegmentationMode::Amodal));
  reports.push_back(compute_ap(pred_inst, gt_inst));
  {
    MetricReport aap = compute_ap(pred_amod, gt_amod);
    aap.metric = "aap";
    reports.push_back(std::move(aap));
  }
  return reports;
}

PipelineArtifacts run_pipeline(const PredictionDataset& data, const GroundTruthDataset& gt,
                               const PipelineConfig& config, int jobs) {
  config.validate();
  PipelineArtifacts art;
  art.thresholds = compute_dataset_thresholds(data, config, jobs);
  art.labels = generate_dataset_labels(data, art.thresholds, jobs);
  art.pool = build_object_pool(data, config.strict.fix, config.strict.per, config.pool_capacity);
  art.mixed = mix_dataset(data, art.labels, art.pool, config, jobs);
  art.fused = fuse_dataset(data, config, jobs);
  art.reports = evaluate_outputs(art.fused, gt);
  return art;
}

}  // namespace unlock
