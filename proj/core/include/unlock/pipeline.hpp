#pragma once

#include <vector>

#include "unlock/adcl.hpp"
#include "unlock/config.hpp"
#include "unlock/dataset.hpp"
#include "unlock/fusion.hpp"
#include "unlock/metrics.hpp"
#include "unlock/opll.hpp"

namespace unlock {

// Dataset-level wrappers around the per-image stages. `jobs` follows
// resolve_jobs; every function is deterministic for a given input and config
// regardless of the worker count.

OmniThresholds compute_dataset_thresholds(const PredictionDataset& data,
                                          const PipelineConfig& config, int jobs = 1);

std::vector<OmniPseudoLabel> generate_dataset_labels(const PredictionDataset& data,
                                                     const OmniThresholds& thresholds,
                                                     int jobs = 1);

std::vector<MixedSample> mix_dataset(const PredictionDataset& data,
                                     const std::vector<OmniPseudoLabel>& labels,
                                     const ObjectPool& pool, const PipelineConfig& config,
                                     int jobs = 1);

std::vector<FusedOutputs> fuse_dataset(const PredictionDataset& data,
                                       const PipelineConfig& config, int jobs = 1);

// miou, pq, apq, ap, aap in that order.
std::vector<MetricReport> evaluate_outputs(const std::vector<FusedOutputs>& fused,
                                           const GroundTruthDataset& gt);

// Everything in one pass, kept in memory. The mixing stage consumes the
// pseudo labels; fusion and evaluation run on the raw predictions.
struct PipelineArtifacts {
  OmniThresholds thresholds;
  std::vector<OmniPseudoLabel> labels;
  ObjectPool pool;
  std::vector<MixedSample> mixed;
  std::vector<FusedOutputs> fused;
  std::vector<MetricReport> reports;
};

PipelineArtifacts run_pipeline(const PredictionDataset& data, const GroundTruthDataset& gt,
                               const PipelineConfig& config, int jobs = 1);

}  // namespace unlock
