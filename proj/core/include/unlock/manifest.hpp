#pragma once

#include <string>
#include <vector>

#include "unlock/adcl.hpp"
#include "unlock/dataset.hpp"
#include "unlock/fusion.hpp"
#include "unlock/opll.hpp"

namespace unlock {

// On-disk layout. Every stage owns one directory holding a JSON index plus
// the referenced binary files; paths inside an index are relative to the
// index file. Malformed indices raise ManifestError naming the file and the
// offending field.
//
//   predictions:   prediction_manifest.json, <id>.ppm, <id>.ulkp,
//                  <id>_inst_<k>.ulkm, <id>_amod_<k>.ulkm
//   ground truth:  gt_manifest.json, <id>_sem.pgm,
//                  <id>_obj_<k>_amodal.ulkm, <id>_obj_<k>_visible.ulkm
//   pseudo labels: pseudo_labels.json, tri-state <id>_sem.pgm,
//                  certain object masks, per-branch uncertain region masks
//   object pool:   index.json, obj_<k>_full.ulkm, obj_<k>_ovp.ulkm,
//                  obj_<k>_pix.ppm
//   mixed data:    mixed_manifest.json, same shape as pseudo labels plus
//                  <id>.ppm images and a paste log per image
//   fused output:  fused_index.json, <id>_sem.pgm, instance/amodal masks,
//                  <id>_pan.u32 and <id>_apan.u32 segment-id grids with
//                  their segment tables inlined in the index

void save_prediction_dataset(const PredictionDataset& data, const std::string& dir);
PredictionDataset load_prediction_dataset(const std::string& manifest_path);

void save_ground_truth_dataset(const GroundTruthDataset& data, const std::string& dir);
GroundTruthDataset load_ground_truth_dataset(const std::string& manifest_path);

void save_thresholds(const OmniThresholds& thresholds, const std::string& path);

void save_pseudo_labels(const std::vector<OmniPseudoLabel>& labels,
                        const PredictionDataset& source, const std::string& dir);

void save_pool(const ObjectPool& pool, const std::string& dir);
ObjectPool load_pool(const std::string& dir);

void save_mixed(const std::vector<MixedSample>& mixed, const std::vector<std::string>& ids,
                const std::string& dir);

void save_fused(const std::vector<FusedOutputs>& fused, const std::vector<std::string>& ids,
                const std::string& dir);
std::vector<FusedOutputs> load_fused(const std::string& dir, std::vector<std::string>* ids);

// Segment-id grids for panoptic maps, raw little-endian u32 row-major.
void write_id_grid(const PanopticMap& map, const std::string& path);

}  // namespace unlock
