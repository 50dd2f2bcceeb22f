#include "unlock/dataset.hpp"

namespace unlock {

void PredictionDataset::assign_object_seqs() {
  std::uint64_t instance_seq = 0;
  std::uint64_t amodal_seq = 0;
  for (ImagePredictions& img : images) {
    for (InstancePrediction& p : img.instance) p.object_seq = instance_seq++;
    for (InstancePrediction& p : img.amodal) p.object_seq = amodal_seq++;
  }
}

std::uint64_t PredictionDataset::pixel_seq_base(std::size_t index) const {
  std::uint64_t base = 0;
  for (std::size_t i = 0; i < index && i < images.size(); ++i) {
    base += static_cast<std::uint64_t>(images[i].semantic.height) *
            static_cast<std::uint64_t>(images[i].semantic.width);
  }
  return base;
}

}  // namespace unlock
