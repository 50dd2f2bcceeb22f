#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unlock/classes.hpp"
#include "unlock/dataset.hpp"
#include "unlock/instance.hpp"
#include "unlock/mask.hpp"
#include "unlock/semantic.hpp"

namespace unlock {

enum class Branch { Semantic, Instance, Amodal };

const char* branch_name(Branch b);

// ---------------------------------------------------------------------------
// Thing gating
// ---------------------------------------------------------------------------

// Pixels whose argmax semantic class is a thing class. Plane i of `sem`
// corresponds to classes.defs()[i]. Argmax ties resolve to the lowest plane.
BinaryMask compute_thing_mask(const SemanticPrediction& sem, const ClassTable& classes);

// Clips an object mask to the thing region. Predictions left with no pixels
// are dropped (nullopt): an object the semantic head sees as pure background
// carries no usable evidence.
std::optional<InstancePrediction> gate_prediction(const InstancePrediction& pred,
                                                  const BinaryMask& thing_mask);

// ---------------------------------------------------------------------------
// Class-wise self-tuning thresholds
// ---------------------------------------------------------------------------

// Score samples for one branch over a whole dataset. For the instance-level
// branches one sample is one gated object; for the semantic branch one sample
// is one pixel (its argmax class and max probability), with the pixel's
// dataset-wide ordinal standing in for object_seq.
struct ScoreSample {
  double score = 0.0;
  std::uint64_t seq = 0;
};

class BranchStats {
 public:
  explicit BranchStats(Branch branch) : branch_(branch) {}

  Branch branch() const { return branch_; }
  void add(ClassId cls, double score, std::uint64_t seq) { samples_[cls].push_back({score, seq}); }
  void merge(const BranchStats& other);

  const std::map<ClassId, std::vector<ScoreSample>>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }

 private:
  Branch branch_;
  std::map<ClassId, std::vector<ScoreSample>> samples_;
};

void collect_instance_stats(BranchStats& stats, const std::vector<InstancePrediction>& gated);
void collect_semantic_stats(BranchStats& stats, const SemanticPrediction& sem,
                            const ClassTable& classes, std::uint64_t pixel_seq_base);

enum class ClassRule { Fixed, Percentile };

// Selection rule for one class. Fixed admits strictly above the cutoff.
// Percentile admits strictly above the cutoff plus, of the samples scoring
// exactly the cutoff, those with seq <= tie_seq_limit; that realizes "top
// admitted_count by rank" without any cross-image coordination at selection
// time, so per-image selection stays order independent.
struct ClassThreshold {
  ClassRule rule = ClassRule::Fixed;
  double cutoff = 0.0;
  std::size_t admitted = 0;
  std::uint64_t tie_seq_limit = 0;  // percentile only
};

struct BranchThresholds {
  Branch branch = Branch::Instance;
  double fix = 0.0;
  double per = 0.0;
  std::map<ClassId, ClassThreshold> per_class;

  // Whether a sample passes its class's selection rule. Classes never seen
  // during the statistics pass fall back to the fixed rule at `fix`.
  bool admits(ClassId cls, double score, std::uint64_t seq) const;
};

// Picks, per class, whichever of the two candidate rules admits more samples:
// the fixed rule counts scores strictly above `fix`; the percentile rule
// takes the top ceil(per * N_c) of the class's descending score list. Ties
// between the rules go to fixed. A class with no samples gets a vacuous fixed
// rule with admitted == 0; an entirely empty stats object still produces a
// valid (empty) threshold set.
BranchThresholds compute_cs_thresholds(const BranchStats& stats, double fix, double per);

// Certain objects: the gated predictions admitted by their class rule, input
// order preserved. Throws BranchMismatch when `th` was computed for a
// different branch than the caller expects.
std::vector<InstancePrediction> select_certain_objects(const std::vector<InstancePrediction>& gated,
                                                       const BranchThresholds& th, Branch expected);

// Pixels covered by rejected predictions but by no certain one. These carry
// "there is some object here, class unknown" and are exempted from negative
// supervision rather than discarded.
BinaryMask compute_uncertain_region(const std::vector<InstancePrediction>& gated,
                                    const std::vector<InstancePrediction>& certain, int height,
                                    int width);

// Tri-state pixel labels for the semantic branch: argmax class where the max
// probability passes that class's rule, kUncertainLabel everywhere else.
SemanticMap generate_semantic_pseudo_label(const SemanticPrediction& sem, const ClassTable& classes,
                                           const BranchThresholds& th,
                                           std::uint64_t pixel_seq_base);

// ---------------------------------------------------------------------------
// Omni pseudo-label
// ---------------------------------------------------------------------------

struct OmniThresholds {
  BranchThresholds semantic;
  BranchThresholds instance;
  BranchThresholds amodal;
};

// Complete label set for one image: certain objects per instance-level
// branch, an uncertain region per instance-level branch, and the tri-state
// semantic map. Invariant: every certain mask is disjoint from its branch's
// uncertain region.
struct OmniPseudoLabel {
  std::vector<InstancePrediction> certain_instance;
  std::vector<InstancePrediction> certain_amodal;
  BinaryMask uncertain_instance;
  BinaryMask uncertain_amodal;
  SemanticMap semantic;
};

OmniPseudoLabel generate_omni_label(const ImagePredictions& preds, const ClassTable& classes,
                                    const OmniThresholds& th, std::uint64_t pixel_seq_base);

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

// Loss value plus the analytic gradient with respect to the probabilities
// that produced it. Gradient layout matches the probability input layout.
struct LossResult {
  double loss = 0.0;
  std::vector<double> gradient;
};

inline constexpr double kProbClamp = 1e-7;

// Binary cross entropy over a per-pixel foreground probability grid, with
// pixels inside `uncertain` weighted to zero. The mean runs over all pixels
// (uncertain ones contribute zero terms, they are not renormalized away).
// Probabilities are clamped to [kProbClamp, 1 - kProbClamp]; the gradient is
// evaluated at the clamped value.
LossResult uncertainty_guided_bce(const std::vector<double>& prob, const BinaryMask& target,
                                  const BinaryMask& uncertain);

// Cross entropy against a tri-state semantic map, averaged over certain
// pixels only. Reserved labels (uncertain / ignore) contribute nothing; zero
// certain pixels yields a loss of exactly 0. Gradient layout matches
// SemanticPrediction::data (plane-major doubles).
LossResult masked_cross_entropy(const SemanticPrediction& sem, const SemanticMap& target,
                                const ClassTable& classes);

}  // namespace unlock
