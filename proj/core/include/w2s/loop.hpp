#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "w2s/corpus.hpp"
#include "w2s/gmad.hpp"
#include "w2s/rank.hpp"
#include "w2s/teachers.hpp"
#include "w2s/training.hpp"

namespace w2s {

/// What one stage trains on and how.
struct StagePlan {
  int stage = 1;
  // stage 1: freshly sampled supervision
  std::size_t ensemble_pairs = 250;
  std::size_t spatial_pairs = 160;
  std::size_t temporal_pairs = 40;
  std::size_t compression_pairs = 50;
  // stages 2..3: hard-pair mining
  int gmad_k_levels = 10;
  int gmad_per_level = 4;
  double carryover_fraction = 0.2;
  TrainOptions train;
};

struct StageReport {
  int stage = 0;
  std::size_t ensemble_count = 0;
  std::size_t severity_count = 0;
  std::size_t gmad_count = 0;       // mined-hard pairs minted this stage
  std::size_t carryover_count = 0;  // pairs reused from the previous stage
  std::size_t training_pairs = 0;
  EpochStats final_epoch;
  double srcc = 0;
  double plcc = 0;
  std::size_t eval_n = 0;
};

struct LoopSettings {
  double holdout_fraction = 0.3;
  std::vector<double> anchor_percentiles = {10, 30, 50, 70, 90};
  MapOptions map;
  std::uint64_t seed = 1;
  std::vector<StagePlan> stages = default_stage_plans();

  static std::vector<StagePlan> default_stage_plans();
};

struct LoopResult {
  std::vector<StageReport> stage_reports;
  StudentRanker final_student;
  std::map<std::string, double> final_scores;  // held-out calibrated scores
  std::vector<double> teacher_srcc;
  double mean_teacher_srcc = 0;
};

/// Three-stage iterative weak-to-strong run over a synthetic corpus: stage 1
/// trains on ensemble + severity annotations; stages 2 and 3 first mine hard
/// pairs (gMAD disagreement pairs labeled by the teacher ensemble, plus
/// student-misclassified severity pairs) and train a fresh student on the
/// mined set plus a carryover sample of the previous stage's training data.
class W2sLoop {
 public:
  W2sLoop(SyntheticCorpus corpus, std::vector<ScriptTeacher> teachers,
          LoopSettings settings);

  LoopResult run();

  /// Trains one stage. Stages above 1 require the prior stage's student.
  std::pair<StudentRanker, StageReport> run_stage(const StagePlan& plan,
                                                  const StudentRanker* prior);

  const std::vector<std::string>& train_ids() const { return train_ids_; }
  const std::vector<std::string>& eval_ids() const { return eval_ids_; }
  const SyntheticCorpus& corpus() const { return corpus_; }
  const PredictionStore& predictions() const { return predictions_; }

  /// Ensemble-mean pseudo-label score.
  double weak_score(const std::string& id) const;

  /// Anchor ids at the configured percentiles of the train pool's weak
  /// scores, plus the symmetrized anchor preference block for a model.
  std::vector<std::string> anchor_ids() const;
  ProbabilityMatrix anchor_block(const StudentRanker& model) const;

  /// Calibrated absolute score of one video under a model (comparisons
  /// against the anchors, averaged over both presentation orders).
  double student_score(const StudentRanker& model, const std::string& id) const;
  std::map<std::string, double> student_scores(const StudentRanker& model,
                                               const std::vector<std::string>& ids) const;

  /// Per-teacher SRCC on the held-out split.
  std::vector<double> teacher_holdout_srcc() const;

  /// The training annotations used by each completed stage (provenance
  /// bookkeeping for tests).
  const std::vector<std::vector<PairAnnotation>>& stage_training_sets() const {
    return stage_training_sets_;
  }

 private:
  std::vector<PairAnnotation> sample_ensemble_pairs(std::size_t count, int stage,
                                                    std::mt19937_64& rng);
  std::vector<PairAnnotation> sample_severity_pairs(
      std::size_t count, int stage, AnnotationSource source,
      std::span<const DistortionFamily> families, const StudentRanker* misclassifier,
      std::mt19937_64& rng);
  std::vector<PairAnnotation> mine_hard_pairs(const StagePlan& plan,
                                              const StudentRanker& prior,
                                              std::mt19937_64& rng);
  bool already_minted(const std::string& a, const std::string& b) const;
  void mint(std::vector<PairAnnotation>& out, PairAnnotation annotation);

  SyntheticCorpus corpus_;
  std::vector<ScriptTeacher> teachers_;
  LoopSettings settings_;
  PredictionStore predictions_;
  std::vector<std::string> train_ids_;
  std::vector<std::string> eval_ids_;
  std::set<std::string> minted_;  // unordered pair keys across all stages
  std::vector<std::vector<PairAnnotation>> stage_training_sets_;
  std::vector<PairAnnotation> last_training_set_;
};

}  // namespace w2s
