#include "w2s/loop.hpp"

#include <algorithm>
#include <cmath>

#include "w2s/correlation.hpp"

namespace w2s {

namespace {

const std::vector<DistortionFamily> kSpatialFamilies = {
    DistortionFamily::resize, DistortionFamily::gblur, DistortionFamily::gnoise,
    DistortionFamily::darken, DistortionFamily::brighten};
const std::vector<DistortionFamily> kTemporalFamilies = {DistortionFamily::jitter,
                                                         DistortionFamily::stutter};
const std::vector<DistortionFamily> kCompressionFamilies = {DistortionFamily::h264,
                                                            DistortionFamily::h265};

RankLabel argmax_label(const TokenDistribution& dist) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < 5; ++k) {
    if (dist.probs[k] > dist.probs[best]) best = k;
  }
  return rank_label_from_ordinal(static_cast<int>(best) + 1);
}

std::string unordered_key(const std::string& a, const std::string& b) {
  return a < b ? a + "|" + b : b + "|" + a;
}

}  // namespace

std::vector<StagePlan> LoopSettings::default_stage_plans() {
  // Pair counts follow the full-scale stage breakdown divided by 1000.
  StagePlan s1;
  s1.stage = 1;
  s1.ensemble_pairs = 250;
  s1.spatial_pairs = 160;
  s1.temporal_pairs = 40;
  s1.compression_pairs = 50;

  StagePlan s2;
  s2.stage = 2;
  s2.ensemble_pairs = 0;
  s2.spatial_pairs = 5;
  s2.temporal_pairs = 5;
  s2.compression_pairs = 5;
  s2.gmad_k_levels = 10;
  s2.gmad_per_level = 4;

  StagePlan s3 = s2;
  s3.stage = 3;

  return {s1, s2, s3};
}

W2sLoop::W2sLoop(SyntheticCorpus corpus, std::vector<ScriptTeacher> teachers,
                 LoopSettings settings)
    : corpus_(std::move(corpus)), teachers_(std::move(teachers)),
      settings_(std::move(settings)) {
  if (teachers_.size() < 2) throw DomainError("the teacher ensemble needs >= 2 scorers");
  if (settings_.holdout_fraction <= 0 || settings_.holdout_fraction >= 1) {
    throw DomainError("holdout fraction must lie in (0, 1)");
  }

  for (const auto& clip : corpus_.clips) {
    for (const auto& teacher : teachers_) {
      predictions_.add(teacher.predict(corpus_.features.at(clip.id), clip.id));
    }
  }

  // Split by base id so a ladder never straddles the train/eval boundary.
  std::set<std::string> bases;
  for (const auto& clip : corpus_.clips) bases.insert(clip.base_id);
  std::vector<std::string> base_list(bases.begin(), bases.end());
  std::mt19937_64 rng(settings_.seed * 889 + 17);
  std::shuffle(base_list.begin(), base_list.end(), rng);
  const std::size_t holdout =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                   settings_.holdout_fraction * base_list.size())));
  std::set<std::string> eval_bases(base_list.begin(),
                                   base_list.begin() + static_cast<std::ptrdiff_t>(holdout));
  for (const auto& clip : corpus_.clips) {
    (eval_bases.count(clip.base_id) ? eval_ids_ : train_ids_).push_back(clip.id);
  }
  if (train_ids_.size() < 10 || eval_ids_.size() < 3) {
    throw DomainError("corpus too small to split into train and eval pools");
  }
}

double W2sLoop::weak_score(const std::string& id) const {
  return predictions_.stats(id).mean;
}

std::vector<std::string> W2sLoop::anchor_ids() const {
  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(train_ids_.size());
  for (const auto& id : train_ids_) ranked.emplace_back(weak_score(id), id);
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> anchors;
  for (double p : settings_.anchor_percentiles) {
    const auto idx = static_cast<std::size_t>(
        std::lround(p / 100.0 * static_cast<double>(ranked.size() - 1)));
    anchors.push_back(ranked[idx].second);
  }
  // collapse accidental duplicates from coarse pools by stepping forward
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    std::size_t bump = 0;
    while (std::find(anchors.begin(), anchors.begin() + static_cast<std::ptrdiff_t>(i),
                     anchors[i]) != anchors.begin() + static_cast<std::ptrdiff_t>(i) &&
           bump < ranked.size()) {
      const auto it = std::find_if(ranked.begin(), ranked.end(), [&](const auto& r) {
        return r.second == anchors[i];
      });
      const auto next = static_cast<std::size_t>(it - ranked.begin()) + 1;
      if (next >= ranked.size()) break;
      anchors[i] = ranked[next].second;
      ++bump;
    }
  }
  return anchors;
}

ProbabilityMatrix W2sLoop::anchor_block(const StudentRanker& model) const {
  const auto anchors = anchor_ids();
  ProbabilityMatrix block(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      const MetricVector& fi = corpus_.features.at(anchors[i]);
      const MetricVector& fj = corpus_.features.at(anchors[j]);
      // soft_score favors the second argument; both orders symmetrize the
      // pair into P(i preferred over j) with exact reciprocity
      const double j_over_i = soft_score(predict_pair(model, fi, fj));
      const double i_over_j = soft_score(predict_pair(model, fj, fi));
      block.set_pair(i, j, 0.5 * ((1.0 - j_over_i) + i_over_j));
    }
  }
  return block;
}

double W2sLoop::student_score(const StudentRanker& model, const std::string& id) const {
  const auto anchors = anchor_ids();
  const ProbabilityMatrix block = anchor_block(model);
  const MetricVector& ft = corpus_.features.at(id);
  std::vector<TokenDistribution> test_vs_anchors;
  test_vs_anchors.reserve(anchors.size());
  for (const auto& anchor : anchors) {
    const MetricVector& fa = corpus_.features.at(anchor);
    const TokenDistribution forward = predict_pair(model, fa, ft);   // test evaluated
    const TokenDistribution reverse = predict_pair(model, ft, fa);   // anchor evaluated
    TokenDistribution avg;
    const TokenDistribution mirrored = reverse.mirrored();
    for (std::size_t k = 0; k < 5; ++k) {
      avg.probs[k] = 0.5 * (forward.probs[k] + mirrored.probs[k]);
    }
    test_vs_anchors.push_back(avg);
  }
  return calibrate(test_vs_anchors, block, settings_.map);
}

std::map<std::string, double> W2sLoop::student_scores(
    const StudentRanker& model, const std::vector<std::string>& ids) const {
  const auto anchors = anchor_ids();
  const ProbabilityMatrix block = anchor_block(model);
  std::map<std::string, double> out;
  for (const auto& id : ids) {
    const MetricVector& ft = corpus_.features.at(id);
    std::vector<TokenDistribution> test_vs_anchors;
    test_vs_anchors.reserve(anchors.size());
    for (const auto& anchor : anchors) {
      const MetricVector& fa = corpus_.features.at(anchor);
      const TokenDistribution forward = predict_pair(model, fa, ft);
      const TokenDistribution mirrored = predict_pair(model, ft, fa).mirrored();
      TokenDistribution avg;
      for (std::size_t k = 0; k < 5; ++k) {
        avg.probs[k] = 0.5 * (forward.probs[k] + mirrored.probs[k]);
      }
      test_vs_anchors.push_back(avg);
    }
    out[id] = calibrate(test_vs_anchors, block, settings_.map);
  }
  return out;
}

std::vector<double> W2sLoop::teacher_holdout_srcc() const {
  const auto gt = corpus_.gt_scores();
  std::vector<double> out;
  for (const auto& teacher : teachers_) {
    std::vector<double> pred, truth;
    for (const auto& id : eval_ids_) {
      pred.push_back(teacher.score(corpus_.features.at(id), id));
      truth.push_back(gt.at(id));
    }
    out.push_back(srcc(pred, truth));
  }
  return out;
}

bool W2sLoop::already_minted(const std::string& a, const std::string& b) const {
  return minted_.count(unordered_key(a, b)) > 0;
}

void W2sLoop::mint(std::vector<PairAnnotation>& out, PairAnnotation annotation) {
  minted_.insert(unordered_key(annotation.first, annotation.second));
  out.push_back(std::move(annotation));
}

std::vector<PairAnnotation> W2sLoop::sample_ensemble_pairs(std::size_t count, int stage,
                                                           std::mt19937_64& rng) {
  std::vector<PairAnnotation> out;
  if (count == 0 || train_ids_.size() < 2) return out;
  std::uniform_int_distribution<std::size_t> pick(0, train_ids_.size() - 1);
  std::size_t attempts = 0;
  const std::size_t max_attempts = count * 64 + 1024;
  while (out.size() < count && attempts < max_attempts) {
    ++attempts;
    const std::string& a = train_ids_[pick(rng)];
    const std::string& b = train_ids_[pick(rng)];
    if (a == b || already_minted(a, b)) continue;
    const EnsembleStats sa = predictions_.stats(a);
    const EnsembleStats sb = predictions_.stats(b);
    mint(out, PairAnnotation{a, b, label_pair(sa.mean, sa.variance, sb.mean, sb.variance),
                             AnnotationSource::ensemble, stage});
  }
  return out;
}

std::vector<PairAnnotation> W2sLoop::sample_severity_pairs(
    std::size_t count, int stage, AnnotationSource source,
    std::span<const DistortionFamily> families, const StudentRanker* misclassifier,
    std::mt19937_64& rng) {
  std::vector<PairAnnotation> out;
  if (count == 0) return out;

  // candidate pairs: distinct-level members of train-pool ladders of the
  // requested families
  std::set<std::string> train_set(train_ids_.begin(), train_ids_.end());
  struct Candidate {
    std::string first, second;
    RankLabel truth;
  };
  std::vector<Candidate> candidates;
  for (const auto& [key, members] : corpus_.ladders) {
    if (members.empty() || !train_set.count(members.front())) continue;
    const auto& first_clip = corpus_.by_id(members.front());
    if (std::find(families.begin(), families.end(), *first_clip.family) == families.end()) {
      continue;
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = 0; j < members.size(); ++j) {
        if (i == j) continue;
        const int li = corpus_.by_id(members[i]).level;
        const int lj = corpus_.by_id(members[j]).level;
        candidates.push_back(Candidate{members[i], members[j], severity_label(li, lj)});
      }
    }
  }
  std::shuffle(candidates.begin(), candidates.end(), rng);

  for (const auto& c : candidates) {
    if (out.size() >= count) break;
    if (already_minted(c.first, c.second)) continue;
    if (misclassifier != nullptr) {
      const TokenDistribution dist = predict_pair(*misclassifier,
                                                  corpus_.features.at(c.first),
                                                  corpus_.features.at(c.second));
      if (argmax_label(dist) == c.truth) continue;  // keep only misclassified pairs
    }
    mint(out, PairAnnotation{c.first, c.second, c.truth, source, stage});
  }
  return out;
}

std::vector<PairAnnotation> W2sLoop::mine_hard_pairs(const StagePlan& plan,
                                                     const StudentRanker& prior,
                                                     std::mt19937_64& rng) {
  // gMAD disagreement pairs over the train pool, labeled by the ensemble.
  ScoredPool pool;
  const auto scores = student_scores(prior, train_ids_);
  for (const auto& id : train_ids_) {
    pool.videos.push_back(ScoredVideo{id, weak_score(id), scores.at(id)});
  }
  const MiningReport mined = mine_gmad(pool, plan.gmad_k_levels, plan.gmad_per_level);

  std::vector<PairAnnotation> out;
  for (const auto& pair : mined.pairs) {
    if (already_minted(pair.first, pair.second)) continue;
    const EnsembleStats sa = predictions_.stats(pair.first);
    const EnsembleStats sb = predictions_.stats(pair.second);
    mint(out, PairAnnotation{pair.first, pair.second,
                             label_pair(sa.mean, sa.variance, sb.mean, sb.variance),
                             AnnotationSource::gmad, plan.stage});
  }

  // student-misclassified severity pairs, per distortion category
  auto misclassified = [&](std::size_t count, std::span<const DistortionFamily> families) {
    auto pairs = sample_severity_pairs(count, plan.stage, AnnotationSource::gmad, families,
                                       &prior, rng);
    out.insert(out.end(), pairs.begin(), pairs.end());
  };
  misclassified(plan.spatial_pairs, kSpatialFamilies);
  misclassified(plan.temporal_pairs, kTemporalFamilies);
  misclassified(plan.compression_pairs, kCompressionFamilies);
  return out;
}

std::pair<StudentRanker, StageReport> W2sLoop::run_stage(const StagePlan& plan,
                                                         const StudentRanker* prior) {
  if (plan.stage > 1 && prior == nullptr) {
    throw DomainError("stage " + std::to_string(plan.stage) +
                      " requires the previous stage's student");
  }

  std::mt19937_64 rng(settings_.seed * 6364136223846793005ULL +
                      static_cast<std::uint64_t>(plan.stage));
  std::vector<PairAnnotation> training;
  StageReport report;
  report.stage = plan.stage;

  if (plan.stage == 1) {
    auto ensemble = sample_ensemble_pairs(plan.ensemble_pairs, plan.stage, rng);
    report.ensemble_count = ensemble.size();
    training.insert(training.end(), ensemble.begin(), ensemble.end());

    auto add_severity = [&](std::size_t count, std::span<const DistortionFamily> families) {
      auto pairs = sample_severity_pairs(count, plan.stage, AnnotationSource::severity,
                                         families, nullptr, rng);
      report.severity_count += pairs.size();
      training.insert(training.end(), pairs.begin(), pairs.end());
    };
    add_severity(plan.spatial_pairs, kSpatialFamilies);
    add_severity(plan.temporal_pairs, kTemporalFamilies);
    add_severity(plan.compression_pairs, kCompressionFamilies);
  } else {
    auto mined = mine_hard_pairs(plan, *prior, rng);
    report.gmad_count = mined.size();
    training.insert(training.end(), mined.begin(), mined.end());

    // carryover: a sample of every pair minted in earlier stages (stages
    // are disjoint by minted pair, so the union has no duplicates)
    std::vector<PairAnnotation> previous;
    for (const auto& stage_set : stage_training_sets_) {
      for (const auto& a : stage_set) {
        if (a.stage == stage_set.front().stage) previous.push_back(a);
      }
    }
    std::sort(previous.begin(), previous.end(),
              [](const PairAnnotation& a, const PairAnnotation& b) {
                return a.pair_id() < b.pair_id();
              });
    const std::size_t carry = static_cast<std::size_t>(
        std::floor(plan.carryover_fraction * static_cast<double>(previous.size())));
    if (carry > 0) {
      std::shuffle(previous.begin(), previous.end(), rng);
      previous.resize(std::min(carry, previous.size()));
      report.carryover_count = previous.size();
      training.insert(training.end(), previous.begin(), previous.end());
    }
  }

  if (training.empty()) {
    throw DomainError("stage " + std::to_string(plan.stage) + " produced no training pairs");
  }
  report.training_pairs = training.size();

  TrainOptions train_options = plan.train;
  train_options.seed = settings_.seed * 31 + static_cast<std::uint64_t>(plan.stage);
  TrainResult result = train_student(training, corpus_.features, train_options);
  if (!result.report.epochs.empty()) report.final_epoch = result.report.epochs.back();

  const auto gt = corpus_.gt_scores();
  const auto predicted = student_scores(result.model, eval_ids_);
  std::vector<double> pred, truth;
  for (const auto& id : eval_ids_) {
    pred.push_back(predicted.at(id));
    truth.push_back(gt.at(id));
  }
  report.srcc = srcc(pred, truth);
  report.plcc = plcc(pred, truth);
  report.eval_n = eval_ids_.size();

  stage_training_sets_.push_back(training);
  last_training_set_ = std::move(training);
  return {std::move(result.model), report};
}

LoopResult W2sLoop::run() {
  LoopResult result;
  result.teacher_srcc = teacher_holdout_srcc();
  double acc = 0;
  for (double s : result.teacher_srcc) acc += s;
  result.mean_teacher_srcc = acc / static_cast<double>(result.teacher_srcc.size());

  StudentRanker current;
  bool have_student = false;
  for (const auto& plan : settings_.stages) {
    auto [student, report] = run_stage(plan, have_student ? &current : nullptr);
    current = std::move(student);
    have_student = true;
    result.stage_reports.push_back(report);
  }
  result.final_student = current;
  result.final_scores = student_scores(current, eval_ids_);
  return result;
}

}  // namespace w2s
