#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "w2s/annotate.hpp"
#include "w2s/student.hpp"

namespace w2s {

/// Warm-up state of the combined loss at normalized progress t.
struct LossSchedule {
  double t = 0.0;          // training progress in [0, 1]
  double t_warmup = 0.10;  // warm-up fraction
  double temperature = 0.5;

  /// Schedule at progress t: temperature decays linearly from t_start to
  /// t_end across the warm-up window and stays at t_end afterwards.
  static LossSchedule at(double t, double t_warmup = 0.10, double temp_start = 0.5,
                         double temp_end = 0.1);
};

/// Mean Shannon entropy of the distributions, in nats (0 log 0 := 0).
double confidence_loss(std::span<const TokenDistribution> dists);

struct LambdaResult {
  double lambda = 0;
  double alpha = 0;
  double temperature = 0;
};

/// lambda = alpha * min(1, t / t_warmup) with
/// alpha = exp(L_conf/T) / (exp(L_conf/T) + exp(L_CE/T)), computed stably.
LambdaResult lambda_at(const LossSchedule& schedule, double l_ce, double l_conf);

/// Convex combination (1 - lambda) * ce + lambda * conf.
double combined_loss(double ce, double conf, double lambda);

struct TrainOptions {
  int epochs = 50;
  double learning_rate = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool use_conf = true;  // off forces lambda = 0 (pure cross-entropy)
  double t_warmup = 0.10;
  bool mirror_augment = true;  // each pair also presented reversed with mirrored label
};

struct EpochStats {
  double ce = 0;
  double conf = 0;
  double lambda = 0;
  double combined = 0;
};

struct TrainingReport {
  std::vector<EpochStats> epochs;
  std::size_t annotation_count = 0;
  std::size_t example_count = 0;  // after mirror augmentation
};

struct TrainResult {
  StudentRanker model;
  TrainingReport report;
};

/// Mini-batch gradient descent on the combined loss with the warm-up
/// schedule. Deterministic given the seed. Every referenced video must have
/// features (missing ids are itemized in the error); a NaN loss aborts with
/// diagnostics.
TrainResult train_student(std::span<const PairAnnotation> annotations,
                          const std::map<std::string, MetricVector>& features,
                          const TrainOptions& options);

}  // namespace w2s
