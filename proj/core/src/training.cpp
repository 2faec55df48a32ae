#include "w2s/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace w2s {

LossSchedule LossSchedule::at(double t, double t_warmup, double temp_start, double temp_end) {
  LossSchedule s;
  s.t = t;
  s.t_warmup = t_warmup;
  const double ramp = t_warmup > 0 ? std::min(1.0, t / t_warmup) : 1.0;
  s.temperature = temp_start + (temp_end - temp_start) * ramp;
  return s;
}

double confidence_loss(std::span<const TokenDistribution> dists) {
  if (dists.empty()) return 0.0;
  double total = 0;
  for (const auto& dist : dists) {
    dist.validate();
    for (double p : dist.probs) {
      if (p > 0) total -= p * std::log(p);
    }
  }
  return total / static_cast<double>(dists.size());
}

LambdaResult lambda_at(const LossSchedule& schedule, double l_ce, double l_conf) {
  if (!std::isfinite(l_ce) || !std::isfinite(l_conf)) {
    throw DomainError("non-finite loss in lambda_at");
  }
  LambdaResult r;
  r.temperature = schedule.temperature;
  // alpha = sigmoid((L_conf - L_CE) / T), the stable form of the
  // temperature-scaled exponential ratio
  const double z = (l_conf - l_ce) / schedule.temperature;
  r.alpha = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  const double ramp =
      schedule.t_warmup > 0 ? std::min(1.0, schedule.t / schedule.t_warmup) : 1.0;
  r.lambda = r.alpha * ramp;
  return r;
}

double combined_loss(double ce, double conf, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw DomainError("lambda " + std::to_string(lambda) + " outside [0,1]");
  }
  return (1.0 - lambda) * ce + lambda * conf;
}

namespace {

struct Example {
  std::array<double, kPairFeatureDim> features;  // already standardized
  int target = 0;                                // class index 0..4
};

double entropy(const std::array<double, 5>& p) {
  double h = 0;
  for (double v : p) {
    if (v > 0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace

TrainResult train_student(std::span<const PairAnnotation> annotations,
                          const std::map<std::string, MetricVector>& features,
                          const TrainOptions& options) {
  if (annotations.empty()) throw DomainError("no annotations to train on");
  if (options.epochs < 0) throw DomainError("negative epoch count");
  if (options.batch_size < 1) throw DomainError("batch size must be positive");

  std::set<std::string> missing;
  for (const auto& a : annotations) {
    if (!features.count(a.first)) missing.insert(a.first);
    if (!features.count(a.second)) missing.insert(a.second);
  }
  if (!missing.empty()) {
    std::string joined;
    for (const auto& id : missing) {
      if (!joined.empty()) joined += ", ";
      joined += id;
    }
    throw DomainError("missing features for " + std::to_string(missing.size()) +
                      " video(s): " + joined);
  }

  // Raw pair features, mirrored copies included before fitting the scaler.
  std::vector<std::array<double, kPairFeatureDim>> raw;
  std::vector<int> targets;
  raw.reserve(annotations.size() * (options.mirror_augment ? 2 : 1));
  for (const auto& a : annotations) {
    raw.push_back(pair_features(features.at(a.first), features.at(a.second)));
    targets.push_back(ordinal(a.label) - 1);
    if (options.mirror_augment) {
      raw.push_back(pair_features(features.at(a.second), features.at(a.first)));
      targets.push_back(ordinal(mirror(a.label)) - 1);
    }
  }

  StudentRanker model = StudentRanker::zero();
  model.scaler = FeatureScaler::fit(raw);

  std::vector<Example> examples(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    examples[i] = Example{model.scaler.apply(raw[i]), targets[i]};
  }

  TrainingReport report;
  report.annotation_count = annotations.size();
  report.example_count = examples.size();

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  const std::size_t batches_per_epoch =
      (examples.size() + options.batch_size - 1) / static_cast<std::size_t>(options.batch_size);
  const std::size_t total_steps =
      std::max<std::size_t>(1, batches_per_epoch * static_cast<std::size_t>(options.epochs));
  std::size_t step = 0;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_ce = 0, epoch_conf = 0, epoch_lambda = 0, epoch_combined = 0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(options.batch_size));
      const double batch_n = static_cast<double>(end - start);

      // forward pass
      std::vector<std::array<double, 5>> probs(end - start);
      double batch_ce = 0, batch_conf = 0;
      for (std::size_t k = start; k < end; ++k) {
        const Example& ex = examples[order[k]];
        std::array<double, 5> logits{};
        for (std::size_t c = 0; c < 5; ++c) {
          double acc = model.bias[c];
          for (std::size_t i = 0; i < kPairFeatureDim; ++i) {
            acc += model.weights[c][i] * ex.features[i];
          }
          logits[c] = acc;
        }
        const TokenDistribution dist = token_probs(logits);
        probs[k - start] = dist.probs;
        batch_ce -= std::log(std::max(dist.probs[static_cast<std::size_t>(ex.target)], 1e-300));
        batch_conf += entropy(dist.probs);
      }
      batch_ce /= batch_n;
      batch_conf /= batch_n;

      const double t = static_cast<double>(step) / static_cast<double>(total_steps);
      double lambda = 0;
      if (options.use_conf) {
        lambda = lambda_at(LossSchedule::at(t, options.t_warmup), batch_ce, batch_conf).lambda;
      }
      const double batch_loss = combined_loss(batch_ce, batch_conf, lambda);
      if (!std::isfinite(batch_loss)) {
        throw ConvergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                                   ", step " + std::to_string(step) + " (ce " +
                                   std::to_string(batch_ce) + ", conf " +
                                   std::to_string(batch_conf) + ", lambda " +
                                   std::to_string(lambda) + ")",
                               {}, 0.0);
      }

      // backward pass: d/dz_j of CE is p_j - 1{j == target}; of the entropy
      // it is -p_j (log p_j + H)
      std::array<std::array<double, kPairFeatureDim>, 5> grad_w{};
      std::array<double, 5> grad_b{};
      for (std::size_t k = start; k < end; ++k) {
        const Example& ex = examples[order[k]];
        const auto& p = probs[k - start];
        const double h = entropy(p);
        for (std::size_t c = 0; c < 5; ++c) {
          const double ce_grad =
              p[c] - (static_cast<int>(c) == ex.target ? 1.0 : 0.0);
          const double conf_grad =
              p[c] > 0 ? -p[c] * (std::log(p[c]) + h) : 0.0;
          const double g = ((1.0 - lambda) * ce_grad + lambda * conf_grad) / batch_n;
          grad_b[c] += g;
          for (std::size_t i = 0; i < kPairFeatureDim; ++i) {
            grad_w[c][i] += g * ex.features[i];
          }
        }
      }
      for (std::size_t c = 0; c < 5; ++c) {
        model.bias[c] -= options.learning_rate * grad_b[c];
        for (std::size_t i = 0; i < kPairFeatureDim; ++i) {
          model.weights[c][i] -= options.learning_rate * grad_w[c][i];
        }
      }

      epoch_ce += batch_ce * batch_n;
      epoch_conf += batch_conf * batch_n;
      epoch_lambda += lambda * batch_n;
      epoch_combined += batch_loss * batch_n;
      ++step;
    }

    const double n = static_cast<double>(examples.size());
    report.epochs.push_back(EpochStats{epoch_ce / n, epoch_conf / n, epoch_lambda / n,
                                       epoch_combined / n});
  }

  model.validate();
  return TrainResult{std::move(model), std::move(report)};
}

}  // namespace w2s
