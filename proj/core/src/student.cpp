#include "w2s/student.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace w2s {

std::array<double, kPairFeatureDim> pair_features(const MetricVector& a,
                                                  const MetricVector& b) {
  const auto va = a.values();
  const auto vb = b.values();
  std::array<double, kPairFeatureDim> out{};
  for (std::size_t i = 0; i < MetricVector::kCount; ++i) {
    out[i] = va[i];
    out[MetricVector::kCount + i] = vb[i];
    out[2 * MetricVector::kCount + i] = va[i] - vb[i];
  }
  return out;
}

FeatureScaler::FeatureScaler() {
  scale.fill(1.0);
}

FeatureScaler FeatureScaler::fit(std::span<const std::array<double, kPairFeatureDim>> rows) {
  FeatureScaler s;
  if (rows.empty()) return s;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < kPairFeatureDim; ++i) s.mean[i] += row[i];
  }
  for (double& m : s.mean) m /= static_cast<double>(rows.size());
  std::array<double, kPairFeatureDim> var{};
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < kPairFeatureDim; ++i) {
      var[i] += (row[i] - s.mean[i]) * (row[i] - s.mean[i]);
    }
  }
  for (std::size_t i = 0; i < kPairFeatureDim; ++i) {
    const double std_dev = std::sqrt(var[i] / static_cast<double>(rows.size()));
    s.scale[i] = std_dev > 1e-12 ? std_dev : 1.0;
  }
  return s;
}

std::array<double, kPairFeatureDim> FeatureScaler::apply(
    const std::array<double, kPairFeatureDim>& row) const {
  std::array<double, kPairFeatureDim> out{};
  for (std::size_t i = 0; i < kPairFeatureDim; ++i) {
    out[i] = (row[i] - mean[i]) / scale[i];
  }
  return out;
}

StudentRanker StudentRanker::zero() { return StudentRanker{}; }

void StudentRanker::validate() const {
  for (const auto& row : weights) {
    for (double w : row) {
      if (!std::isfinite(w)) throw DomainError("non-finite student weight");
    }
  }
  for (double b : bias) {
    if (!std::isfinite(b)) throw DomainError("non-finite student bias");
  }
}

std::array<double, 5> pair_logits(const StudentRanker& model, const MetricVector& a,
                                  const MetricVector& b) {
  const auto x = model.scaler.apply(pair_features(a, b));
  std::array<double, 5> logits{};
  for (std::size_t c = 0; c < 5; ++c) {
    double acc = model.bias[c];
    for (std::size_t i = 0; i < kPairFeatureDim; ++i) acc += model.weights[c][i] * x[i];
    logits[c] = acc;
  }
  return logits;
}

TokenDistribution predict_pair(const StudentRanker& model, const MetricVector& a,
                               const MetricVector& b) {
  return token_probs(pair_logits(model, a, b));
}

void save_checkpoint(const StudentRanker& model, const std::filesystem::path& path,
                     const std::string& config_digest, std::uint64_t seed) {
  model.validate();
  nlohmann::json j;
  j["format"] = "w2s-student-v1";
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  for (const auto& row : model.weights) j["weights"].push_back(row);
  j["bias"] = model.bias;
  j["scaler"]["mean"] = model.scaler.mean;
  j["scaler"]["scale"] = model.scaler.scale;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

StudentRanker load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid checkpoint JSON in '" + path.string() + "': " + e.what(), 0);
  }
  if (j.value("format", "") != "w2s-student-v1") {
    throw ParseError("'" + path.string() + "' is not a w2s-student-v1 checkpoint", 0);
  }
  StudentRanker model;
  const auto& w = j.at("weights");
  if (w.size() != 5) throw ParseError("checkpoint weight row count != 5", 0);
  for (std::size_t c = 0; c < 5; ++c) {
    const auto row = w[c].get<std::vector<double>>();
    if (row.size() != kPairFeatureDim) {
      throw ParseError("checkpoint weight row " + std::to_string(c) + " has wrong width", 0);
    }
    std::copy(row.begin(), row.end(), model.weights[c].begin());
  }
  const auto bias = j.at("bias").get<std::vector<double>>();
  if (bias.size() != 5) throw ParseError("checkpoint bias has wrong width", 0);
  std::copy(bias.begin(), bias.end(), model.bias.begin());
  const auto mean = j.at("scaler").at("mean").get<std::vector<double>>();
  const auto scale = j.at("scaler").at("scale").get<std::vector<double>>();
  if (mean.size() != kPairFeatureDim || scale.size() != kPairFeatureDim) {
    throw ParseError("checkpoint scaler has wrong width", 0);
  }
  std::copy(mean.begin(), mean.end(), model.scaler.mean.begin());
  std::copy(scale.begin(), scale.end(), model.scaler.scale.begin());
  model.validate();
  return model;
}

}  // namespace w2s
