#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "w2s/annotate.hpp"
#include "w2s/correlation.hpp"
#include "w2s/curate.hpp"
#include "w2s/gmad.hpp"
#include "w2s/metrics.hpp"

namespace w2s {

/// Provenance stamped into every artifact file. `created` is the only
/// timestamp anywhere in an output, so reproducibility checks can strip it.
struct ArtifactHeader {
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string created;  // ISO-8601, filled by the writer when empty
};

// --- JSONL record streams -------------------------------------------------
// Every stream starts with one header object {"type":"header",...}; data
// rows follow, one JSON object per line.

void write_predictions_jsonl(const std::filesystem::path& path,
                             std::span<const ScorerPrediction> rows,
                             const ArtifactHeader& header);
std::vector<ScorerPrediction> read_predictions_jsonl(const std::filesystem::path& path);

void write_annotations_jsonl(const std::filesystem::path& path,
                             std::span<const PairAnnotation> rows,
                             const ArtifactHeader& header);
std::vector<PairAnnotation> read_annotations_jsonl(const std::filesystem::path& path);

void write_scored_pool_jsonl(const std::filesystem::path& path, const ScoredPool& pool,
                             const ArtifactHeader& header);
ScoredPool read_scored_pool_jsonl(const std::filesystem::path& path);

void write_mined_pairs_jsonl(const std::filesystem::path& path,
                             std::span<const MinedPair> rows, const ArtifactHeader& header);
std::vector<MinedPair> read_mined_pairs_jsonl(const std::filesystem::path& path);

/// Comparison logits {first, second, logits[5]} — the ingestion contract for
/// an external student's raw outputs.
struct ComparisonLogits {
  std::string first;
  std::string second;
  std::array<double, 5> logits{};
};
void write_comparisons_jsonl(const std::filesystem::path& path,
                             std::span<const ComparisonLogits> rows,
                             const ArtifactHeader& header);
std::vector<ComparisonLogits> read_comparisons_jsonl(const std::filesystem::path& path);

// --- CSV ------------------------------------------------------------------

/// clip_id plus the nine metric columns in canonical order; the artifact
/// header rides in a leading '#' comment line.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::map<std::string, MetricVector>& rows,
                       const ArtifactHeader& header);
std::map<std::string, MetricVector> read_metrics_csv(const std::filesystem::path& path);

/// JSONL twin of the metrics table: {"clip_id", <nine metric fields>}.
void write_metrics_jsonl(const std::filesystem::path& path,
                         const std::map<std::string, MetricVector>& rows,
                         const ArtifactHeader& header);
std::map<std::string, MetricVector> read_metrics_jsonl(const std::filesystem::path& path);

/// Ground truth {video_id, mos}.
std::map<std::string, double> read_truth_csv(const std::filesystem::path& path);
void write_truth_csv(const std::filesystem::path& path,
                     const std::map<std::string, double>& rows);

// --- JSON documents ---------------------------------------------------------

void write_histogram_json(const std::filesystem::path& path, const HistogramSet& set,
                          const ArtifactHeader& header);
HistogramSet read_histogram_json(const std::filesystem::path& path);

void write_plan_json(const std::filesystem::path& path, const CurationPlan& plan,
                     const ArtifactHeader& header);
CurationPlan read_plan_json(const std::filesystem::path& path);

void write_scores_json(const std::filesystem::path& path,
                       const std::map<std::string, double>& scores,
                       const ArtifactHeader& header);
std::map<std::string, double> read_scores_json(const std::filesystem::path& path);

void write_eval_report_json(const std::filesystem::path& path, const EvalReport& report,
                            const ArtifactHeader& header);

/// Serialization helpers shared by the CLI.
std::string now_iso8601();
std::string format_double(double v);

}  // namespace w2s
