#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "w2s/corpus.hpp"
#include "w2s/curate.hpp"
#include "w2s/loop.hpp"
#include "w2s/metrics.hpp"

namespace w2s {

/// One configuration document for the whole pipeline. Flags override these
/// values per subcommand; the digest of the loaded document is stamped into
/// every artifact together with the seed.
struct PipelineConfig {
  // paths
  std::filesystem::path output_dir = "w2s-out";
  std::filesystem::path corpus_dir;  // empty: synthesize the corpus
  std::optional<std::string> encoder_template;

  std::uint64_t seed = 1;

  CorpusConfig corpus;
  double teacher_noise_sigma = 0.15;
  MetricsConfig metrics;

  bool curation_enabled = true;
  int curation_bins = 10;
  double curation_keep_fraction = 0.8;
  MatchMode curation_mode = MatchMode::greedy;

  LoopSettings loop;
};

/// Loads .json or .toml (a flat TOML subset: [section] tables with scalar,
/// string and scalar-array values).
PipelineConfig load_config(const std::filesystem::path& path);

/// Stable FNV-1a digest (hex) of the canonicalized configuration.
std::string config_digest(const PipelineConfig& config);

/// Template resolution for the encoder, honoring W2S_ENCODER.
EncoderInvocation config_encoder(const PipelineConfig& config);

}  // namespace w2s
