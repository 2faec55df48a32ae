#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "w2s/distortion.hpp"
#include "w2s/frame.hpp"
#include "w2s/metrics.hpp"

namespace w2s {

enum class FixtureKind {
  ramp,           // smooth diagonal gradient drifting over time
  texture,        // band-limited value noise, per-frame drift
  moving_square,  // bright square translating over a textured background
  mixed,          // texture + moving square + gradient
};

/// Deterministic synthetic test clip (luma8).
VideoClip make_fixture_clip(FixtureKind kind, std::uint64_t seed, int width = 64,
                            int height = 64, int frames = 24, FrameRate fps = {25, 1});

/// The fixture family used by the distortion ladder checks: ten textured
/// clips with distinct seeds and kinds.
std::vector<VideoClip> bundled_fixture_clips(int frames = 24);

/// One clip of the synthetic experiment corpus. Severity is the distortion
/// level normalized by its family's grid length (0 for pristine);
/// ground-truth quality is its negative.
struct CorpusClip {
  std::string id;
  std::string base_id;
  std::optional<DistortionFamily> family;
  int level = 0;
  double severity = 0;
  double gt_quality = 0;
  std::string ladder_key;  // clips of one ladder share base, family and seed
};

struct CorpusConfig {
  int base_clips = 25;
  int width = 64;
  int height = 64;
  int frames = 18;
  FrameRate fps = {12, 1};
  std::size_t target_clips = 200;
  std::uint64_t seed = 1;
  /// Homogeneous textured bases keep base content comparable, so severity is
  /// the dominant axis; disable to rotate through all fixture kinds.
  bool homogeneous_bases = true;
  /// When non-empty, only these base indices (0-based, < base_clips) take
  /// part; the curation step feeds its selection through here.
  std::vector<int> base_whitelist;
  /// Families cycled across base clips when deriving ladders. The spatial
  /// families appear twice: they carry most of the metric-visible signal,
  /// which keeps the toy experiment's difficulty in the supervision rather
  /// than in model capacity.
  std::vector<DistortionFamily> families = {
      DistortionFamily::gblur,   DistortionFamily::gnoise, DistortionFamily::darken,
      DistortionFamily::resize,  DistortionFamily::brighten, DistortionFamily::gblur,
      DistortionFamily::gnoise,  DistortionFamily::darken, DistortionFamily::resize,
      DistortionFamily::brighten, DistortionFamily::stutter, DistortionFamily::jitter,
      DistortionFamily::h264,    DistortionFamily::h265};
};

/// Corpus with per-clip metrics; clips themselves are dropped after metric
/// extraction to keep the footprint small.
struct SyntheticCorpus {
  std::vector<CorpusClip> clips;
  std::map<std::string, MetricVector> features;
  /// Ladder membership: ids ordered by level, keyed by CorpusClip::ladder_key.
  std::map<std::string, std::vector<std::string>> ladders;

  const CorpusClip& by_id(const std::string& id) const;
  std::map<std::string, double> gt_scores() const;
};

/// Builds pristine bases plus severity ladders until `target_clips` is
/// reached. Requires `ctx` when the family list contains h264/h265.
SyntheticCorpus build_synthetic_corpus(const CorpusConfig& config,
                                       const DistortionContext* ctx = nullptr,
                                       const MetricsConfig& metrics = {});

/// Metric vectors of the candidate base clips alone (ids base000..), for
/// curating which bases enter the corpus.
std::map<std::string, MetricVector> candidate_base_features(const CorpusConfig& config,
                                                            const MetricsConfig& metrics = {});

/// Base index encoded in a candidate id ("base012" -> 12).
int base_index_of(const std::string& base_id);

/// Writes each clip of a freshly regenerated corpus to `dir` as y4m and
/// returns the manifest rows {id -> path}. Used by the CLI to materialize
/// the demo corpus on disk.
std::map<std::string, std::filesystem::path> export_corpus_clips(
    const CorpusConfig& config, const std::filesystem::path& dir,
    const DistortionContext* ctx = nullptr);

}  // namespace w2s
