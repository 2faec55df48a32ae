#include "w2s/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "w2s/media_io.hpp"

namespace w2s {

namespace {

// Band-limited value noise: a coarse random lattice sampled bilinearly.
struct ValueNoise {
  int cells;
  std::vector<double> lattice;

  ValueNoise(int cells_, std::mt19937_64& rng) : cells(cells_) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    lattice.resize(static_cast<std::size_t>(cells + 1) * (cells + 1));
    for (double& v : lattice) v = u(rng);
  }

  double at(double u, double v) const {
    const double x = u * cells;
    const double y = v * cells;
    const int x0 = std::clamp(static_cast<int>(x), 0, cells - 1);
    const int y0 = std::clamp(static_cast<int>(y), 0, cells - 1);
    const double fx = x - x0, fy = y - y0;
    auto l = [&](int xx, int yy) {
      return lattice[static_cast<std::size_t>(yy) * (cells + 1) + xx];
    };
    return (1 - fx) * (1 - fy) * l(x0, y0) + fx * (1 - fy) * l(x0 + 1, y0) +
           (1 - fx) * fy * l(x0, y0 + 1) + fx * fy * l(x0 + 1, y0 + 1);
  }
};

std::uint8_t to_u8(double v01) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v01, 0.0, 1.0) * 255.0));
}

}  // namespace

VideoClip make_fixture_clip(FixtureKind kind, std::uint64_t seed, int width, int height,
                            int frames, FrameRate fps) {
  std::mt19937_64 rng(seed);
  const ValueNoise coarse(6, rng);
  const ValueNoise fine(16, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double drift_x = 0.5 + u(rng);
  const double drift_y = 0.3 + u(rng);
  const int square = std::max(6, width / 6);

  std::vector<Frame> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height);
    const double ox = drift_x * t / width;
    const double oy = drift_y * t / height;
    const int sq_x = (t * 3) % std::max(1, width - square);
    const int sq_y = (t * 2) % std::max(1, height - square);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double un = static_cast<double>(x) / width;
        const double vn = static_cast<double>(y) / height;
        double value = 0;
        switch (kind) {
          case FixtureKind::ramp:
            value = 0.15 + 0.7 * std::fmod(un + vn + 0.07 * t, 1.0);
            break;
          case FixtureKind::texture:
            value = 0.5 * coarse.at(std::fmod(un + ox, 1.0), std::fmod(vn + oy, 1.0)) +
                    0.35 * fine.at(std::fmod(un + 2 * ox, 1.0), std::fmod(vn + 2 * oy, 1.0)) +
                    0.1;
            break;
          case FixtureKind::moving_square:
            value = 0.25 + 0.25 * coarse.at(un, vn);
            if (x >= sq_x && x < sq_x + square && y >= sq_y && y < sq_y + square) {
              value = 0.9;
            }
            break;
          case FixtureKind::mixed:
            value = 0.3 * un + 0.4 * coarse.at(std::fmod(un + ox, 1.0), vn) +
                    0.2 * fine.at(un, std::fmod(vn + oy, 1.0));
            if (x >= sq_x && x < sq_x + square && y >= sq_y && y < sq_y + square) {
              value = 0.85;
            }
            break;
        }
        data[static_cast<std::size_t>(y) * width + x] = to_u8(value);
      }
    }
    out.push_back(Frame(width, height, PixelLayout::luma8, std::move(data)));
  }
  return VideoClip(std::move(out), fps);
}

std::vector<VideoClip> bundled_fixture_clips(int frames) {
  std::vector<VideoClip> clips;
  const std::array<FixtureKind, 4> kinds = {FixtureKind::texture, FixtureKind::mixed,
                                            FixtureKind::moving_square, FixtureKind::ramp};
  for (std::uint64_t i = 0; i < 10; ++i) {
    clips.push_back(
        make_fixture_clip(kinds[i % kinds.size()], 1000 + i, 64, 64, frames, {25, 1}));
  }
  return clips;
}

namespace {

FixtureKind base_kind_for(const CorpusConfig& config, int index) {
  if (config.homogeneous_bases) return FixtureKind::texture;
  const std::array<FixtureKind, 4> kinds = {FixtureKind::texture, FixtureKind::mixed,
                                            FixtureKind::moving_square, FixtureKind::ramp};
  return kinds[static_cast<std::size_t>(index) % kinds.size()];
}

}  // namespace

const CorpusClip& SyntheticCorpus::by_id(const std::string& id) const {
  for (const auto& c : clips) {
    if (c.id == id) return c;
  }
  throw DomainError("unknown corpus clip '" + id + "'");
}

std::map<std::string, double> SyntheticCorpus::gt_scores() const {
  std::map<std::string, double> out;
  for (const auto& c : clips) out[c.id] = c.gt_quality;
  return out;
}

namespace {

struct PlannedClip {
  CorpusClip meta;
  VideoClip clip;
};

std::string base_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "base%03d", index);
  return buf;
}

// Pristine bases first, then ladders cycled over (base, family) until the
// target count is reached.
std::vector<PlannedClip> plan_corpus(const CorpusConfig& config,
                                     const DistortionContext* ctx) {
  if (config.base_clips < 1) throw DomainError("corpus needs at least one base clip");
  if (config.families.empty()) throw DomainError("corpus family list is empty");

  std::vector<PlannedClip> out;

  std::vector<int> base_indices;
  if (config.base_whitelist.empty()) {
    for (int b = 0; b < config.base_clips; ++b) base_indices.push_back(b);
  } else {
    base_indices = config.base_whitelist;
    std::sort(base_indices.begin(), base_indices.end());
    for (int b : base_indices) {
      if (b < 0 || b >= config.base_clips) {
        throw DomainError("base whitelist index " + std::to_string(b) + " outside 0.." +
                          std::to_string(config.base_clips - 1));
      }
    }
  }

  std::vector<VideoClip> bases;
  for (std::size_t slot = 0; slot < base_indices.size(); ++slot) {
    const int b = base_indices[slot];
    bases.push_back(make_fixture_clip(base_kind_for(config, b),
                                      config.seed * 7919 + static_cast<std::uint64_t>(b),
                                      config.width, config.height, config.frames,
                                      config.fps));
    CorpusClip meta;
    meta.id = base_name(b);
    meta.base_id = meta.id;
    out.push_back(PlannedClip{meta, bases.back()});
  }

  std::size_t family_cursor = 0;
  for (int round = 0; out.size() < config.target_clips; ++round) {
    for (std::size_t slot = 0; slot < base_indices.size() && out.size() < config.target_clips;
         ++slot) {
      const int b = base_indices[slot];
      const DistortionFamily family = config.families[family_cursor % config.families.size()];
      ++family_cursor;
      const std::uint64_t seed =
          config.seed * 7919 + static_cast<std::uint64_t>(b) * 131 +
          static_cast<std::uint64_t>(round);
      const int levels = level_count(family);
      const std::string ladder_key = base_name(b) + ":" + to_string(family) + ":" +
                                     std::to_string(round);
      for (int level = 1; level <= levels && out.size() < config.target_clips; ++level) {
        CorpusClip meta;
        meta.id = base_name(b) + "_" + to_string(family) + "_l" + std::to_string(level) +
                  (round > 0 ? "_r" + std::to_string(round) : "");
        meta.base_id = base_name(b);
        meta.family = family;
        meta.level = level;
        meta.severity = static_cast<double>(level) / static_cast<double>(levels);
        meta.gt_quality = -meta.severity;
        meta.ladder_key = ladder_key;
        out.push_back(
            PlannedClip{meta, apply(bases[slot], DistortionSpec{family, level, seed}, ctx)});
      }
    }
  }
  return out;
}

}  // namespace

SyntheticCorpus build_synthetic_corpus(const CorpusConfig& config,
                                       const DistortionContext* ctx,
                                       const MetricsConfig& metrics) {
  SyntheticCorpus corpus;
  for (auto& planned : plan_corpus(config, ctx)) {
    corpus.features[planned.meta.id] = metric_vector(planned.clip, metrics);
    if (planned.meta.family.has_value()) {
      corpus.ladders[planned.meta.ladder_key].push_back(planned.meta.id);
    }
    corpus.clips.push_back(std::move(planned.meta));
  }
  return corpus;
}

std::map<std::string, MetricVector> candidate_base_features(const CorpusConfig& config,
                                                            const MetricsConfig& metrics) {
  std::map<std::string, MetricVector> out;
  for (int b = 0; b < config.base_clips; ++b) {
    const VideoClip clip =
        make_fixture_clip(base_kind_for(config, b),
                          config.seed * 7919 + static_cast<std::uint64_t>(b), config.width,
                          config.height, config.frames, config.fps);
    out[base_name(b)] = metric_vector(clip, metrics);
  }
  return out;
}

int base_index_of(const std::string& base_id) {
  if (base_id.rfind("base", 0) != 0) {
    throw DomainError("'" + base_id + "' is not a candidate base id");
  }
  return std::stoi(base_id.substr(4));
}

std::map<std::string, std::filesystem::path> export_corpus_clips(
    const CorpusConfig& config, const std::filesystem::path& dir,
    const DistortionContext* ctx) {
  std::filesystem::create_directories(dir);
  std::map<std::string, std::filesystem::path> manifest;
  for (auto& planned : plan_corpus(config, ctx)) {
    const auto path = dir / (planned.meta.id + ".y4m");
    save_clip(planned.clip, path, ClipFormat::y4m);
    manifest[planned.meta.id] = path;
  }
  return manifest;
}

}  // namespace w2s
