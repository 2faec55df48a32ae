// w2s: data-engineering and calibration pipeline for pairwise video quality
// training. Subcommands map onto the library modules; `run-all` drives the
// full three-stage procedure on a synthetic corpus.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "w2s/config.hpp"
#include "w2s/corpus.hpp"
#include "w2s/correlation.hpp"
#include "w2s/curate.hpp"
#include "w2s/distortion.hpp"
#include "w2s/gmad.hpp"
#include "w2s/loop.hpp"
#include "w2s/media_io.hpp"
#include "w2s/records.hpp"
#include "w2s/student.hpp"
#include "w2s/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

w2s::PipelineConfig effective_config(const CommonArgs& args) {
  w2s::PipelineConfig config =
      args.config_path.empty() ? w2s::PipelineConfig{} : w2s::load_config(args.config_path);
  if (args.seed_set) {
    config.seed = args.seed;
    config.corpus.seed = args.seed;
    config.loop.seed = args.seed;
  }
  return config;
}

w2s::ArtifactHeader header_for(const w2s::PipelineConfig& config,
                               const std::string& created = "") {
  return w2s::ArtifactHeader{w2s::config_digest(config), config.seed, created};
}

int thread_budget() {
  if (const char* env = std::getenv("W2S_THREADS"); env != nullptr && *env != '\0') {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

// Index-parallel map with deterministic result placement.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int threads = std::min<int>(thread_budget(), static_cast<int>(count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
          fn(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<fs::path> clip_files_in(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw w2s::IoError("'" + dir.string() + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".y4m" || ext == ".raw") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw w2s::IoError("no .y4m or .raw clips under '" + dir.string() + "'");
  }
  return files;
}

// ---- subcommand bodies -----------------------------------------------------

int cmd_metrics(const CommonArgs& common, const std::string& in_dir,
                const std::string& out_csv, const std::string& out_jsonl) {
  const auto config = effective_config(common);
  const auto files = clip_files_in(in_dir);

  std::vector<std::pair<std::string, w2s::MetricVector>> rows(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    const w2s::VideoClip clip = w2s::load_clip(files[i]);
    rows[i] = {files[i].stem().string(), w2s::metric_vector(clip, config.metrics)};
  });

  std::map<std::string, w2s::MetricVector> table(rows.begin(), rows.end());
  const auto header = header_for(config);
  if (!out_csv.empty()) w2s::write_metrics_csv(out_csv, table, header);
  if (!out_jsonl.empty()) w2s::write_metrics_jsonl(out_jsonl, table, header);
  std::cout << "metrics: " << table.size() << " clips -> "
            << (out_csv.empty() ? out_jsonl : out_csv) << "\n";
  return 0;
}

int cmd_curate(const CommonArgs& common, const std::string& metrics_path,
               const std::string& target_path, const std::string& make_target_path,
               std::size_t k, const std::string& mode_token, const std::string& out_path) {
  const auto config = effective_config(common);
  const auto table = w2s::read_metrics_csv(metrics_path);
  std::vector<w2s::MetricVector> vectors;
  vectors.reserve(table.size());
  for (const auto& [id, vec] : table) vectors.push_back(vec);

  if (!make_target_path.empty()) {
    const auto target = w2s::build_histograms(vectors, config.curation_bins);
    w2s::write_histogram_json(make_target_path, target, header_for(config));
    std::cout << "curate: target histogram (" << config.curation_bins << " bins) -> "
              << make_target_path << "\n";
    if (target_path.empty()) return 0;
  }

  const auto target = w2s::read_histogram_json(target_path);
  const w2s::MatchMode mode =
      mode_token == "exact" ? w2s::MatchMode::exact : w2s::MatchMode::greedy;
  const auto plan = w2s::match_subset(table, target, k, mode);
  w2s::write_plan_json(out_path, plan, header_for(config));
  std::cout << "curate: selected " << plan.selected.size() << " of " << table.size()
            << ", objective " << plan.objective << " -> " << out_path << "\n";
  return 0;
}

int cmd_distort(const CommonArgs& common, const std::string& in_path,
                const std::string& spec_token, const std::string& ladder_family,
                std::uint64_t seed, const std::string& out_path,
                const std::string& out_dir, const std::string& manifest_path) {
  const auto config = effective_config(common);
  const w2s::VideoClip clip = w2s::load_clip(in_path);

  w2s::DistortionContext ctx;
  ctx.scratch_dir = fs::temp_directory_path();
  const bool needs_encoder = [&] {
    if (!spec_token.empty()) {
      const auto family = w2s::parse_distortion_spec(spec_token).family;
      return family == w2s::DistortionFamily::h264 || family == w2s::DistortionFamily::h265;
    }
    return ladder_family == "h264" || ladder_family == "h265";
  }();
  if (needs_encoder) ctx.encoder = w2s::config_encoder(config);

  if (!spec_token.empty()) {
    const auto spec = w2s::parse_distortion_spec(spec_token);
    const auto distorted = w2s::apply(clip, spec, &ctx);
    w2s::save_clip(distorted, out_path);
    std::cout << "distort: " << spec_token << " -> " << out_path << "\n";
    return 0;
  }

  const auto family = w2s::distortion_family_from_string(ladder_family);
  const auto ladder = w2s::severity_ladder(clip, family, seed, &ctx);
  fs::create_directories(out_dir);
  const std::string source_id = fs::path(in_path).stem().string();

  std::ofstream manifest;
  if (!manifest_path.empty()) {
    manifest.open(manifest_path, std::ios::app);
    if (!manifest) throw w2s::IoError("cannot open manifest '" + manifest_path + "'");
  }
  for (std::size_t level = 1; level <= ladder.size(); ++level) {
    const fs::path out = fs::path(out_dir) / (source_id + "_" + ladder_family + "_l" +
                                              std::to_string(level) + ".y4m");
    w2s::save_clip(ladder[level - 1], out, w2s::ClipFormat::y4m);
    if (manifest.is_open()) {
      manifest << json{{"source_id", source_id},
                       {"family", ladder_family},
                       {"level", level},
                       {"seed", seed},
                       {"output_path", out.string()}}
                      .dump()
               << "\n";
    }
  }
  std::cout << "distort: " << ladder.size() << "-level " << ladder_family << " ladder -> "
            << out_dir << "\n";
  return 0;
}

int cmd_annotate(const CommonArgs& common, const std::string& preds_path,
                 const std::string& pairs_path, std::size_t sample_count,
                 const std::string& severity_manifest, int stage,
                 const std::string& out_path) {
  const auto config = effective_config(common);
  std::vector<w2s::PairAnnotation> annotations;

  if (!severity_manifest.empty()) {
    // ladder manifest rows -> all distinct-level pairs per (source, family, seed)
    std::ifstream in(severity_manifest);
    if (!in) throw w2s::IoError("cannot open manifest '" + severity_manifest + "'");
    struct Row {
      std::string id;
      int level;
    };
    std::map<std::string, std::vector<Row>> ladders;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (j.value("type", "") == "header") continue;
      const std::string key = j.at("source_id").get<std::string>() + ":" +
                              j.at("family").get<std::string>() + ":" +
                              std::to_string(j.at("seed").get<std::uint64_t>());
      ladders[key].push_back(Row{fs::path(j.at("output_path").get<std::string>())
                                     .stem()
                                     .string(),
                                 j.at("level").get<int>()});
    }
    for (const auto& [key, rows] : ladders) {
      for (const auto& a : rows) {
        for (const auto& b : rows) {
          if (a.level == b.level) continue;
          annotations.push_back(w2s::PairAnnotation{
              a.id, b.id, w2s::severity_label(a.level, b.level),
              w2s::AnnotationSource::severity, stage});
        }
      }
    }
  } else {
    w2s::PredictionStore store;
    for (auto& p : w2s::read_predictions_jsonl(preds_path)) store.add(std::move(p));

    std::vector<std::pair<std::string, std::string>> pairs;
    if (!pairs_path.empty()) {
      std::ifstream in(pairs_path);
      if (!in) throw w2s::IoError("cannot open pairs '" + pairs_path + "'");
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (j.value("type", "") == "header") continue;
        pairs.emplace_back(j.at("first").get<std::string>(),
                           j.at("second").get<std::string>());
      }
    } else {
      // uniform sampling without replacement over the store's videos
      std::vector<std::string> ids;
      for (const auto& p : w2s::read_predictions_jsonl(preds_path)) {
        if (std::find(ids.begin(), ids.end(), p.video_id) == ids.end()) {
          ids.push_back(p.video_id);
        }
      }
      std::sort(ids.begin(), ids.end());
      if (ids.size() < 2) throw w2s::DomainError("need at least two scored videos");
      std::mt19937_64 rng(config.seed);
      std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
      std::set<std::string> used;
      std::size_t attempts = 0;
      while (pairs.size() < sample_count && attempts < sample_count * 64 + 1024) {
        ++attempts;
        const auto& a = ids[pick(rng)];
        const auto& b = ids[pick(rng)];
        if (a == b) continue;
        const std::string key = a < b ? a + "|" + b : b + "|" + a;
        if (!used.insert(key).second) continue;
        pairs.emplace_back(a, b);
      }
    }

    const auto batch = w2s::annotate_corpus(pairs, store, stage);
    annotations = batch.annotations;
    for (const auto& failure : batch.failures) {
      std::cerr << "annotate: pair " << failure.pair_index << " (" << failure.first << ", "
                << failure.second << ") skipped: " << failure.reason << "\n";
    }
  }

  w2s::write_annotations_jsonl(out_path, annotations, header_for(config));
  std::cout << "annotate: " << annotations.size() << " annotations -> " << out_path << "\n";
  return 0;
}

int cmd_mine(const CommonArgs& common, const std::string& pool_path, int k_levels,
             int per_level, const std::string& predicted_path, const std::string& truth_path,
             const std::string& out_path) {
  const auto config = effective_config(common);

  if (!predicted_path.empty() || !truth_path.empty()) {
    const auto predicted = w2s::read_annotations_jsonl(predicted_path);
    const auto truth = w2s::read_annotations_jsonl(truth_path);
    std::map<std::string, w2s::RankLabel> truth_by_pair;
    for (const auto& a : truth) truth_by_pair[a.pair_id()] = a.label;
    if (predicted.size() != truth.size()) {
      throw w2s::DomainError("predicted and truth annotation counts differ (" +
                             std::to_string(predicted.size()) + " vs " +
                             std::to_string(truth.size()) + ")");
    }
    std::vector<std::string> ids;
    std::vector<w2s::RankLabel> pred_labels, truth_labels;
    for (const auto& a : predicted) {
      const auto it = truth_by_pair.find(a.pair_id());
      if (it == truth_by_pair.end()) {
        throw w2s::DomainError("pair " + a.pair_id() + " missing from truth annotations");
      }
      ids.push_back(a.pair_id());
      pred_labels.push_back(a.label);
      truth_labels.push_back(it->second);
    }
    const auto misses = w2s::misclassified_synthetic(ids, pred_labels, truth_labels);
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw w2s::IoError("cannot open '" + out_path + "'");
    const auto header = header_for(config);
    out << json{{"type", "header"},
                {"config_digest", header.config_digest},
                {"seed", header.seed},
                {"created", w2s::now_iso8601()}}
               .dump()
        << "\n";
    for (const auto& id : misses) {
      const auto bar = id.find('|');
      out << json{{"first", id.substr(0, bar)}, {"second", id.substr(bar + 1)}}.dump()
          << "\n";
    }
    std::cout << "mine: " << misses.size() << " misclassified pairs -> " << out_path << "\n";
    return 0;
  }

  const auto pool = w2s::read_scored_pool_jsonl(pool_path);
  const auto report = w2s::mine_gmad(pool, k_levels, per_level);
  w2s::write_mined_pairs_jsonl(out_path, report.pairs, header_for(config));
  for (const auto& [axis, levels] : report.skipped_levels) {
    std::cerr << "mine: " << axis << "-fixed skipped " << levels.size()
              << " level(s) with < 2 videos\n";
  }
  std::cout << "mine: " << report.pairs.size() << " pairs -> " << out_path << "\n";
  return 0;
}

int cmd_train(const CommonArgs& common, const std::string& annotations_path,
              const std::string& features_path, int stage, const std::string& prior_path,
              int epochs, double lr, int batch, bool no_conf, const std::string& out_path,
              const std::string& report_path) {
  const auto config = effective_config(common);
  if (stage > 1 && prior_path.empty()) {
    throw w2s::DomainError("stage " + std::to_string(stage) +
                           " requires --prior with the previous stage's checkpoint");
  }
  if (!prior_path.empty()) {
    w2s::load_checkpoint(prior_path);  // existence and format check
  }

  const auto annotations = w2s::read_annotations_jsonl(annotations_path);
  const auto features = w2s::read_metrics_csv(features_path);

  w2s::TrainOptions options = config.loop.stages.empty()
                                  ? w2s::TrainOptions{}
                                  : config.loop.stages.front().train;
  options.seed = config.seed * 31 + static_cast<std::uint64_t>(stage);
  if (epochs >= 0) options.epochs = epochs;
  if (lr > 0) options.learning_rate = lr;
  if (batch > 0) options.batch_size = batch;
  if (no_conf) options.use_conf = false;

  const auto result = w2s::train_student(annotations, features, options);
  w2s::save_checkpoint(result.model, out_path, w2s::config_digest(config), config.seed);

  if (!report_path.empty()) {
    json epochs_json = json::array();
    for (const auto& e : result.report.epochs) {
      epochs_json.push_back(
          {{"ce", e.ce}, {"conf", e.conf}, {"lambda", e.lambda}, {"combined", e.combined}});
    }
    std::ofstream out(report_path, std::ios::trunc);
    out << json{{"header",
                 {{"config_digest", w2s::config_digest(config)},
                  {"seed", config.seed},
                  {"created", w2s::now_iso8601()}}},
                {"stage", stage},
                {"annotations", result.report.annotation_count},
                {"examples", result.report.example_count},
                {"epochs", epochs_json}}
               .dump(2)
        << "\n";
  }
  std::cout << "train: " << result.report.annotation_count << " pairs, "
            << result.report.epochs.size() << " epochs -> " << out_path << "\n";
  return 0;
}

w2s::ProbabilityMatrix block_from_json(const json& rows) {
  std::vector<std::vector<double>> parsed;
  for (const auto& row : rows) parsed.push_back(row.get<std::vector<double>>());
  return w2s::ProbabilityMatrix::from_rows(parsed);
}

int cmd_calibrate(const CommonArgs& common, const std::string& model_path,
                  const std::string& features_path, const std::string& anchors_path,
                  const std::string& preds_path, const std::string& logits_path,
                  const std::string& out_path) {
  const auto config = effective_config(common);
  std::map<std::string, double> scores;

  if (!logits_path.empty()) {
    // External comparisons: rows (anchor = first, test = second) per test id.
    if (anchors_path.empty()) {
      throw w2s::DomainError("--logits needs --anchors with the anchor ids and block");
    }
    std::ifstream in(anchors_path);
    if (!in) throw w2s::IoError("cannot open anchors '" + anchors_path + "'");
    json aj;
    in >> aj;
    const auto anchor_ids = aj.at("ids").get<std::vector<std::string>>();
    const auto block = block_from_json(aj.at("block"));

    std::map<std::string, std::map<std::string, w2s::TokenDistribution>> by_test;
    for (const auto& row : w2s::read_comparisons_jsonl(logits_path)) {
      by_test[row.second][row.first] = w2s::token_probs(row.logits);
    }
    for (const auto& [test_id, dists] : by_test) {
      std::vector<w2s::TokenDistribution> ordered;
      for (const auto& anchor : anchor_ids) {
        const auto it = dists.find(anchor);
        if (it == dists.end()) {
          throw w2s::DomainError("test '" + test_id + "' lacks a comparison against anchor '" +
                                 anchor + "'");
        }
        ordered.push_back(it->second);
      }
      scores[test_id] = w2s::calibrate(ordered, block, config.loop.map);
    }
  } else {
    if (model_path.empty() || features_path.empty()) {
      throw w2s::DomainError("calibrate needs either --logits or --model with --features");
    }
    const auto model = w2s::load_checkpoint(model_path);
    const auto features = w2s::read_metrics_csv(features_path);

    std::vector<std::string> anchor_ids;
    if (!anchors_path.empty()) {
      std::ifstream in(anchors_path);
      if (!in) throw w2s::IoError("cannot open anchors '" + anchors_path + "'");
      json aj;
      in >> aj;
      anchor_ids = aj.at("ids").get<std::vector<std::string>>();
    } else if (!preds_path.empty()) {
      // percentile anchors over the weak-score distribution
      w2s::PredictionStore store;
      for (auto& p : w2s::read_predictions_jsonl(preds_path)) store.add(std::move(p));
      std::vector<std::pair<double, std::string>> ranked;
      for (const auto& [id, vec] : features) {
        if (store.has(id)) ranked.emplace_back(store.stats(id).mean, id);
      }
      if (ranked.size() < config.loop.anchor_percentiles.size()) {
        throw w2s::DomainError("too few scored videos to pick anchors");
      }
      std::sort(ranked.begin(), ranked.end());
      for (double p : config.loop.anchor_percentiles) {
        const auto idx = static_cast<std::size_t>(
            std::lround(p / 100.0 * static_cast<double>(ranked.size() - 1)));
        anchor_ids.push_back(ranked[idx].second);
      }
    } else {
      throw w2s::DomainError("calibrate needs --anchors or --preds to choose anchors");
    }

    for (const auto& id : anchor_ids) {
      if (!features.count(id)) {
        throw w2s::DomainError("anchor '" + id + "' missing from the features table");
      }
    }

    w2s::ProbabilityMatrix block(anchor_ids.size());
    for (std::size_t i = 0; i < anchor_ids.size(); ++i) {
      for (std::size_t j = i + 1; j < anchor_ids.size(); ++j) {
        const auto& fi = features.at(anchor_ids[i]);
        const auto& fj = features.at(anchor_ids[j]);
        const double j_over_i = w2s::soft_score(w2s::predict_pair(model, fi, fj));
        const double i_over_j = w2s::soft_score(w2s::predict_pair(model, fj, fi));
        block.set_pair(i, j, 0.5 * ((1.0 - j_over_i) + i_over_j));
      }
    }

    for (const auto& [id, feat] : features) {
      std::vector<w2s::TokenDistribution> dists;
      for (const auto& anchor : anchor_ids) {
        const auto forward = w2s::predict_pair(model, features.at(anchor), feat);
        const auto mirrored = w2s::predict_pair(model, feat, features.at(anchor)).mirrored();
        w2s::TokenDistribution avg;
        for (std::size_t k = 0; k < 5; ++k) {
          avg.probs[k] = 0.5 * (forward.probs[k] + mirrored.probs[k]);
        }
        dists.push_back(avg);
      }
      scores[id] = w2s::calibrate(dists, block, config.loop.map);
    }
  }

  w2s::write_scores_json(out_path, scores, header_for(config));
  std::cout << "calibrate: " << scores.size() << " scores -> " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& common, const std::string& scores_path,
                 const std::string& truth_path, const std::string& dataset,
                 const std::string& out_path) {
  const auto config = effective_config(common);
  const auto scores = w2s::read_scores_json(scores_path);
  const auto truth = w2s::read_truth_csv(truth_path);
  const auto report = w2s::benchmark(scores, truth, dataset);
  w2s::write_eval_report_json(out_path, report, header_for(config));
  std::cout << "evaluate: " << dataset << " n=" << report.n << " srcc=" << report.srcc
            << " plcc=" << report.plcc << " -> " << out_path << "\n";
  return 0;
}

int cmd_run_all(const CommonArgs& common) {
  auto config = effective_config(common);
  if (!config.corpus_dir.empty()) {
    throw w2s::DomainError("run-all drives the synthetic corpus; use the individual "
                           "subcommands for an external corpus directory");
  }
  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);
  const std::string digest = w2s::config_digest(config);
  const std::string created = w2s::now_iso8601();
  const w2s::ArtifactHeader header{digest, config.seed, created};

  const bool needs_encoder =
      std::any_of(config.corpus.families.begin(), config.corpus.families.end(),
                  [](w2s::DistortionFamily f) {
                    return f == w2s::DistortionFamily::h264 ||
                           f == w2s::DistortionFamily::h265;
                  });
  w2s::DistortionContext ctx;
  ctx.scratch_dir = out_dir / "scratch";
  if (needs_encoder) ctx.encoder = w2s::config_encoder(config);
  const w2s::DistortionContext* ctx_ptr = needs_encoder ? &ctx : nullptr;

  // 1. curation: pick which candidate bases enter the corpus
  if (config.curation_enabled && config.curation_keep_fraction < 1.0) {
    w2s::CorpusConfig candidates = config.corpus;
    candidates.base_clips = static_cast<int>(std::lround(
        config.corpus.base_clips / config.curation_keep_fraction));
    const auto base_features = w2s::candidate_base_features(candidates, config.metrics);
    std::vector<w2s::MetricVector> vectors;
    for (const auto& [id, vec] : base_features) vectors.push_back(vec);
    const auto target = w2s::build_histograms(vectors, config.curation_bins);
    const auto plan = w2s::match_subset(
        base_features, target, static_cast<std::size_t>(config.corpus.base_clips),
        config.curation_mode);
    w2s::write_histogram_json(out_dir / "curation_target.json", target, header);
    w2s::write_plan_json(out_dir / "curation_plan.json", plan, header);
    config.corpus = candidates;
    for (const auto& id : plan.selected) {
      config.corpus.base_whitelist.push_back(w2s::base_index_of(id));
    }
    std::cout << "run-all: curated " << plan.selected.size() << " of "
              << candidates.base_clips << " candidate bases (objective " << plan.objective
              << ")\n";
  }

  // 2. corpus + metrics + teacher predictions
  std::cout << "run-all: building corpus (" << config.corpus.target_clips << " clips)\n";
  w2s::SyntheticCorpus corpus =
      w2s::build_synthetic_corpus(config.corpus, ctx_ptr, config.metrics);
  w2s::write_metrics_csv(out_dir / "metrics.csv", corpus.features, header);

  const auto teachers = w2s::default_teachers(config.seed, config.teacher_noise_sigma);
  std::vector<w2s::ScorerPrediction> predictions;
  for (const auto& clip : corpus.clips) {
    for (const auto& teacher : teachers) {
      predictions.push_back(teacher.predict(corpus.features.at(clip.id), clip.id));
    }
  }
  w2s::write_predictions_jsonl(out_dir / "predictions.jsonl", predictions, header);
  w2s::write_truth_csv(out_dir / "ground_truth.csv", corpus.gt_scores());

  // 3. three-stage loop
  w2s::W2sLoop loop(std::move(corpus), teachers, config.loop);
  std::cout << "run-all: train pool " << loop.train_ids().size() << ", eval pool "
            << loop.eval_ids().size() << "\n";

  w2s::LoopResult result = loop.run();

  for (std::size_t s = 0; s < result.stage_reports.size(); ++s) {
    const auto& report = result.stage_reports[s];
    w2s::write_annotations_jsonl(
        out_dir / ("stage_" + std::to_string(report.stage) + "_annotations.jsonl"),
        loop.stage_training_sets()[s], header);
    json j;
    j["header"] = {{"config_digest", digest}, {"seed", config.seed}, {"created", created}};
    j["stage"] = report.stage;
    j["pairs"] = {{"ensemble", report.ensemble_count},
                  {"severity", report.severity_count},
                  {"gmad", report.gmad_count},
                  {"carryover", report.carryover_count},
                  {"total", report.training_pairs}};
    j["final_epoch"] = {{"ce", report.final_epoch.ce},
                        {"conf", report.final_epoch.conf},
                        {"lambda", report.final_epoch.lambda},
                        {"combined", report.final_epoch.combined}};
    j["eval"] = {{"srcc", report.srcc}, {"plcc", report.plcc}, {"n", report.eval_n}};
    std::ofstream out(out_dir / ("stage_" + std::to_string(report.stage) + "_report.json"),
                      std::ios::trunc);
    out << j.dump(2) << "\n";
    std::cout << "run-all: stage " << report.stage << " srcc=" << report.srcc
              << " plcc=" << report.plcc << " pairs=" << report.training_pairs << "\n";
  }

  w2s::save_checkpoint(result.final_student, out_dir / "student_stage3.json", digest,
                       config.seed);
  w2s::write_scores_json(out_dir / "final_scores.json", result.final_scores, header);

  // anchors file for external calibration runs
  {
    const auto anchors = loop.anchor_ids();
    const auto block = loop.anchor_block(result.final_student);
    json rows = json::array();
    for (std::size_t i = 0; i < block.items(); ++i) {
      json row = json::array();
      for (std::size_t j2 = 0; j2 < block.items(); ++j2) row.push_back(block.at(i, j2));
      rows.push_back(row);
    }
    std::ofstream out(out_dir / "anchors.json", std::ios::trunc);
    out << json{{"header",
                 {{"config_digest", digest}, {"seed", config.seed}, {"created", created}}},
                {"ids", anchors},
                {"block", rows}}
               .dump(2)
        << "\n";
  }

  json summary;
  summary["header"] = {{"config_digest", digest}, {"seed", config.seed}, {"created", created}};
  summary["teacher_srcc"] = result.teacher_srcc;
  summary["mean_teacher_srcc"] = result.mean_teacher_srcc;
  for (const auto& report : result.stage_reports) {
    summary["stage_srcc"].push_back(report.srcc);
  }
  std::ofstream summary_out(out_dir / "run_summary.json", std::ios::trunc);
  summary_out << summary.dump(2) << "\n";

  std::cout << "run-all: mean teacher srcc " << result.mean_teacher_srcc
            << ", final student srcc " << result.stage_reports.back().srcc << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"w2s: pairwise video-quality data engineering and calibration pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --config/--seed appear after the subcommand
  app.footer("Environment: W2S_ENCODER overrides the encoder command template; "
             "W2S_THREADS caps metric-extraction parallelism.");

  CommonArgs common;
  app.add_option("--config", common.config_path, "pipeline config (.json or .toml)")
      ->envname("W2S_CONFIG");
  app.add_option("--seed", common.seed, "override the config seed")
      ->each([&](const std::string&) { common.seed_set = true; });

  // metrics
  auto* metrics = app.add_subcommand("metrics", "compute the nine-metric table for a corpus");
  std::string metrics_in, metrics_csv, metrics_jsonl;
  metrics->add_option("--in", metrics_in, "directory of .y4m/.raw clips")->required();
  metrics->add_option("--out", metrics_csv, "output CSV path");
  metrics->add_option("--jsonl", metrics_jsonl, "optional JSONL twin");

  // curate
  auto* curate = app.add_subcommand("curate", "histogram-matched subset selection");
  std::string curate_metrics, curate_target, curate_make_target, curate_mode = "greedy",
              curate_out = "plan.json";
  std::size_t curate_k = 0;
  curate->add_option("--metrics", curate_metrics, "metrics CSV of the pool")->required();
  curate->add_option("--target", curate_target, "target histogram JSON");
  curate->add_option("--make-target", curate_make_target,
                     "write the pool's histogram JSON here and exit");
  curate->add_option("--k", curate_k, "subset size");
  curate->add_option("--mode", curate_mode, "exact or greedy")
      ->check(CLI::IsMember({"exact", "greedy"}));
  curate->add_option("--out", curate_out, "plan JSON output");

  // distort
  auto* distort = app.add_subcommand("distort", "apply a distortion or a severity ladder");
  std::string distort_in, distort_spec, distort_ladder, distort_out, distort_out_dir,
      distort_manifest;
  std::uint64_t distort_seed = 0;
  distort->add_option("--in", distort_in, "input clip")->required();
  distort->add_option("--spec", distort_spec, "family:level:seed, e.g. gblur:3:42");
  distort->add_option("--ladder", distort_ladder, "family name for a full ladder");
  distort->add_option("--seed", distort_seed, "ladder seed");
  distort->add_option("--out", distort_out, "output clip path (with --spec)");
  distort->add_option("--out-dir", distort_out_dir, "output directory (with --ladder)");
  distort->add_option("--manifest", distort_manifest, "append ladder rows to this JSONL");

  // annotate
  auto* annotate = app.add_subcommand("annotate", "pairwise rank labels from teachers");
  std::string ann_preds, ann_pairs, ann_manifest, ann_out = "annotations.jsonl";
  std::size_t ann_sample = 0;
  int ann_stage = 1;
  annotate->add_option("--preds", ann_preds, "teacher predictions JSONL");
  annotate->add_option("--pairs", ann_pairs, "explicit pair list JSONL {first, second}");
  annotate->add_option("--sample", ann_sample, "sample this many uniform pairs");
  annotate->add_option("--severity-manifest", ann_manifest,
                       "ladder manifest JSONL for severity labels");
  annotate->add_option("--stage", ann_stage, "stage tag for the annotations");
  annotate->add_option("--out", ann_out, "output annotations JSONL");

  // mine
  auto* mine = app.add_subcommand("mine", "gMAD pairs or misclassified synthetic pairs");
  std::string mine_pool, mine_pred, mine_truth, mine_out = "mined.jsonl";
  int mine_k = 10, mine_budget = 1;
  mine->add_option("--pool", mine_pool, "scored pool JSONL");
  mine->add_option("--k-levels", mine_k, "quality level count");
  mine->add_option("--per-level", mine_budget, "pair budget per level per role order");
  mine->add_option("--predicted", mine_pred, "student-predicted annotations JSONL");
  mine->add_option("--truth", mine_truth, "severity ground-truth annotations JSONL");
  mine->add_option("--out", mine_out, "output JSONL");

  // train
  auto* train = app.add_subcommand("train", "train the pairwise ranking student");
  std::string train_ann, train_features, train_prior, train_out = "student.json",
              train_report;
  int train_stage = 1, train_epochs = -1, train_batch = 0;
  double train_lr = 0;
  bool train_no_conf = false;
  train->add_option("--annotations", train_ann, "training annotations JSONL")->required();
  train->add_option("--features", train_features, "metrics CSV")->required();
  train->add_option("--stage", train_stage, "stage number (>= 2 requires --prior)");
  train->add_option("--prior", train_prior, "previous stage's checkpoint");
  train->add_option("--epochs", train_epochs, "override epoch count");
  train->add_option("--lr", train_lr, "override learning rate");
  train->add_option("--batch", train_batch, "override batch size");
  train->add_flag("--no-conf", train_no_conf, "disable the confidence loss");
  train->add_option("--out", train_out, "checkpoint output path");
  train->add_option("--report", train_report, "optional training report JSON");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate",
                                       "absolute scores via anchored Thurstone MAP");
  std::string cal_model, cal_features, cal_anchors, cal_preds, cal_logits,
      cal_out = "scores.json";
  calibrate->add_option("--model", cal_model, "student checkpoint");
  calibrate->add_option("--features", cal_features, "metrics CSV");
  calibrate->add_option("--anchors", cal_anchors, "anchors JSON (ids [+ block])");
  calibrate->add_option("--preds", cal_preds,
                        "teacher predictions JSONL for percentile anchor selection");
  calibrate->add_option("--logits", cal_logits,
                        "external comparison logits JSONL {first, second, logits[5]}");
  calibrate->add_option("--out", cal_out, "scores JSON output");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "SRCC/PLCC against ground truth");
  std::string eval_scores, eval_truth, eval_dataset = "dataset", eval_out = "report.json";
  evaluate->add_option("--scores", eval_scores, "scores JSON")->required();
  evaluate->add_option("--truth", eval_truth, "ground-truth CSV {video_id, mos}")->required();
  evaluate->add_option("--dataset", eval_dataset, "dataset id for the report");
  evaluate->add_option("--out", eval_out, "report JSON output");

  // run-all
  app.add_subcommand("run-all", "synthesize corpus and run the three-stage pipeline");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("metrics")) {
      if (metrics_csv.empty() && metrics_jsonl.empty()) {
        throw w2s::DomainError("metrics needs --out and/or --jsonl");
      }
      return cmd_metrics(common, metrics_in, metrics_csv, metrics_jsonl);
    }
    if (app.got_subcommand("curate")) {
      if (curate_make_target.empty() && (curate_target.empty() || curate_k == 0)) {
        throw w2s::DomainError("curate needs --make-target, or --target with --k");
      }
      return cmd_curate(common, curate_metrics, curate_target, curate_make_target, curate_k,
                        curate_mode, curate_out);
    }
    if (app.got_subcommand("distort")) {
      if (distort_spec.empty() == distort_ladder.empty()) {
        throw w2s::DomainError("distort needs exactly one of --spec or --ladder");
      }
      if (!distort_spec.empty() && distort_out.empty()) {
        throw w2s::DomainError("--spec needs --out");
      }
      if (!distort_ladder.empty() && distort_out_dir.empty()) {
        throw w2s::DomainError("--ladder needs --out-dir");
      }
      return cmd_distort(common, distort_in, distort_spec, distort_ladder, distort_seed,
                         distort_out, distort_out_dir, distort_manifest);
    }
    if (app.got_subcommand("annotate")) {
      if (ann_manifest.empty() && ann_preds.empty()) {
        throw w2s::DomainError("annotate needs --preds or --severity-manifest");
      }
      if (ann_manifest.empty() && ann_pairs.empty() && ann_sample == 0) {
        throw w2s::DomainError("annotate needs --pairs or --sample with --preds");
      }
      return cmd_annotate(common, ann_preds, ann_pairs, ann_sample, ann_manifest, ann_stage,
                          ann_out);
    }
    if (app.got_subcommand("mine")) {
      if (mine_pool.empty() && (mine_pred.empty() || mine_truth.empty())) {
        throw w2s::DomainError("mine needs --pool, or --predicted with --truth");
      }
      return cmd_mine(common, mine_pool, mine_k, mine_budget, mine_pred, mine_truth,
                      mine_out);
    }
    if (app.got_subcommand("train")) {
      return cmd_train(common, train_ann, train_features, train_stage, train_prior,
                       train_epochs, train_lr, train_batch, train_no_conf, train_out,
                       train_report);
    }
    if (app.got_subcommand("calibrate")) {
      return cmd_calibrate(common, cal_model, cal_features, cal_anchors, cal_preds,
                           cal_logits, cal_out);
    }
    if (app.got_subcommand("evaluate")) {
      return cmd_evaluate(common, eval_scores, eval_truth, eval_dataset, eval_out);
    }
    if (app.got_subcommand("run-all")) {
      return cmd_run_all(common);
    }
  } catch (const w2s::Error& e) {
    std::cerr << json{{"error", {{"type", "w2s"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "unexpected"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 2;
  }
  return 0;
}
