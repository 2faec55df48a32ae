#include "w2s/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace w2s {

using nlohmann::json;

namespace {

// --- minimal TOML subset ----------------------------------------------------
// Supports [table] / [a.b] headers, `key = value` lines where value is a
// quoted string, bool, number, or a one-level array of those, and # comments.

std::string strip(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

json parse_toml_scalar(const std::string& raw, std::size_t line_no) {
  const std::string text = strip(raw);
  if (text.empty()) throw ParseError("empty TOML value", line_no);
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') {
      throw ParseError("unterminated string " + text, line_no);
    }
    return text.substr(1, text.size() - 2);
  }
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    if (text.find_first_of(".eE") == std::string::npos) {
      return std::stoll(text);
    }
    return std::stod(text);
  } catch (const std::exception&) {
    throw ParseError("cannot parse TOML value '" + text + "'", line_no);
  }
}

json parse_toml_value(const std::string& raw, std::size_t line_no) {
  const std::string text = strip(raw);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw ParseError("unterminated array " + text, line_no);
    json array = json::array();
    std::string inner = text.substr(1, text.size() - 2);
    std::string item;
    bool in_string = false;
    for (char c : inner) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        if (!strip(item).empty()) array.push_back(parse_toml_scalar(item, line_no));
        item.clear();
      } else {
        item += c;
      }
    }
    if (!strip(item).empty()) array.push_back(parse_toml_scalar(item, line_no));
    return array;
  }
  return parse_toml_scalar(text, line_no);
}

json parse_toml(std::istream& in, const std::string& origin) {
  json root = json::object();
  json* table = &root;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = strip(strip_comment(line));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw ParseError("bad table header in " + origin + ": " + text, line_no);
      }
      table = &root;
      std::stringstream path(text.substr(1, text.size() - 2));
      std::string part;
      while (std::getline(path, part, '.')) {
        table = &(*table)[strip(part)];
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key = value in " + origin + ": " + text, line_no);
    }
    (*table)[strip(text.substr(0, eq))] = parse_toml_value(text.substr(eq + 1), line_no);
  }
  return root;
}

// --- config <-> json --------------------------------------------------------

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

const std::map<std::string, std::vector<std::string>>& known_config_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"paths", {"output_dir", "corpus_dir", "encoder_template"}},
      {"run", {"seed"}},
      {"corpus",
       {"base_clips", "width", "height", "frames", "fps", "target_clips", "families"}},
      {"teachers", {"noise_sigma"}},
      {"metrics", {"flicker_threshold", "blockiness_block", "blockiness_cap", "sampling"}},
      {"curation", {"enabled", "bins", "keep_fraction", "mode"}},
      {"split", {"holdout_fraction"}},
      {"anchors", {"percentiles"}},
      {"map", {"clamp", "prior"}},
      {"stage1",
       {"ensemble_pairs", "spatial_pairs", "temporal_pairs", "compression_pairs",
        "gmad_k_levels", "gmad_per_level", "carryover_fraction", "epochs", "learning_rate",
        "batch_size", "use_conf", "t_warmup", "mirror_augment"}},
      {"stage2", {}},  // same keys as stage1
      {"stage3", {}},
  };
  return keys;
}

std::string joined_keys(const std::vector<std::string>& keys) {
  std::string out;
  for (const auto& k : keys) {
    if (!out.empty()) out += ", ";
    out += k;
  }
  return out;
}

void validate_config_keys(const json& j) {
  const auto& known = known_config_keys();
  const auto& stage_keys = known.at("stage1");
  std::vector<std::string> sections;
  for (const auto& [section, keys] : known) sections.push_back(section);

  for (const auto& [section, body] : j.items()) {
    const auto it = known.find(section);
    if (it == known.end()) {
      throw DomainError("unknown config section '" + section + "'; valid sections: " +
                        joined_keys(sections));
    }
    const auto& valid = section.rfind("stage", 0) == 0 ? stage_keys : it->second;
    if (!body.is_object()) {
      throw DomainError("config section '" + section + "' must be a table");
    }
    for (const auto& [key, value] : body.items()) {
      if (std::find(valid.begin(), valid.end(), key) == valid.end()) {
        throw DomainError("unknown config key '" + section + "." + key +
                          "'; valid keys: " + joined_keys(valid));
      }
    }
  }
}

TrainOptions train_options_from(const json& j, TrainOptions defaults) {
  read_if(j, "epochs", defaults.epochs);
  read_if(j, "learning_rate", defaults.learning_rate);
  read_if(j, "batch_size", defaults.batch_size);
  read_if(j, "use_conf", defaults.use_conf);
  read_if(j, "t_warmup", defaults.t_warmup);
  read_if(j, "mirror_augment", defaults.mirror_augment);
  return defaults;
}

StagePlan stage_plan_from(const json& j, StagePlan defaults) {
  read_if(j, "ensemble_pairs", defaults.ensemble_pairs);
  read_if(j, "spatial_pairs", defaults.spatial_pairs);
  read_if(j, "temporal_pairs", defaults.temporal_pairs);
  read_if(j, "compression_pairs", defaults.compression_pairs);
  read_if(j, "gmad_k_levels", defaults.gmad_k_levels);
  read_if(j, "gmad_per_level", defaults.gmad_per_level);
  read_if(j, "carryover_fraction", defaults.carryover_fraction);
  defaults.train = train_options_from(j, defaults.train);
  return defaults;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  if (j.contains("paths")) {
    const auto& paths = j.at("paths");
    if (paths.contains("output_dir")) c.output_dir = paths.at("output_dir").get<std::string>();
    if (paths.contains("corpus_dir")) c.corpus_dir = paths.at("corpus_dir").get<std::string>();
    if (paths.contains("encoder_template")) {
      c.encoder_template = paths.at("encoder_template").get<std::string>();
    }
  }
  if (j.contains("run")) read_if(j.at("run"), "seed", c.seed);

  if (j.contains("corpus")) {
    const auto& k = j.at("corpus");
    read_if(k, "base_clips", c.corpus.base_clips);
    read_if(k, "width", c.corpus.width);
    read_if(k, "height", c.corpus.height);
    read_if(k, "frames", c.corpus.frames);
    read_if(k, "target_clips", c.corpus.target_clips);
    if (k.contains("fps")) {
      c.corpus.fps = FrameRate{k.at("fps").at(0).get<std::int64_t>(),
                               k.at("fps").at(1).get<std::int64_t>()};
    }
    if (k.contains("families")) {
      c.corpus.families.clear();
      for (const auto& name : k.at("families")) {
        c.corpus.families.push_back(
            distortion_family_from_string(name.get<std::string>()));
      }
    }
  }
  c.corpus.seed = c.seed;

  if (j.contains("teachers")) read_if(j.at("teachers"), "noise_sigma", c.teacher_noise_sigma);

  if (j.contains("metrics")) {
    const auto& k = j.at("metrics");
    read_if(k, "flicker_threshold", c.metrics.flicker_threshold);
    read_if(k, "blockiness_block", c.metrics.blockiness_block);
    read_if(k, "blockiness_cap", c.metrics.blockiness_cap);
    std::string sampling = "one_fps";
    read_if(k, "sampling", sampling);
    if (sampling == "one_fps") {
      c.metrics.sampling = FrameSampling::one_fps;
    } else if (sampling == "all_frames") {
      c.metrics.sampling = FrameSampling::all_frames;
    } else {
      throw DomainError("unknown sampling mode '" + sampling + "'");
    }
  }

  if (j.contains("curation")) {
    const auto& k = j.at("curation");
    read_if(k, "enabled", c.curation_enabled);
    read_if(k, "bins", c.curation_bins);
    read_if(k, "keep_fraction", c.curation_keep_fraction);
    std::string mode = c.curation_mode == MatchMode::exact ? "exact" : "greedy";
    read_if(k, "mode", mode);
    if (mode == "exact") {
      c.curation_mode = MatchMode::exact;
    } else if (mode == "greedy") {
      c.curation_mode = MatchMode::greedy;
    } else {
      throw DomainError("unknown curation mode '" + mode + "'");
    }
  }

  if (j.contains("split")) {
    read_if(j.at("split"), "holdout_fraction", c.loop.holdout_fraction);
  }
  if (j.contains("anchors")) {
    read_if(j.at("anchors"), "percentiles", c.loop.anchor_percentiles);
  }
  if (j.contains("map")) {
    const auto& k = j.at("map");
    read_if(k, "clamp", c.loop.map.clamp);
    std::string prior = "none";
    read_if(k, "prior", prior);
    if (prior == "none") {
      c.loop.map.prior = ScorePrior::none;
    } else if (prior == "quadratic") {
      c.loop.map.prior = ScorePrior::quadratic;
    } else {
      throw DomainError("unknown map prior '" + prior + "'");
    }
  }
  c.loop.seed = c.seed;

  auto plans = LoopSettings::default_stage_plans();
  for (std::size_t s = 0; s < plans.size(); ++s) {
    const std::string key = "stage" + std::to_string(s + 1);
    if (j.contains(key)) plans[s] = stage_plan_from(j.at(key), plans[s]);
  }
  c.loop.stages = plans;
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["paths"]["output_dir"] = c.output_dir.string();
  j["paths"]["corpus_dir"] = c.corpus_dir.string();
  j["paths"]["encoder_template"] = c.encoder_template.value_or("");
  j["run"]["seed"] = c.seed;
  j["corpus"]["base_clips"] = c.corpus.base_clips;
  j["corpus"]["width"] = c.corpus.width;
  j["corpus"]["height"] = c.corpus.height;
  j["corpus"]["frames"] = c.corpus.frames;
  j["corpus"]["fps"] = {c.corpus.fps.num, c.corpus.fps.den};
  j["corpus"]["target_clips"] = c.corpus.target_clips;
  for (const auto family : c.corpus.families) {
    j["corpus"]["families"].push_back(to_string(family));
  }
  j["teachers"]["noise_sigma"] = c.teacher_noise_sigma;
  j["metrics"]["flicker_threshold"] = c.metrics.flicker_threshold;
  j["metrics"]["blockiness_block"] = c.metrics.blockiness_block;
  j["metrics"]["blockiness_cap"] = c.metrics.blockiness_cap;
  j["metrics"]["sampling"] =
      c.metrics.sampling == FrameSampling::one_fps ? "one_fps" : "all_frames";
  j["curation"]["enabled"] = c.curation_enabled;
  j["curation"]["bins"] = c.curation_bins;
  j["curation"]["keep_fraction"] = c.curation_keep_fraction;
  j["curation"]["mode"] = c.curation_mode == MatchMode::exact ? "exact" : "greedy";
  j["split"]["holdout_fraction"] = c.loop.holdout_fraction;
  j["anchors"]["percentiles"] = c.loop.anchor_percentiles;
  j["map"]["clamp"] = c.loop.map.clamp;
  j["map"]["prior"] = c.loop.map.prior == ScorePrior::none ? "none" : "quadratic";
  for (const auto& plan : c.loop.stages) {
    json p;
    p["ensemble_pairs"] = plan.ensemble_pairs;
    p["spatial_pairs"] = plan.spatial_pairs;
    p["temporal_pairs"] = plan.temporal_pairs;
    p["compression_pairs"] = plan.compression_pairs;
    p["gmad_k_levels"] = plan.gmad_k_levels;
    p["gmad_per_level"] = plan.gmad_per_level;
    p["carryover_fraction"] = plan.carryover_fraction;
    p["epochs"] = plan.train.epochs;
    p["learning_rate"] = plan.train.learning_rate;
    p["batch_size"] = plan.train.batch_size;
    p["use_conf"] = plan.train.use_conf;
    p["t_warmup"] = plan.train.t_warmup;
    p["mirror_augment"] = plan.train.mirror_augment;
    j["stage" + std::to_string(plan.stage)] = p;
  }
  return j;
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json j;
  if (path.extension() == ".toml") {
    j = parse_toml(in, path.string());
  } else {
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ParseError("invalid config JSON in '" + path.string() + "': " + e.what(), 0);
    }
  }
  validate_config_keys(j);
  return config_from_json(j);
}

std::string config_digest(const PipelineConfig& config) {
  const std::string canonical = config_to_json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EncoderInvocation config_encoder(const PipelineConfig& config) {
  return resolve_encoder(config.encoder_template);
}

}  // namespace w2s
