#include "w2s/records.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace w2s {

using nlohmann::json;

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                       std::chars_format::general, 17);
  return std::string(buf, ptr);
}

namespace {

json header_json(const ArtifactHeader& header) {
  return json{{"type", "header"},
              {"config_digest", header.config_digest},
              {"seed", header.seed},
              {"created", header.created.empty() ? now_iso8601() : header.created}};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

json parse_line(const std::string& line, const std::filesystem::path& path,
                std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError("bad JSONL row " + std::to_string(line_no) + " in '" + path.string() +
                         "': " + e.what(),
                     line_no);
  }
}

template <typename RowFn>
void read_jsonl(const std::filesystem::path& path, RowFn&& on_row) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_line(line, path, line_no);
    if (j.value("type", "") == "header") continue;
    on_row(j, line_no);
  }
}

template <typename Rows, typename RowFn>
void write_jsonl(const std::filesystem::path& path, const Rows& rows,
                 const ArtifactHeader& header, RowFn&& to_json) {
  auto out = open_out(path);
  out << header_json(header).dump() << "\n";
  for (const auto& row : rows) out << to_json(row).dump() << "\n";
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json document_with_header(const ArtifactHeader& header) {
  json j;
  j["header"] = header_json(header);
  j["header"].erase("type");
  return j;
}

}  // namespace

void write_predictions_jsonl(const std::filesystem::path& path,
                             std::span<const ScorerPrediction> rows,
                             const ArtifactHeader& header) {
  write_jsonl(path, rows, header, [](const ScorerPrediction& p) {
    return json{{"model_id", p.model_id}, {"video_id", p.video_id}, {"score", p.score}};
  });
}

std::vector<ScorerPrediction> read_predictions_jsonl(const std::filesystem::path& path) {
  std::vector<ScorerPrediction> rows;
  read_jsonl(path, [&](const json& j, std::size_t) {
    rows.push_back(ScorerPrediction{j.at("model_id").get<std::string>(),
                                    j.at("video_id").get<std::string>(),
                                    j.at("score").get<double>()});
  });
  return rows;
}

void write_annotations_jsonl(const std::filesystem::path& path,
                             std::span<const PairAnnotation> rows,
                             const ArtifactHeader& header) {
  write_jsonl(path, rows, header, [](const PairAnnotation& a) {
    return json{{"first", a.first},
                {"second", a.second},
                {"label", to_string(a.label)},
                {"source", to_string(a.source)},
                {"stage", a.stage}};
  });
}

std::vector<PairAnnotation> read_annotations_jsonl(const std::filesystem::path& path) {
  std::vector<PairAnnotation> rows;
  read_jsonl(path, [&](const json& j, std::size_t) {
    rows.push_back(PairAnnotation{
        j.at("first").get<std::string>(), j.at("second").get<std::string>(),
        rank_label_from_string(j.at("label").get<std::string>()),
        annotation_source_from_string(j.at("source").get<std::string>()),
        j.at("stage").get<int>()});
  });
  return rows;
}

void write_scored_pool_jsonl(const std::filesystem::path& path, const ScoredPool& pool,
                             const ArtifactHeader& header) {
  write_jsonl(path, pool.videos, header, [](const ScoredVideo& v) {
    return json{{"video_id", v.id},
                {"weak_score", v.weak_score},
                {"student_score", v.student_score}};
  });
}

ScoredPool read_scored_pool_jsonl(const std::filesystem::path& path) {
  ScoredPool pool;
  read_jsonl(path, [&](const json& j, std::size_t) {
    pool.videos.push_back(ScoredVideo{j.at("video_id").get<std::string>(),
                                      j.at("weak_score").get<double>(),
                                      j.at("student_score").get<double>()});
  });
  return pool;
}

void write_mined_pairs_jsonl(const std::filesystem::path& path,
                             std::span<const MinedPair> rows, const ArtifactHeader& header) {
  write_jsonl(path, rows, header, [](const MinedPair& p) {
    return json{{"first", p.first},
                {"second", p.second},
                {"role_order", to_string(p.fixed_axis) + "-fixed"},
                {"level", p.level},
                {"disagreement", p.disagreement},
                {"low_value", p.low_value}};
  });
}

std::vector<MinedPair> read_mined_pairs_jsonl(const std::filesystem::path& path) {
  std::vector<MinedPair> rows;
  read_jsonl(path, [&](const json& j, std::size_t line_no) {
    MinedPair p;
    p.first = j.at("first").get<std::string>();
    p.second = j.at("second").get<std::string>();
    const std::string role = j.at("role_order").get<std::string>();
    if (role == "weak-fixed") {
      p.fixed_axis = ScoreAxis::weak;
    } else if (role == "student-fixed") {
      p.fixed_axis = ScoreAxis::student;
    } else {
      throw ParseError("unknown role_order '" + role + "' in '" + path.string() + "'",
                       line_no);
    }
    p.level = j.at("level").get<int>();
    p.disagreement = j.at("disagreement").get<double>();
    p.low_value = j.value("low_value", false);
    rows.push_back(std::move(p));
  });
  return rows;
}

void write_comparisons_jsonl(const std::filesystem::path& path,
                             std::span<const ComparisonLogits> rows,
                             const ArtifactHeader& header) {
  write_jsonl(path, rows, header, [](const ComparisonLogits& c) {
    return json{{"first", c.first}, {"second", c.second}, {"logits", c.logits}};
  });
}

std::vector<ComparisonLogits> read_comparisons_jsonl(const std::filesystem::path& path) {
  std::vector<ComparisonLogits> rows;
  read_jsonl(path, [&](const json& j, std::size_t line_no) {
    ComparisonLogits c;
    c.first = j.at("first").get<std::string>();
    c.second = j.at("second").get<std::string>();
    const auto logits = j.at("logits").get<std::vector<double>>();
    if (logits.size() != 5) {
      throw ParseError("comparison row needs 5 logits in '" + path.string() + "'", line_no);
    }
    std::copy(logits.begin(), logits.end(), c.logits.begin());
    rows.push_back(std::move(c));
  });
  return rows;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::map<std::string, MetricVector>& rows,
                       const ArtifactHeader& header) {
  auto out = open_out(path);
  out << "# w2s-metrics-v1 config_digest=" << header.config_digest << " seed=" << header.seed
      << " created=" << (header.created.empty() ? now_iso8601() : header.created) << "\n";
  out << "clip_id";
  for (const auto& name : MetricVector::column_names()) out << "," << name;
  out << "\n";
  for (const auto& [id, vec] : rows) {
    out << id;
    for (double v : vec.values()) out << "," << format_double(v);
    out << "\n";
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::map<std::string, MetricVector> read_metrics_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::map<std::string, MetricVector> rows;
  std::string line;
  std::size_t line_no = 0;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!saw_columns) {
      if (cells.size() != MetricVector::kCount + 1 || cells[0] != "clip_id") {
        throw ParseError("unexpected metrics CSV column row in '" + path.string() + "'",
                         line_no);
      }
      saw_columns = true;
      continue;
    }
    if (cells.size() != MetricVector::kCount + 1) {
      throw ParseError("metrics CSV row " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells in '" + path.string() + "'",
                       line_no);
    }
    std::array<double, MetricVector::kCount> values{};
    for (std::size_t i = 0; i < MetricVector::kCount; ++i) {
      try {
        values[i] = std::stod(cells[i + 1]);
      } catch (const std::exception&) {
        throw ParseError("non-numeric metric cell in '" + path.string() + "'", line_no);
      }
    }
    rows[cells[0]] = MetricVector::from_values(values);
  }
  if (!saw_columns) throw ParseError("metrics CSV '" + path.string() + "' has no rows", 0);
  return rows;
}

void write_metrics_jsonl(const std::filesystem::path& path,
                         const std::map<std::string, MetricVector>& rows,
                         const ArtifactHeader& header) {
  write_jsonl(path, rows, header, [](const auto& entry) {
    const auto& [id, vec] = entry;
    json j{{"clip_id", id}};
    const auto values = vec.values();
    for (std::size_t i = 0; i < MetricVector::kCount; ++i) {
      j[MetricVector::column_names()[i]] = values[i];
    }
    return j;
  });
}

std::map<std::string, MetricVector> read_metrics_jsonl(const std::filesystem::path& path) {
  std::map<std::string, MetricVector> rows;
  read_jsonl(path, [&](const json& j, std::size_t) {
    std::array<double, MetricVector::kCount> values{};
    for (std::size_t i = 0; i < MetricVector::kCount; ++i) {
      values[i] = j.at(MetricVector::column_names()[i]).get<double>();
    }
    rows[j.at("clip_id").get<std::string>()] = MetricVector::from_values(values);
  });
  return rows;
}

std::map<std::string, double> read_truth_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::map<std::string, double> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("truth CSV row without comma in '" + path.string() + "'", line_no);
    }
    const std::string id = line.substr(0, comma);
    if (id == "video_id") continue;
    try {
      rows[id] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("non-numeric mos in '" + path.string() + "'", line_no);
    }
  }
  return rows;
}

void write_truth_csv(const std::filesystem::path& path,
                     const std::map<std::string, double>& rows) {
  auto out = open_out(path);
  out << "video_id,mos\n";
  for (const auto& [id, mos] : rows) out << id << "," << format_double(mos) << "\n";
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_histogram_json(const std::filesystem::path& path, const HistogramSet& set,
                          const ArtifactHeader& header) {
  set.validate();
  json j = document_with_header(header);
  j["bins"] = set.bins;
  for (std::size_t m = 0; m < MetricVector::kCount; ++m) {
    j["metrics"][MetricVector::column_names()[m]] = {
        {"edges", set.per_metric[m].edges}, {"masses", set.per_metric[m].masses}};
  }
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

HistogramSet read_histogram_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("invalid histogram JSON in '" + path.string() + "': " + e.what(), 0);
  }
  HistogramSet set;
  set.bins = j.at("bins").get<int>();
  for (std::size_t m = 0; m < MetricVector::kCount; ++m) {
    const auto& metric = j.at("metrics").at(MetricVector::column_names()[m]);
    set.per_metric[m].edges = metric.at("edges").get<std::vector<double>>();
    set.per_metric[m].masses = metric.at("masses").get<std::vector<double>>();
  }
  set.validate();
  return set;
}

void write_plan_json(const std::filesystem::path& path, const CurationPlan& plan,
                     const ArtifactHeader& header) {
  json j = document_with_header(header);
  j["selected"] = plan.selected;
  for (std::size_t m = 0; m < MetricVector::kCount; ++m) {
    j["distances"][MetricVector::column_names()[m]] = plan.per_metric_distance[m];
  }
  j["objective"] = plan.objective;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

CurationPlan read_plan_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  in >> j;
  CurationPlan plan;
  plan.selected = j.at("selected").get<std::vector<std::string>>();
  for (std::size_t m = 0; m < MetricVector::kCount; ++m) {
    plan.per_metric_distance[m] =
        j.at("distances").at(MetricVector::column_names()[m]).get<double>();
  }
  plan.objective = j.at("objective").get<double>();
  return plan;
}

void write_scores_json(const std::filesystem::path& path,
                       const std::map<std::string, double>& scores,
                       const ArtifactHeader& header) {
  json j = document_with_header(header);
  j["scores"] = scores;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::map<std::string, double> read_scores_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  in >> j;
  return j.at("scores").get<std::map<std::string, double>>();
}

void write_eval_report_json(const std::filesystem::path& path, const EvalReport& report,
                            const ArtifactHeader& header) {
  json j = document_with_header(header);
  j["dataset"] = report.dataset;
  j["n"] = report.n;
  j["srcc"] = report.srcc;
  j["plcc"] = report.plcc;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace w2s
