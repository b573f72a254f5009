#include "nmlsdr/harness.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nmlsdr/classifier.hpp"
#include "nmlsdr/error.hpp"
#include "nmlsdr/rng.hpp"
#include "nmlsdr/wilcoxon.hpp"

namespace nmlsdr::harness {
namespace {

// RFC 4180 quoting for one field.
std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> SplitCsvLine(const std::string& line, std::size_t number) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c != '"') {
        out.back() += c;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (c == '"' && out.back().empty()) {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", number);
  return out;
}

double ParseDouble(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line);
  }
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::filesystem::path Resolve(const std::filesystem::path& base,
                              const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() || base.empty() ? p : base / p;
}

std::string CellName(const std::string& method, const std::string& dataset,
                     int repetition) {
  std::string out;
  for (char c : method + "_" + dataset + "_" + std::to_string(repetition)) {
    if (c == '*') {
      out += "-star";
    } else {
      out += (c == '/' || c == ' ') ? '-' : c;
    }
  }
  return out;
}

}  // namespace

ExperimentResult RunExperimentDetailed(const PipelineConfig& config,
                                       const data::MultiLabelDataset& train,
                                       const data::MultiLabelDataset& test) {
  try {
    train.Validate();
    test.Validate();
    if (train.num_labels() != test.num_labels() ||
        train.num_features() != test.num_features()) {
      throw InvalidInputError("train and test splits have different shapes");
    }
    config.Validate(static_cast<long>(train.num_labels()));

    const BinaryMatrix noisy =
        data::FlipLabels(train.labels, config.noise.flip_fraction, config.seed);
    const data::PartialLabels partial =
        data::MaskLabels(noisy, config.noise.labeled_fraction, config.seed);
    const Matrix ordered = data::ReorderRows(train.features, partial.order);
    const data::Standardized scaled =
        data::Standardize(ordered, test.features);

    ExperimentResult out;
    out.train_truth = data::ReorderRows(train.labels, partial.order);
    classifier::Prediction prediction;
    if (config.eval == EvalProtocol::kSemi) {
      auto result = classifier::SemiSupervisedClassify(scaled.train, partial,
                                                       scaled.test, config);
      out.projection = std::move(result.projection);
      out.train_embedding = std::move(result.train_embedding);
      out.test_embedding = std::move(result.test_embedding);
      prediction = std::move(result.test);
    } else {
      out.projection =
          classifier::FitProjection(scaled.train, partial, config).projection;
      out.train_embedding = projection::Transform(out.projection, scaled.train);
      out.test_embedding = projection::Transform(out.projection, scaled.test);
      const auto model =
          classifier::MlknnTrain(out.train_embedding, out.train_truth,
                                 config.mlknn_k, config.mlknn_smoothing);
      prediction = classifier::MlknnPredictAll(model, out.test_embedding);
    }
    out.report =
        metrics::EvaluateAll(test.labels, prediction.hard, prediction.score);
    out.test_prediction = std::move(prediction.hard);
    return out;
  } catch (const ExperimentError&) {
    throw;
  } catch (const Error& e) {
    throw ExperimentError(e.kind(), e.what(), ToJson(config).dump());
  }
}

metrics::MetricsReport RunExperiment(const PipelineConfig& config,
                                     const data::MultiLabelDataset& train,
                                     const data::MultiLabelDataset& test) {
  return RunExperimentDetailed(config, train, test).report;
}

void ResultsTable::Add(ResultRow row) {
  for (const auto& existing : rows_) {
    if (existing.method == row.method && existing.dataset == row.dataset &&
        existing.repetition == row.repetition) {
      throw InvalidInputError("duplicate result row for " + row.method + "/" +
                              row.dataset + "/" +
                              std::to_string(row.repetition));
    }
  }
  rows_.push_back(std::move(row));
}

std::vector<std::string> ResultsTable::Methods() const {
  std::vector<std::string> out;
  for (const auto& r : rows_) {
    if (std::find(out.begin(), out.end(), r.method) == out.end()) {
      out.push_back(r.method);
    }
  }
  return out;
}

std::vector<std::string> ResultsTable::Datasets() const {
  std::vector<std::string> out;
  for (const auto& r : rows_) {
    if (std::find(out.begin(), out.end(), r.dataset) == out.end()) {
      out.push_back(r.dataset);
    }
  }
  return out;
}

std::vector<std::vector<double>> ResultsTable::MeanGrid(
    std::size_t metric) const {
  const auto methods = Methods();
  const auto datasets = Datasets();
  std::vector<std::vector<double>> sum(methods.size(),
                                       std::vector<double>(datasets.size(), 0.0));
  std::vector<std::vector<int>> count(methods.size(),
                                      std::vector<int>(datasets.size(), 0));
  for (const auto& r : rows_) {
    const auto m = static_cast<std::size_t>(
        std::find(methods.begin(), methods.end(), r.method) - methods.begin());
    const auto d = static_cast<std::size_t>(
        std::find(datasets.begin(), datasets.end(), r.dataset) -
        datasets.begin());
    sum[m][d] += r.report.Get(metric);
    ++count[m][d];
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      if (count[m][d] == 0) {
        throw InvalidInputError("results grid is missing " + methods[m] + "/" +
                                datasets[d]);
      }
      sum[m][d] /= count[m][d];
    }
  }
  return sum;
}

std::string ResultsTable::ToCsv() const {
  std::string out = "method,dataset,repetition,seed," + metrics::CsvHeader() + "\n";
  for (const auto& r : rows_) {
    out += CsvField(r.method) + "," + CsvField(r.dataset) + "," +
           std::to_string(r.repetition) +
           "," + std::to_string(r.seed) + "," + metrics::CsvValues(r.report) +
           "\n";
  }
  return out;
}

ResultsTable ResultsTable::FromCsv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::size_t number = 0;
  ResultsTable table;
  bool header_seen = false;
  const std::string expected =
      "method,dataset,repetition,seed," + metrics::CsvHeader();
  while (std::getline(ss, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != expected) throw ParseError("unexpected results header", number);
      header_seen = true;
      continue;
    }
    const auto fields = SplitCsvLine(line, number);
    if (fields.size() != 4 + metrics::MetricsReport::kNames.size()) {
      throw ParseError("wrong number of fields", number);
    }
    ResultRow row;
    row.method = fields[0];
    row.dataset = fields[1];
    row.repetition = static_cast<int>(ParseDouble(fields[2], number));
    try {
      row.seed = std::stoull(fields[3]);
    } catch (const std::exception&) {
      throw ParseError("bad seed '" + fields[3] + "'", number);
    }
    for (std::size_t i = 0; i < metrics::MetricsReport::kNames.size(); ++i) {
      row.report.Set(i, ParseDouble(fields[4 + i], number));
    }
    table.Add(std::move(row));
  }
  if (!header_seen) throw ParseError("empty results table", number);
  return table;
}

std::vector<std::pair<std::string, int>> CountBest(const ResultsTable& table,
                                                   std::size_t metric) {
  const auto methods = table.Methods();
  const auto grid = table.MeanGrid(metric);
  std::vector<std::pair<std::string, int>> out;
  for (const auto& m : methods) out.emplace_back(m, 0);
  const std::size_t datasets = table.Datasets().size();
  for (std::size_t d = 0; d < datasets; ++d) {
    double best = grid[0][d];
    for (std::size_t m = 1; m < methods.size(); ++m) best = std::max(best, grid[m][d]);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      if (grid[m][d] == best) ++out[m].second;
    }
  }
  return out;
}

MethodScores WilcoxonMatrix(const ResultsTable& table, std::size_t metric,
                            double alpha_level) {
  const auto methods = table.Methods();
  const auto grid = table.MeanGrid(metric);
  MethodScores out;
  for (const auto& m : methods) out.emplace_back(m, 0.0);
  for (std::size_t a = 0; a < methods.size(); ++a) {
    for (std::size_t b = a + 1; b < methods.size(); ++b) {
      const auto [sa, sb] =
          stats::WilcoxonPairScore(grid[a], grid[b], alpha_level);
      out[a].second += sa;
      out[b].second += sb;
    }
  }
  return out;
}

nlohmann::json Summarize(const ResultsTable& table) {
  nlohmann::json summary;
  const auto methods = table.Methods();
  const auto datasets = table.Datasets();
  summary["methods"] = methods;
  summary["datasets"] = datasets;
  summary["cells"] = table.rows().size();
  const bool scored = methods.size() >= 2 && datasets.size() >= 5;
  std::map<std::string, double> mean_wilcoxon;
  for (std::size_t i = 0; i < metrics::MetricsReport::kNames.size(); ++i) {
    const std::string name(metrics::MetricsReport::kNames[i]);
    nlohmann::json best = nlohmann::json::object();
    for (const auto& [m, count] : CountBest(table, i)) best[m] = count;
    summary["best_counts"][name] = best;
    const auto grid = table.MeanGrid(i);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      for (std::size_t d = 0; d < datasets.size(); ++d) {
        summary["means"][name][methods[m]][datasets[d]] = grid[m][d];
      }
    }
    if (scored) {
      nlohmann::json totals = nlohmann::json::object();
      for (const auto& [m, score] : WilcoxonMatrix(table, i)) {
        totals[m] = score;
        mean_wilcoxon[m] += score / 7.0;
      }
      summary["wilcoxon"][name] = totals;
    } else {
      summary["wilcoxon"][name] = nullptr;
    }
  }
  summary["mean_wilcoxon"] =
      scored ? nlohmann::json(mean_wilcoxon) : nlohmann::json(nullptr);
  return summary;
}

ExperimentPlan PlanFromJson(const nlohmann::json& json,
                            const std::filesystem::path& base_dir) {
  if (!json.is_object()) throw ConfigError("run config must be a JSON object");
  for (const auto& [key, value] : json.items()) {
    static const std::set<std::string> kAllowed = {
        "pipeline", "methods", "datasets", "repetitions", "output"};
    if (!kAllowed.count(key)) throw ConfigError("unknown key '" + key + "'");
  }
  ExperimentPlan plan;
  const nlohmann::json base_json =
      json.contains("pipeline") ? json["pipeline"] : nlohmann::json::object();
  plan.base = PipelineConfigFromJson(base_json);

  try {
    plan.repetitions = json.value("repetitions", 1);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("repetitions must be an integer");
  }
  if (plan.repetitions < 1) throw ConfigError("repetitions must be >= 1");

  const nlohmann::json methods =
      json.contains("methods") ? json["methods"]
                               : nlohmann::json::array({MethodName(plan.base.method)});
  if (!methods.is_array() || methods.empty()) {
    throw ConfigError("'methods' must be a non-empty array");
  }
  for (const auto& entry : methods) {
    nlohmann::json merged = base_json;
    std::string name;
    if (entry.is_string()) {
      name = entry.get<std::string>();
      merged["method"] = name;
    } else if (entry.is_object()) {
      if (!entry.contains("name") || !entry["name"].is_string()) {
        throw ConfigError("method entries need a string 'name'");
      }
      name = entry["name"].get<std::string>();
      for (const auto& [key, value] : entry.items()) {
        if (key == "name") continue;
        if (key == "graph" || key == "noise") {
          if (!merged.contains(key)) merged[key] = nlohmann::json::object();
          merged[key].update(value);
        } else {
          merged[key] = value;
        }
      }
      if (!entry.contains("method")) merged["method"] = name;
    } else {
      throw ConfigError("method entries must be strings or objects");
    }
    for (const auto& existing : plan.methods) {
      if (existing.name == name) throw ConfigError("duplicate method " + name);
    }
    plan.methods.push_back({name, PipelineConfigFromJson(merged)});
  }

  if (!json.contains("datasets") || !json["datasets"].is_array() ||
      json["datasets"].empty()) {
    throw ConfigError("'datasets' must be a non-empty array");
  }
  for (const auto& entry : json["datasets"]) {
    if (!entry.is_object()) throw ConfigError("dataset entries must be objects");
    DatasetSource src;
    try {
      src.name = entry.at("name").get<std::string>();
      const auto kind = entry.value("source", std::string("synthetic"));
      if (kind == "synthetic") {
        src.kind = DatasetSource::Kind::kSynthetic;
        if (entry.contains("seed")) src.seed = entry["seed"].get<std::uint64_t>();
        src.synthetic.samples_per_class =
            entry.value("samples_per_class", src.synthetic.samples_per_class);
        src.synthetic.test_samples =
            entry.value("test_samples", src.synthetic.test_samples);
      } else if (kind == "files" || kind == "bundle") {
        src.kind = kind == "files" ? DatasetSource::Kind::kFiles
                                   : DatasetSource::Kind::kBundle;
        src.train_path = Resolve(base_dir, entry.at("train").get<std::string>());
        src.test_path = Resolve(base_dir, entry.at("test").get<std::string>());
        if (src.kind == DatasetSource::Kind::kFiles) {
          const auto format = entry.value("format", std::string("csv"));
          if (format != "csv" && format != "arff") {
            throw ConfigError("dataset format must be csv or arff");
          }
          src.format =
              format == "csv" ? data::FileFormat::kCsv : data::FileFormat::kArff;
          src.label_count = entry.at("label_count").get<Index>();
          const auto at = entry.value("labels_at", std::string("tail"));
          if (at != "head" && at != "tail") {
            throw ConfigError("labels_at must be head or tail");
          }
          src.labels_at = at == "head" ? data::LabelPosition::kHead
                                       : data::LabelPosition::kTail;
        }
      } else {
        throw ConfigError("unknown dataset source '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("dataset entry: ") + e.what());
    }
    plan.datasets.push_back(std::move(src));
  }

  plan.output_dir = Resolve(base_dir, plan.output_dir.string());
  if (json.contains("output")) {
    const auto& out = json["output"];
    try {
      plan.output_dir = Resolve(base_dir, out.value("dir", std::string("results")));
      plan.dump_embeddings = out.value("embedding_dump", false);
      plan.save_projections = out.value("save_projections", false);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("output: ") + e.what());
    }
  }
  return plan;
}

std::pair<data::MultiLabelDataset, data::MultiLabelDataset> LoadSource(
    const DatasetSource& source, std::uint64_t repetition_seed) {
  switch (source.kind) {
    case DatasetSource::Kind::kSynthetic: {
      auto split = data::GenerateSynthetic(source.seed.value_or(repetition_seed),
                                           source.synthetic);
      return {std::move(split.train), std::move(split.test)};
    }
    case DatasetSource::Kind::kFiles:
      return {data::LoadDataset(source.train_path, source.format,
                                source.label_count, source.labels_at),
              data::LoadDataset(source.test_path, source.format,
                                source.label_count, source.labels_at)};
    case DatasetSource::Kind::kBundle:
      return {data::ReadBundle(source.train_path),
              data::ReadBundle(source.test_path)};
  }
  throw ConfigError("unknown dataset source");
}

void WriteEmbeddingDump(const std::filesystem::path& path,
                        const Matrix& embedding, const BinaryMatrix& labels) {
  std::string text = "# " + std::to_string(embedding.rows()) + " rows: " +
                     std::to_string(embedding.cols()) + " coordinates then " +
                     std::to_string(labels.cols()) + " labels\n";
  for (Index i = 0; i < embedding.rows(); ++i) {
    for (Index c = 0; c < embedding.cols(); ++c) {
      text += (c ? " " : "") + data::FormatDouble(embedding(i, c));
    }
    for (Index c = 0; c < labels.cols(); ++c) {
      text += " " + std::to_string(static_cast<int>(labels(i, c)));
    }
    text += '\n';
  }
  WriteText(path, text);
}

ResultsTable RunPlan(const ExperimentPlan& plan) {
  std::filesystem::create_directories(plan.output_dir);
  ResultsTable table;
  for (const auto& source : plan.datasets) {
    for (int rep = 0; rep < plan.repetitions; ++rep) {
      const std::uint64_t seed =
          DeriveSeed(plan.base.seed, static_cast<std::uint64_t>(rep));
      const auto [train, test] = LoadSource(source, seed);
      for (const auto& entry : plan.methods) {
        PipelineConfig config = entry.config;
        config.seed = seed;
        const auto result = RunExperimentDetailed(config, train, test);
        const std::string cell = CellName(entry.name, source.name, rep);
        if (plan.dump_embeddings) {
          WriteEmbeddingDump(plan.output_dir / (cell + ".train.dat"),
                             result.train_embedding, result.train_truth);
          WriteEmbeddingDump(plan.output_dir / (cell + ".test.dat"),
                             result.test_embedding, test.labels);
        }
        if (plan.save_projections) {
          const auto path = plan.output_dir / (cell + ".proj");
          projection::WriteProjection(result.projection, path);
          projection::WriteProjectionSidecar(
              path, {{"method", MethodName(config.method)},
                     {"name", entry.name},
                     {"dataset", source.name},
                     {"repetition", rep},
                     {"seed", seed},
                     {"config", ToJson(config)}});
        }
        table.Add({entry.name, source.name, rep, seed, result.report});
      }
    }
  }
  WriteText(plan.output_dir / "results.csv", table.ToCsv());

  nlohmann::json summary = Summarize(table);
  summary["pipeline"] = ToJson(plan.base);
  summary["repetitions"] = plan.repetitions;
  nlohmann::json method_configs = nlohmann::json::object();
  for (const auto& entry : plan.methods) method_configs[entry.name] = ToJson(entry.config);
  summary["method_configs"] = method_configs;
  WriteText(plan.output_dir / "summary.json", summary.dump(2) + "\n");
  return table;
}

}  // namespace nmlsdr::harness
