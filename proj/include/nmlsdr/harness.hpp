#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nmlsdr/config.hpp"
#include "nmlsdr/data.hpp"
#include "nmlsdr/metrics.hpp"
#include "nmlsdr/projection.hpp"

namespace nmlsdr::harness {

struct ExperimentResult {
  metrics::MetricsReport report;
  projection::Projection projection;
  Matrix train_embedding;       // canonical (labeled-first) order
  BinaryMatrix train_truth;     // true labels in the same order
  Matrix test_embedding;
  BinaryMatrix test_prediction;
};

/// One cell: flip -> mask -> standardize -> fit -> transform -> classify ->
/// evaluate on the test split. Failures are rethrown as ExperimentError
/// carrying the config snapshot.
ExperimentResult RunExperimentDetailed(const PipelineConfig& config,
                                       const data::MultiLabelDataset& train,
                                       const data::MultiLabelDataset& test);

metrics::MetricsReport RunExperiment(const PipelineConfig& config,
                                     const data::MultiLabelDataset& train,
                                     const data::MultiLabelDataset& test);

struct ResultRow {
  std::string method;
  std::string dataset;
  int repetition = 0;
  std::uint64_t seed = 0;
  metrics::MetricsReport report;
};

/// Rows keyed by (method, dataset, repetition). Methods and datasets keep
/// their first-insertion order.
class ResultsTable {
 public:
  // Throws InvalidInputError on a duplicate key.
  void Add(ResultRow row);

  const std::vector<ResultRow>& rows() const { return rows_; }
  std::vector<std::string> Methods() const;
  std::vector<std::string> Datasets() const;

  // Mean over repetitions, [method][dataset] in Methods()/Datasets() order.
  // Throws InvalidInputError if any (method, dataset) cell is missing.
  std::vector<std::vector<double>> MeanGrid(std::size_t metric) const;

  std::string ToCsv() const;
  static ResultsTable FromCsv(const std::string& text);

 private:
  std::vector<ResultRow> rows_;
};

using MethodScores = std::vector<std::pair<std::string, double>>;

// Per dataset, every method attaining the maximum mean value gets +1.
std::vector<std::pair<std::string, int>> CountBest(const ResultsTable& table,
                                                   std::size_t metric);

// Sum of pairwise Wilcoxon scores across datasets; totals add to M(M-1)/2.
MethodScores WilcoxonMatrix(const ResultsTable& table, std::size_t metric,
                            double alpha_level = 0.05);

/// Means per (metric, method, dataset), best counts and Wilcoxon totals for
/// every metric, plus the mean Wilcoxon
/// score per method. Wilcoxon entries are null with fewer than 5 datasets or
/// 2 methods.
nlohmann::json Summarize(const ResultsTable& table);

struct DatasetSource {
  std::string name;
  enum class Kind { kSynthetic, kFiles, kBundle } kind = Kind::kSynthetic;
  std::optional<std::uint64_t> seed;  // synthetic; per repetition if unset
  data::SyntheticOptions synthetic;
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  data::FileFormat format = data::FileFormat::kCsv;
  Index label_count = 0;
  data::LabelPosition labels_at = data::LabelPosition::kTail;
};

struct MethodEntry {
  std::string name;  // row label, e.g. "nmlsdr*"
  PipelineConfig config;
};

/// Parsed `run` config: a base PipelineConfig plus the grid axes.
struct ExperimentPlan {
  PipelineConfig base;
  std::vector<MethodEntry> methods;
  std::vector<DatasetSource> datasets;
  int repetitions = 1;
  std::filesystem::path output_dir = "results";
  bool dump_embeddings = false;
  bool save_projections = false;
};

// Relative dataset and output paths resolve against `base_dir`. Throws
// ConfigError.
ExperimentPlan PlanFromJson(const nlohmann::json& json,
                            const std::filesystem::path& base_dir = {});

std::pair<data::MultiLabelDataset, data::MultiLabelDataset> LoadSource(
    const DatasetSource& source, std::uint64_t repetition_seed);

/// Runs every (method, dataset, repetition) cell. Repetition r uses seed
/// DeriveSeed(base.seed, r). Writes results.csv and summary.json (plus the
/// optional dumps) into the output directory and returns the table.
ResultsTable RunPlan(const ExperimentPlan& plan);

// gnuplot-friendly rows: embedding coordinates then labels, space separated.
void WriteEmbeddingDump(const std::filesystem::path& path,
                        const Matrix& embedding, const BinaryMatrix& labels);

}  // namespace nmlsdr::harness
