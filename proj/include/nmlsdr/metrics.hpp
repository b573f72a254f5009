#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "nmlsdr/types.hpp"

namespace nmlsdr::metrics {

/// The seven multi-label scores, each oriented so that higher is better and
/// lying in [0, 1].
struct MetricsReport {
  double hl_prime = 0.0;
  double rl_prime = 0.0;
  double ap = 0.0;
  double oe_prime = 0.0;
  double cov_prime = 0.0;
  double ma_f1 = 0.0;
  double mi_f1 = 0.0;

  static constexpr std::array<std::string_view, 7> kNames = {
      "hl_prime", "rl_prime", "ap", "oe_prime", "cov_prime", "ma_f1", "mi_f1"};

  // Indexed in kNames order.
  double Get(std::size_t index) const;
  double Get(std::string_view name) const;
  void Set(std::size_t index, double value);
};

// Accepts either the field name or the short form (hl, rl, ap, oe, cov,
// maf1, mif1). Throws InvalidInputError otherwise.
std::size_t MetricIndex(std::string_view name);

// Hard-label measures.
double HammingLossPrime(const BinaryMatrix& truth, const BinaryMatrix& pred);
double MacroF1(const BinaryMatrix& truth, const BinaryMatrix& pred);
double MicroF1(const BinaryMatrix& truth, const BinaryMatrix& pred);

// Ranking measures over real-valued scores. Each throws UndefinedMetricError
// when no sample qualifies. RL and AP skip samples with no relevant or no
// irrelevant label; OE and Cov skip samples with no relevant label.
// Ranks run from 1 by descending score, ties broken by smaller class index.
double RankingLossPrime(const BinaryMatrix& truth, const Matrix& scores);
double AveragePrecision(const BinaryMatrix& truth, const Matrix& scores);
double OneErrorPrime(const BinaryMatrix& truth, const Matrix& scores);
double CoveragePrime(const BinaryMatrix& truth, const Matrix& scores);

// Rank of each class (1 = highest score) for one score row.
std::vector<Index> RankRow(const Eigen::Ref<const Vector>& scores);

MetricsReport EvaluateAll(const BinaryMatrix& truth, const BinaryMatrix& pred,
                          const Matrix& scores);

nlohmann::json ToJson(const MetricsReport& report);
std::string CsvHeader();
std::string CsvValues(const MetricsReport& report);

}  // namespace nmlsdr::metrics
