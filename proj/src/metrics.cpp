#include "nmlsdr/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "nmlsdr/data.hpp"
#include "nmlsdr/error.hpp"

namespace nmlsdr::metrics {
namespace {

void CheckSameShape(const BinaryMatrix& truth, Index rows, Index cols) {
  if (truth.rows() != rows || truth.cols() != cols) {
    throw InvalidInputError("metric inputs have mismatched shapes (" +
                            std::to_string(truth.rows()) + "x" +
                            std::to_string(truth.cols()) + " vs " +
                            std::to_string(rows) + "x" + std::to_string(cols) +
                            ")");
  }
  if (!IsBinary(truth)) throw InvalidInputError("ground truth must be binary");
}

double F1(double overlap, double predicted, double actual) {
  const double denom = predicted + actual;
  return denom > 0.0 ? 2.0 * overlap / denom : 0.0;
}

double MeanOrThrow(double sum, Index count, const char* metric) {
  if (count == 0) {
    throw UndefinedMetricError(std::string(metric) +
                               " is undefined: no sample qualifies");
  }
  return sum / static_cast<double>(count);
}

}  // namespace

double MetricsReport::Get(std::size_t index) const {
  switch (index) {
    case 0: return hl_prime;
    case 1: return rl_prime;
    case 2: return ap;
    case 3: return oe_prime;
    case 4: return cov_prime;
    case 5: return ma_f1;
    case 6: return mi_f1;
  }
  throw InvalidInputError("metric index out of range");
}

double MetricsReport::Get(std::string_view name) const {
  return Get(MetricIndex(name));
}

void MetricsReport::Set(std::size_t index, double value) {
  switch (index) {
    case 0: hl_prime = value; return;
    case 1: rl_prime = value; return;
    case 2: ap = value; return;
    case 3: oe_prime = value; return;
    case 4: cov_prime = value; return;
    case 5: ma_f1 = value; return;
    case 6: mi_f1 = value; return;
  }
  throw InvalidInputError("metric index out of range");
}

std::size_t MetricIndex(std::string_view name) {
  static constexpr std::array<std::string_view, 7> kShort = {
      "hl", "rl", "ap", "oe", "cov", "maf1", "mif1"};
  for (std::size_t i = 0; i < kShort.size(); ++i) {
    if (name == kShort[i] || name == MetricsReport::kNames[i]) return i;
  }
  throw InvalidInputError("unknown metric '" + std::string(name) + "'");
}

double HammingLossPrime(const BinaryMatrix& truth, const BinaryMatrix& pred) {
  CheckSameShape(truth, pred.rows(), pred.cols());
  if (truth.size() == 0) throw UndefinedMetricError("empty label matrix");
  const auto mismatches = (truth.array() != pred.array()).count();
  return 1.0 - static_cast<double>(mismatches) / static_cast<double>(truth.size());
}

double MacroF1(const BinaryMatrix& truth, const BinaryMatrix& pred) {
  CheckSameShape(truth, pred.rows(), pred.cols());
  if (truth.cols() == 0) throw UndefinedMetricError("no classes");
  double total = 0.0;
  for (Index c = 0; c < truth.cols(); ++c) {
    const auto t = truth.col(c).cast<double>();
    const auto p = pred.col(c).cast<double>();
    total += F1(t.dot(p), p.sum(), t.sum());
  }
  return total / static_cast<double>(truth.cols());
}

double MicroF1(const BinaryMatrix& truth, const BinaryMatrix& pred) {
  CheckSameShape(truth, pred.rows(), pred.cols());
  const auto t = truth.cast<double>().array();
  const auto p = pred.cast<double>().array();
  return F1((t * p).sum(), p.sum(), t.sum());
}

std::vector<Index> RankRow(const Eigen::Ref<const Vector>& scores) {
  const Index classes = scores.size();
  std::vector<Index> order(static_cast<std::size_t>(classes));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return scores(a) > scores(b);
  });
  std::vector<Index> rank(static_cast<std::size_t>(classes));
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    rank[static_cast<std::size_t>(order[pos])] = static_cast<Index>(pos) + 1;
  }
  return rank;
}

double RankingLossPrime(const BinaryMatrix& truth, const Matrix& scores) {
  CheckSameShape(truth, scores.rows(), scores.cols());
  double sum = 0.0;
  Index counted = 0;
  for (Index i = 0; i < truth.rows(); ++i) {
    double violations = 0.0;
    Index relevant = 0;
    Index irrelevant = 0;
    for (Index p = 0; p < truth.cols(); ++p) {
      if (truth(i, p)) {
        ++relevant;
      } else {
        ++irrelevant;
      }
      if (!truth(i, p)) continue;
      for (Index q = 0; q < truth.cols(); ++q) {
        if (truth(i, q)) continue;
        if (scores(i, p) < scores(i, q)) {
          violations += 1.0;
        } else if (scores(i, p) == scores(i, q)) {
          violations += 0.5;
        }
      }
    }
    if (relevant == 0 || irrelevant == 0) continue;
    sum += violations / static_cast<double>(relevant * irrelevant);
    ++counted;
  }
  return 1.0 - MeanOrThrow(sum, counted, "ranking loss");
}

double AveragePrecision(const BinaryMatrix& truth, const Matrix& scores) {
  CheckSameShape(truth, scores.rows(), scores.cols());
  double sum = 0.0;
  Index counted = 0;
  for (Index i = 0; i < truth.rows(); ++i) {
    const Index relevant = truth.row(i).cast<Index>().sum();
    if (relevant == 0 || relevant == truth.cols()) continue;
    const auto rank = RankRow(scores.row(i).transpose());
    double precision = 0.0;
    for (Index c = 0; c < truth.cols(); ++c) {
      if (!truth(i, c)) continue;
      const Index rc = rank[static_cast<std::size_t>(c)];
      Index at_or_above = 0;
      for (Index c2 = 0; c2 < truth.cols(); ++c2) {
        if (truth(i, c2) && rank[static_cast<std::size_t>(c2)] <= rc) {
          ++at_or_above;
        }
      }
      precision += static_cast<double>(at_or_above) / static_cast<double>(rc);
    }
    sum += precision / static_cast<double>(relevant);
    ++counted;
  }
  return MeanOrThrow(sum, counted, "average precision");
}

double OneErrorPrime(const BinaryMatrix& truth, const Matrix& scores) {
  CheckSameShape(truth, scores.rows(), scores.cols());
  double hits = 0.0;
  Index counted = 0;
  for (Index i = 0; i < truth.rows(); ++i) {
    if (truth.row(i).cast<Index>().sum() == 0) continue;
    Index top = 0;
    for (Index c = 1; c < truth.cols(); ++c) {
      if (scores(i, c) > scores(i, top)) top = c;
    }
    hits += truth(i, top) ? 1.0 : 0.0;
    ++counted;
  }
  return MeanOrThrow(hits, counted, "one-error");
}

double CoveragePrime(const BinaryMatrix& truth, const Matrix& scores) {
  CheckSameShape(truth, scores.rows(), scores.cols());
  if (truth.cols() < 2) {
    throw UndefinedMetricError("normalized coverage needs at least 2 classes");
  }
  double sum = 0.0;
  Index counted = 0;
  for (Index i = 0; i < truth.rows(); ++i) {
    if (truth.row(i).cast<Index>().sum() == 0) continue;
    const auto rank = RankRow(scores.row(i).transpose());
    Index deepest = 0;
    for (Index c = 0; c < truth.cols(); ++c) {
      if (truth(i, c)) deepest = std::max(deepest, rank[static_cast<std::size_t>(c)]);
    }
    sum += static_cast<double>(deepest - 1);
    ++counted;
  }
  const double coverage = MeanOrThrow(sum, counted, "coverage");
  return 1.0 - coverage / static_cast<double>(truth.cols() - 1);
}

MetricsReport EvaluateAll(const BinaryMatrix& truth, const BinaryMatrix& pred,
                          const Matrix& scores) {
  MetricsReport r;
  r.hl_prime = HammingLossPrime(truth, pred);
  r.rl_prime = RankingLossPrime(truth, scores);
  r.ap = AveragePrecision(truth, scores);
  r.oe_prime = OneErrorPrime(truth, scores);
  r.cov_prime = CoveragePrime(truth, scores);
  r.ma_f1 = MacroF1(truth, pred);
  r.mi_f1 = MicroF1(truth, pred);
  return r;
}

nlohmann::json ToJson(const MetricsReport& report) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < MetricsReport::kNames.size(); ++i) {
    out[std::string(MetricsReport::kNames[i])] = report.Get(i);
  }
  return out;
}

std::string CsvHeader() {
  std::string out;
  for (std::size_t i = 0; i < MetricsReport::kNames.size(); ++i) {
    if (i) out += ',';
    out += MetricsReport::kNames[i];
  }
  return out;
}

std::string CsvValues(const MetricsReport& report) {
  std::string out;
  for (std::size_t i = 0; i < MetricsReport::kNames.size(); ++i) {
    if (i) out += ',';
    out += data::FormatDouble(report.Get(i));
  }
  return out;
}

}  // namespace nmlsdr::metrics
