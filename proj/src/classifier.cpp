#include "nmlsdr/classifier.hpp"

#include <string>

#include "nmlsdr/error.hpp"
#include "nmlsdr/propagation.hpp"

namespace nmlsdr::classifier {
namespace {

// Posterior and MAP decision for one class given neighbor count j.
std::pair<double, bool> Posterior(const MlknnModel& model, Index c, Index j) {
  const double positive = model.priors(c) * model.cond(c, j);
  const double negative = (1.0 - model.priors(c)) * model.cond_neg(c, j);
  const double total = positive + negative;
  const double score = total > 0.0 ? positive / total : 0.5;
  return {score, positive > negative};
}

Index CountNeighborsWith(const BinaryMatrix& labels,
                         const std::vector<Index>& neighbors, Index c) {
  Index count = 0;
  for (Index j : neighbors) count += labels(j, c);
  return count;
}

Matrix MatrixFromJson(const nlohmann::json& json) {
  const auto rows = json.at("rows").get<Index>();
  const auto cols = json.at("cols").get<Index>();
  const auto& values = json.at("data");
  if (static_cast<Index>(values.size()) != rows * cols) {
    throw ParseError("matrix data length mismatch", 0);
  }
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = values[static_cast<std::size_t>(r * cols + c)].get<double>();
    }
  }
  return m;
}

template <typename Derived>
nlohmann::json MatrixToJson(const Eigen::MatrixBase<Derived>& m) {
  nlohmann::json values = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      values.push_back(static_cast<double>(m(r, c)));
    }
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", values}};
}

}  // namespace

MlknnModel MlknnTrain(const Matrix& embedding, const BinaryMatrix& labels,
                      int k, double smoothing) {
  const Index n = embedding.rows();
  if (k < 1) throw InvalidInputError("ML-kNN requires k >= 1");
  if (n <= k) {
    throw InvalidInputError("ML-kNN requires more training points (" +
                            std::to_string(n) + ") than neighbors (" +
                            std::to_string(k) + ")");
  }
  if (labels.rows() != n) {
    throw InvalidInputError("ML-kNN embedding and labels disagree on n");
  }
  if (!IsBinary(labels)) throw InvalidInputError("ML-kNN labels must be binary");
  if (!(smoothing >= 0.0)) throw InvalidInputError("smoothing must be >= 0");

  const Index classes = labels.cols();
  MlknnModel model;
  model.k = k;
  model.smoothing = smoothing;
  model.train_embedding = embedding;
  model.train_labels = labels;

  const Vector positives = labels.cast<double>().colwise().sum().transpose();
  model.priors = (Vector::Constant(classes, smoothing) + positives) /
                 (2.0 * smoothing + static_cast<double>(n));

  // counts(c, j): training points with (without) class c whose k neighbors
  // carry class c exactly j times.
  Matrix with = Matrix::Zero(classes, k + 1);
  Matrix without = Matrix::Zero(classes, k + 1);
  const auto neighbors =
      graph::NearestNeighbors(embedding, embedding, k, /*exclude_self=*/true);
  for (Index i = 0; i < n; ++i) {
    const auto& nb = neighbors[static_cast<std::size_t>(i)];
    for (Index c = 0; c < classes; ++c) {
      const Index j = CountNeighborsWith(labels, nb, c);
      if (labels(i, c)) {
        with(c, j) += 1.0;
      } else {
        without(c, j) += 1.0;
      }
    }
  }
  const double bins = static_cast<double>(k + 1);
  model.cond.resize(classes, k + 1);
  model.cond_neg.resize(classes, k + 1);
  for (Index c = 0; c < classes; ++c) {
    const double total_with = with.row(c).sum();
    const double total_without = without.row(c).sum();
    for (Index j = 0; j <= k; ++j) {
      const double denom_with = smoothing * bins + total_with;
      const double denom_without = smoothing * bins + total_without;
      // With s = 0 and an empty class the table is undefined; keep it uniform.
      model.cond(c, j) = denom_with > 0.0
                             ? (smoothing + with(c, j)) / denom_with
                             : 1.0 / bins;
      model.cond_neg(c, j) = denom_without > 0.0
                                 ? (smoothing + without(c, j)) / denom_without
                                 : 1.0 / bins;
    }
  }
  return model;
}

Prediction MlknnPredictAll(const MlknnModel& model, const Matrix& queries) {
  if (queries.cols() != model.dim()) {
    throw InvalidInputError("query dimension " +
                            std::to_string(queries.cols()) +
                            " does not match model dimension " +
                            std::to_string(model.dim()));
  }
  const Index m = queries.rows();
  const Index classes = model.num_classes();
  Prediction out;
  out.hard = BinaryMatrix::Zero(m, classes);
  out.score = Matrix::Zero(m, classes);
  if (m == 0) return out;
  const auto neighbors = graph::NearestNeighbors(
      model.train_embedding, queries, model.k, /*exclude_self=*/false);
  for (Index q = 0; q < m; ++q) {
    const auto& nb = neighbors[static_cast<std::size_t>(q)];
    for (Index c = 0; c < classes; ++c) {
      const Index j = CountNeighborsWith(model.train_labels, nb, c);
      const auto [score, positive] = Posterior(model, c, j);
      out.score(q, c) = score;
      out.hard(q, c) = positive ? 1 : 0;
    }
  }
  return out;
}

std::pair<std::vector<std::uint8_t>, Vector> MlknnPredict(
    const MlknnModel& model, const Vector& query) {
  const Prediction p = MlknnPredictAll(model, query.transpose());
  std::vector<std::uint8_t> hard(static_cast<std::size_t>(p.hard.cols()));
  for (Index c = 0; c < p.hard.cols(); ++c) {
    hard[static_cast<std::size_t>(c)] = p.hard(0, c);
  }
  return {hard, p.score.row(0).transpose()};
}

nlohmann::json ModelToJson(const MlknnModel& model) {
  return {
      {"format", "nmlsdr-mlknn"},
      {"version", 1},
      {"k", model.k},
      {"smoothing", model.smoothing},
      {"priors", MatrixToJson(model.priors)},
      {"cond", MatrixToJson(model.cond)},
      {"cond_neg", MatrixToJson(model.cond_neg)},
      {"train_embedding", MatrixToJson(model.train_embedding)},
      {"train_labels", MatrixToJson(model.train_labels.cast<double>())},
  };
}

MlknnModel ModelFromJson(const nlohmann::json& json) {
  try {
    if (json.at("format") != "nmlsdr-mlknn" || json.at("version") != 1) {
      throw ParseError("unsupported ML-kNN model format", 0);
    }
    MlknnModel model;
    model.k = json.at("k").get<int>();
    model.smoothing = json.at("smoothing").get<double>();
    model.priors = MatrixFromJson(json.at("priors"));
    model.cond = MatrixFromJson(json.at("cond"));
    model.cond_neg = MatrixFromJson(json.at("cond_neg"));
    model.train_embedding = MatrixFromJson(json.at("train_embedding"));
    const Matrix labels = MatrixFromJson(json.at("train_labels"));
    if (!((labels.array() == 0.0) || (labels.array() == 1.0)).all()) {
      throw ParseError("ML-kNN labels must be binary", 0);
    }
    model.train_labels = labels.cast<std::uint8_t>();
    if (model.cond.rows() != model.priors.size() ||
        model.cond.cols() != model.k + 1 ||
        model.cond_neg.rows() != model.cond.rows() ||
        model.cond_neg.cols() != model.cond.cols() ||
        model.train_labels.rows() != model.train_embedding.rows() ||
        model.train_labels.cols() != model.priors.size()) {
      throw ParseError("inconsistent ML-kNN model shapes", 0);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ML-kNN model: ") + e.what(), 0);
  }
}

graph::TransitionMatrix BuildTransition(const Matrix& features,
                                        const GraphConfig& config) {
  return config.kind == GraphKind::kKnn
             ? graph::KnnTransition(features, config.k)
             : graph::RbfTransition(features, config.sigma);
}

FitResult FitProjection(const Matrix& train_features,
                        const data::PartialLabels& partial,
                        const PipelineConfig& config) {
  const Index n = train_features.rows();
  const Index classes = partial.initial.cols();
  if (partial.initial.rows() != n) {
    throw InvalidInputError("features and partial labels disagree on n");
  }
  config.Validate(static_cast<long>(classes));
  const Index d = config.ResolvedDim(static_cast<long>(classes));

  FitResult result;
  switch (config.method) {
    case Method::kNmlsdr: {
      const auto transition = BuildTransition(train_features, config.graph);
      const auto alpha = propagation::AlphaSchedule::Split(
          n, partial.labeled, config.alpha_labeled, config.alpha_unlabeled);
      Matrix soft =
          propagation::PropagateDirect(transition, partial.initial, alpha);
      const Matrix f_tilde = propagation::AssembleFTilde(soft, partial.labeled);
      result.projection = projection::NmlsdrFit(train_features, f_tilde, d);
      result.soft_labels = std::move(soft);
      break;
    }
    case Method::kMddmp:
      result.projection =
          projection::MddmpFit(train_features.topRows(partial.labeled),
                               partial.initial.topRows(partial.labeled), d);
      break;
    case Method::kPca:
      result.projection = projection::PcaFit(train_features, d);
      break;
  }
  return result;
}

PipelineResult SemiSupervisedClassify(const Matrix& train_features,
                                      const data::PartialLabels& partial,
                                      const Matrix& test_features,
                                      const PipelineConfig& config) {
  if (partial.labeled < 1) {
    throw InvalidInputError("semi-supervised classification needs l >= 1");
  }
  if (test_features.cols() != train_features.cols()) {
    throw InvalidInputError("train and test disagree on feature count");
  }
  PipelineResult out;
  out.projection = FitProjection(train_features, partial, config).projection;
  out.train_embedding = projection::Transform(out.projection, train_features);
  out.test_embedding = projection::Transform(out.projection, test_features);

  const auto transition = BuildTransition(out.train_embedding, config.graph);
  const auto alpha = propagation::AlphaSchedule::Split(
      train_features.rows(), partial.labeled, config.alpha_labeled,
      config.alpha_unlabeled);
  out.train_labels = propagation::Harden(
      propagation::PropagateDirect(transition, partial.initial, alpha));

  const MlknnModel model =
      MlknnTrain(out.train_embedding, out.train_labels, config.mlknn_k,
                 config.mlknn_smoothing);
  out.test = MlknnPredictAll(model, out.test_embedding);
  return out;
}

}  // namespace nmlsdr::classifier
