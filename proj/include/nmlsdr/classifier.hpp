#pragma once

#include <optional>

#include "json.hpp"

#include "nmlsdr/config.hpp"
#include "nmlsdr/data.hpp"
#include "nmlsdr/graph.hpp"
#include "nmlsdr/projection.hpp"
#include "nmlsdr/types.hpp"

namespace nmlsdr::classifier {

/// ML-kNN: per-class Bayes rule over the number of neighbors carrying the
/// class, with Laplace smoothing `smoothing`.
struct MlknnModel {
  int k = 10;
  double smoothing = 1.0;
  Vector priors;           // P(H_c), length C
  Matrix cond;             // C x (k+1), P(E_j | H_c)
  Matrix cond_neg;         // C x (k+1), P(E_j | not H_c)
  Matrix train_embedding;  // n x d
  BinaryMatrix train_labels;  // n x C

  Index num_classes() const { return priors.size(); }
  Index dim() const { return train_embedding.cols(); }
};

struct Prediction {
  BinaryMatrix hard;  // m x C
  Matrix score;       // m x C posterior P(H_c | E_j)
};

// Requires n > k and binary labels.
MlknnModel MlknnTrain(const Matrix& embedding, const BinaryMatrix& labels,
                      int k, double smoothing = 1.0);

// Single query of length d.
std::pair<std::vector<std::uint8_t>, Vector> MlknnPredict(
    const MlknnModel& model, const Vector& query);

// Row-wise over an m x d query matrix.
Prediction MlknnPredictAll(const MlknnModel& model, const Matrix& queries);

// Versioned JSON layout ("format": "nmlsdr-mlknn", "version": 1).
nlohmann::json ModelToJson(const MlknnModel& model);
MlknnModel ModelFromJson(const nlohmann::json& json);

// W, normalization and transition for the configured graph kind.
graph::TransitionMatrix BuildTransition(const Matrix& features,
                                        const GraphConfig& config);

/// Learns the projection for `config.method` from canonically ordered
/// training data (labeled rows first).
///
/// nmlsdr: graph -> propagation -> F~ -> dependence maximization.
/// mddmp: dependence maximization on the labeled rows and their labels.
/// pca: covariance of all training rows.
struct FitResult {
  projection::Projection projection;
  std::optional<Matrix> soft_labels;  // F, nmlsdr only
};
FitResult FitProjection(const Matrix& train_features,
                        const data::PartialLabels& partial,
                        const PipelineConfig& config);

struct PipelineResult {
  projection::Projection projection;
  Matrix train_embedding;
  Matrix test_embedding;
  BinaryMatrix train_labels;  // labels ML-kNN was trained on
  Prediction test;
};

/// Two-step semi-supervised classification: embed with the configured DR
/// method, propagate the partial labels again on the embedded training set
/// (same graph and alpha settings), harden, train ML-kNN, predict the test
/// set. `train_features` must be in the canonical order of `partial`.
PipelineResult SemiSupervisedClassify(const Matrix& train_features,
                                      const data::PartialLabels& partial,
                                      const Matrix& test_features,
                                      const PipelineConfig& config);

}  // namespace nmlsdr::classifier
