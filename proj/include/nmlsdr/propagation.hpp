#pragma once

#include "nmlsdr/graph.hpp"
#include "nmlsdr/types.hpp"

namespace nmlsdr::propagation {

inline constexpr double kDefaultAlphaLabeled = 0.6;
inline constexpr double kDefaultAlphaUnlabeled = 0.999;
inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr int kDefaultMaxIterations = 10000;
inline constexpr double kDefaultThreshold = 0.5;

/// Per-sample propagation weights alpha_i, all in [0, 1).
///
/// alpha_i = 0 clamps sample i to its initial label; alpha_i close to 1 lets
/// the neighbors decide.
class AlphaSchedule {
 public:
  explicit AlphaSchedule(Vector alpha);

  // First `labeled` samples get `alpha_labeled`, the rest `alpha_unlabeled`.
  static AlphaSchedule Split(Index n, Index labeled,
                             double alpha_labeled = kDefaultAlphaLabeled,
                             double alpha_unlabeled = kDefaultAlphaUnlabeled);

  const Vector& values() const { return alpha_; }
  Index size() const { return alpha_.size(); }

 private:
  Vector alpha_;
};

/// Fixed-point iteration F <- diag(alpha) T F + diag(1 - alpha) Y from
/// F(0) = Y, until the max-abs change drops below `tolerance`.
/// Throws ConvergenceError (with the last iterate) after `max_iterations`.
Matrix PropagateIterative(const graph::TransitionMatrix& transition,
                          const BinaryMatrix& initial,
                          const AlphaSchedule& alpha,
                          double tolerance = kDefaultTolerance,
                          int max_iterations = kDefaultMaxIterations);

/// Solves (I - diag(alpha) T) F = (I - diag(alpha)) Y; all label columns
/// share one factorization. Transitions that carry their symmetric factor
/// (see TransitionMatrix) go through a sparse LDL^T of an equivalent
/// symmetric positive definite system, others through sparse LU.
Matrix PropagateDirect(const graph::TransitionMatrix& transition,
                       const BinaryMatrix& initial, const AlphaSchedule& alpha);

// 1 where soft > threshold (strict), else 0.
BinaryMatrix Harden(const Matrix& soft, double threshold = kDefaultThreshold);

/// Stacks hardened rows [0, labeled) over the untouched soft rows
/// [labeled, n). This is the label matrix the projection is fitted on.
Matrix AssembleFTilde(const Matrix& soft, Index labeled,
                      double threshold = kDefaultThreshold);

}  // namespace nmlsdr::propagation
