#pragma once

#include <optional>
#include <vector>

#include "nmlsdr/types.hpp"

namespace nmlsdr::graph {

/// Symmetric, non-negative, zero-diagonal adjacency matrix W.
///
/// Stored sparse; Dense() materializes the n x n contract view. Connectivity
/// (every row has a positive entry) is checked by SymmetricNormalize, which
/// reports isolated nodes as DegenerateGraphError.
class AdjacencyMatrix {
 public:
  // Validates symmetry (exact), non-negativity and a zero diagonal.
  static AdjacencyMatrix FromSparse(SparseMatrix weights);
  static AdjacencyMatrix FromDense(const Matrix& weights);

  const SparseMatrix& weights() const { return weights_; }
  Index size() const { return weights_.rows(); }
  Matrix Dense() const { return Matrix(weights_); }

 private:
  explicit AdjacencyMatrix(SparseMatrix weights)
      : weights_(std::move(weights)) {}
  SparseMatrix weights_;
};

/// Row-stochastic transition matrix T.
///
/// When built by RowStochastic the symmetric W~ with T = D~^{-1} W~ is kept
/// alongside, which lets the direct propagation solve a symmetric system.
class TransitionMatrix {
 public:
  // Validates entries in [0, 1] and row sums of 1 within 1e-10.
  static TransitionMatrix FromSparse(SparseMatrix probabilities);
  static TransitionMatrix FromDense(const Matrix& probabilities);

  const SparseMatrix& probabilities() const { return probabilities_; }
  Index size() const { return probabilities_.rows(); }
  Matrix Dense() const { return Matrix(probabilities_); }

  // W~, or nullptr when T was supplied directly.
  const SparseMatrix* symmetric_factor() const {
    return symmetric_ ? &*symmetric_ : nullptr;
  }

 private:
  friend TransitionMatrix RowStochastic(const SparseMatrix& normalized);
  explicit TransitionMatrix(SparseMatrix p) : probabilities_(std::move(p)) {}
  SparseMatrix probabilities_;
  std::optional<SparseMatrix> symmetric_;
};

// W_ij = exp(-||x_i - x_j||^2 / sigma^2), zero diagonal.
AdjacencyMatrix RbfAdjacency(const Matrix& features, double sigma);

// Binary symmetrized kNN graph: W_ij = 1 iff i is among j's k nearest or
// j among i's. Euclidean distance, ties broken by smaller index.
AdjacencyMatrix KnnAdjacency(const Matrix& features, int k);

// D^{-1/2} W D^{-1/2}.
SparseMatrix SymmetricNormalize(const AdjacencyMatrix& adjacency);

// T = D~^{-1} W~.
TransitionMatrix RowStochastic(const SparseMatrix& normalized);

// Steps 1-3 for either graph kind in one call.
TransitionMatrix KnnTransition(const Matrix& features, int k);
TransitionMatrix RbfTransition(const Matrix& features, double sigma);

/// k nearest rows of `reference` for each row of `queries`, nearest first.
///
/// Squared Euclidean distances are computed per pair by direct differencing,
/// so identical points are exactly at distance 0 and d(i, j) == d(j, i).
/// Ties are broken by smaller reference index. When `exclude_self` is set,
/// queries and reference must be the same set and row i never lists itself.
std::vector<std::vector<Index>> NearestNeighbors(const Matrix& reference,
                                                 const Matrix& queries, int k,
                                                 bool exclude_self);

}  // namespace nmlsdr::graph
