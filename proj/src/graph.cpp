#include "nmlsdr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "nmlsdr/error.hpp"

namespace nmlsdr::graph {
namespace {

using Triplet = Eigen::Triplet<double>;

void RequireFinite(const Matrix& x, const char* what) {
  if (!x.allFinite()) {
    throw InvalidInputError(std::string(what) + " contains non-finite values");
  }
}

struct Candidate {
  double distance;
  Index index;
};

bool Closer(const Candidate& a, const Candidate& b) {
  return a.distance < b.distance ||
         (a.distance == b.distance && a.index < b.index);
}

bool IsExactlySymmetric(const SparseMatrix& m) {
  const SparseMatrix asymmetry = m - SparseMatrix(m.transpose());
  for (Index i = 0; i < asymmetry.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(asymmetry, i); it; ++it) {
      if (it.value() != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

AdjacencyMatrix AdjacencyMatrix::FromSparse(SparseMatrix weights) {
  if (weights.rows() != weights.cols()) {
    throw InvalidInputError("adjacency matrix must be square");
  }
  weights.makeCompressed();
  for (Index i = 0; i < weights.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(weights, i); it; ++it) {
      if (!(it.value() >= 0.0) || !std::isfinite(it.value())) {
        throw InvalidInputError("adjacency weights must be finite and >= 0");
      }
      if (it.row() == it.col() && it.value() != 0.0) {
        throw InvalidInputError("adjacency matrix must have a zero diagonal");
      }
    }
  }
  if (!IsExactlySymmetric(weights)) {
    throw InvalidInputError("adjacency matrix must be symmetric");
  }
  weights.prune(0.0);
  return AdjacencyMatrix(std::move(weights));
}

AdjacencyMatrix AdjacencyMatrix::FromDense(const Matrix& weights) {
  return FromSparse(weights.sparseView(0.0, 0.0));
}

TransitionMatrix TransitionMatrix::FromSparse(SparseMatrix probabilities) {
  if (probabilities.rows() != probabilities.cols()) {
    throw InvalidInputError("transition matrix must be square");
  }
  probabilities.makeCompressed();
  for (Index i = 0; i < probabilities.outerSize(); ++i) {
    double row_sum = 0.0;
    for (SparseMatrix::InnerIterator it(probabilities, i); it; ++it) {
      if (!(it.value() >= 0.0 && it.value() <= 1.0)) {
        throw InvalidInputError("transition probabilities must lie in [0, 1]");
      }
      row_sum += it.value();
    }
    if (std::abs(row_sum - 1.0) > 1e-10) {
      throw InvalidInputError("transition row " + std::to_string(i) +
                              " does not sum to 1");
    }
  }
  return TransitionMatrix(std::move(probabilities));
}

TransitionMatrix TransitionMatrix::FromDense(const Matrix& probabilities) {
  return FromSparse(probabilities.sparseView(0.0, 0.0));
}

AdjacencyMatrix RbfAdjacency(const Matrix& features, double sigma) {
  const Index n = features.rows();
  if (n < 2) throw InvalidInputError("rbf graph needs at least two samples");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidInputError("sigma must be a positive finite number");
  }
  RequireFinite(features, "feature matrix");

  const RowMatrix x = features;
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(n * (n - 1)));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d2 = (x.row(i) - x.row(j)).squaredNorm();
      const double w = std::exp(-d2 * inv_sigma2);
      if (w > 0.0) {
        triplets.emplace_back(i, j, w);
        triplets.emplace_back(j, i, w);
      }
    }
  }
  SparseMatrix w(n, n);
  w.setFromTriplets(triplets.begin(), triplets.end());
  return AdjacencyMatrix::FromSparse(std::move(w));
}

std::vector<std::vector<Index>> NearestNeighbors(const Matrix& reference,
                                                 const Matrix& queries, int k,
                                                 bool exclude_self) {
  const Index n_ref = reference.rows();
  const Index available = exclude_self ? n_ref - 1 : n_ref;
  if (k < 1 || k > available) {
    throw InvalidInputError("neighbor count k=" + std::to_string(k) +
                            " out of range for " + std::to_string(n_ref) +
                            " reference points");
  }
  if (reference.cols() != queries.cols()) {
    throw InvalidInputError("query dimension does not match reference");
  }
  if (exclude_self && reference.rows() != queries.rows()) {
    throw InvalidInputError("exclude_self requires queries == reference");
  }
  RequireFinite(reference, "reference matrix");
  RequireFinite(queries, "query matrix");

  const RowMatrix ref = reference;
  const RowMatrix qry = queries;
  const auto kk = static_cast<std::size_t>(k);
  const Vector ref_norms = ref.rowwise().squaredNorm();
  // Bound on |screened - exact| per unit of (|q|^2 + |r|^2), covering both
  // the Gram expansion and the differencing evaluation.
  const double slack =
      4.0 * static_cast<double>(ref.cols() + 4) *
      std::numeric_limits<double>::epsilon();

  std::vector<std::vector<Index>> result(static_cast<std::size_t>(qry.rows()));
  std::vector<double> upper;
  std::vector<Candidate> candidates;
  upper.reserve(static_cast<std::size_t>(n_ref));
  constexpr Index kBlock = 256;
  for (Index start = 0; start < qry.rows(); start += kBlock) {
    const Index rows = std::min(kBlock, qry.rows() - start);
    // Screening pass: Gram-expanded distances for a block of queries.
    const Matrix gram = qry.middleRows(start, rows) * ref.transpose();
    for (Index b = 0; b < rows; ++b) {
      const Index q = start + b;
      const auto query = qry.row(q);
      const double qn = query.squaredNorm();
      upper.clear();
      for (Index j = 0; j < n_ref; ++j) {
        if (exclude_self && j == q) continue;
        const double approx = qn + ref_norms(j) - 2.0 * gram(b, j);
        upper.push_back(approx + slack * (qn + ref_norms(j)));
      }
      std::nth_element(upper.begin(), upper.begin() + (kk - 1), upper.end());
      const double cutoff = upper[kk - 1];

      // Exact pass on every row that could still be among the k nearest.
      candidates.clear();
      for (Index j = 0; j < n_ref; ++j) {
        if (exclude_self && j == q) continue;
        const double approx = qn + ref_norms(j) - 2.0 * gram(b, j);
        if (approx - slack * (qn + ref_norms(j)) <= cutoff) {
          candidates.push_back({(ref.row(j) - query).squaredNorm(), j});
        }
      }
      std::nth_element(candidates.begin(), candidates.begin() + (kk - 1),
                       candidates.end(), Closer);
      std::sort(candidates.begin(), candidates.begin() + kk, Closer);
      auto& out = result[static_cast<std::size_t>(q)];
      out.reserve(kk);
      for (std::size_t t = 0; t < kk; ++t) out.push_back(candidates[t].index);
    }
  }
  return result;
}

AdjacencyMatrix KnnAdjacency(const Matrix& features, int k) {
  const Index n = features.rows();
  if (n < 2) throw InvalidInputError("knn graph needs at least two samples");
  if (k < 1 || k >= n) {
    throw InvalidInputError("knn graph requires 1 <= k < n (k=" +
                            std::to_string(k) + ", n=" + std::to_string(n) +
                            ")");
  }
  const auto neighbors = NearestNeighbors(features, features, k, true);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * n * k));
  for (Index i = 0; i < n; ++i) {
    for (Index j : neighbors[static_cast<std::size_t>(i)]) {
      triplets.emplace_back(i, j, 1.0);
      triplets.emplace_back(j, i, 1.0);
    }
  }
  SparseMatrix w(n, n);
  // Mutual neighbors produce duplicate triplets; keep the entry binary.
  w.setFromTriplets(triplets.begin(), triplets.end(),
                    [](double, double) { return 1.0; });
  return AdjacencyMatrix::FromSparse(std::move(w));
}

SparseMatrix SymmetricNormalize(const AdjacencyMatrix& adjacency) {
  const SparseMatrix& w = adjacency.weights();
  const Index n = w.rows();
  Vector degree(n);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(w, i); it; ++it) sum += it.value();
    if (!(sum > 0.0)) {
      throw DegenerateGraphError("node " + std::to_string(i) +
                                 " is isolated (zero degree)");
    }
    degree(i) = sum;
  }
  SparseMatrix normalized = w;
  for (Index i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(normalized, i); it; ++it) {
      it.valueRef() = it.value() / std::sqrt(degree(i) * degree(it.col()));
    }
  }
  return normalized;
}

TransitionMatrix RowStochastic(const SparseMatrix& normalized) {
  if (normalized.rows() != normalized.cols()) {
    throw InvalidInputError("normalized adjacency must be square");
  }
  SparseMatrix t = normalized;
  t.makeCompressed();
  for (Index i = 0; i < t.outerSize(); ++i) {
    double row_sum = 0.0;
    for (SparseMatrix::InnerIterator it(t, i); it; ++it) {
      if (!(it.value() >= 0.0)) {
        throw InvalidInputError("normalized adjacency has negative entries");
      }
      row_sum += it.value();
    }
    if (!(row_sum > 0.0)) {
      throw DegenerateGraphError("row " + std::to_string(i) +
                                 " of the normalized adjacency sums to zero");
    }
    for (SparseMatrix::InnerIterator it(t, i); it; ++it) {
      it.valueRef() = it.value() / row_sum;
    }
  }
  TransitionMatrix out = TransitionMatrix::FromSparse(std::move(t));
  if (IsExactlySymmetric(normalized)) out.symmetric_ = normalized;
  return out;
}

TransitionMatrix KnnTransition(const Matrix& features, int k) {
  return RowStochastic(SymmetricNormalize(KnnAdjacency(features, k)));
}

TransitionMatrix RbfTransition(const Matrix& features, double sigma) {
  return RowStochastic(SymmetricNormalize(RbfAdjacency(features, sigma)));
}

}  // namespace nmlsdr::graph
