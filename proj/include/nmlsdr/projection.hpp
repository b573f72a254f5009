#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "nmlsdr/types.hpp"

namespace nmlsdr::projection {

/// Orthonormal D x d projection with its eigenvalues (descending, >= 0).
struct Projection {
  Matrix basis;      // D x d, basis^T basis = I
  Vector eigenvalues;  // length d
  // Number of strictly positive eigenvalues among the d returned. When it is
  // below d the trailing columns are a deterministic completion.
  Index rank = 0;

  Index input_dim() const { return basis.rows(); }
  Index output_dim() const { return basis.cols(); }
  bool rank_deficient() const { return rank < basis.cols(); }
};

/// Centering operator H = I - 11^T / n, applied as column-mean subtraction.
class CenteringOperator {
 public:
  explicit CenteringOperator(Index n) : n_(n) {}

  Index size() const { return n_; }
  Matrix Apply(const Matrix& m) const;
  // Materialized n x n matrix, for checks on small n only.
  Matrix Dense() const;

 private:
  Index n_;
};

// M = X^T H F F^T H X (the constant (n-1)^-2 is dropped).
Matrix DependenceMatrix(const Matrix& features, const Matrix& labels);

// B = F^T H X, the C x D factor with M = B^T B.
Matrix DependenceFactor(const Matrix& features, const Matrix& labels);

/// Top-d eigenvectors of X^T H F~ F~^T H X.
///
/// Uses the SVD of the C x D factor when D > C and a symmetric
/// eigendecomposition of M otherwise. Requires 1 <= d <= min(C, D), n >= 2.
Projection NmlsdrFit(const Matrix& features, const Matrix& f_tilde, Index d);

// Same machinery on the labeled rows only, with their observed labels.
Projection MddmpFit(const Matrix& labeled_features,
                    const BinaryMatrix& labeled_labels, Index d);

// Top-d eigenvectors of the sample covariance. Requires 1 <= d <= D.
Projection PcaFit(const Matrix& features, Index d);

// Z = X P.
Matrix Transform(const Projection& projection, const Matrix& features);

// tr(P^T M P).
double Objective(const Matrix& basis, const Matrix& dependence);

/// Deterministic top-d selection from an eigen-decomposition.
///
/// `values` are sorted descending with matching `vectors` columns. Eigenvalues
/// at or below `zero_tolerance` count as zero and their vectors are replaced
/// by Gram-Schmidt over e_0, e_1, ... against the retained columns. Every
/// column's largest-magnitude entry is made positive.
Projection SelectTop(const Vector& values, const Matrix& vectors, Index d,
                     double zero_tolerance);

/// Binary layout, little-endian:
///   char[4] "NMLP", u32 version (1), u64 D, u64 d, u64 rank,
///   f64 eigenvalues[d], f64 basis[D * d] in column-major order.
void WriteProjection(const Projection& projection,
                     const std::filesystem::path& path);
Projection ReadProjection(const std::filesystem::path& path);

// Sidecar with method name, hyper-parameters and seed, written next to the
// binary as <path>.json.
void WriteProjectionSidecar(const std::filesystem::path& path,
                            const nlohmann::json& metadata);

}  // namespace nmlsdr::projection
