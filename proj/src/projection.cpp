#include "nmlsdr/projection.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "nmlsdr/error.hpp"

namespace nmlsdr::projection {
namespace {

constexpr char kMagic[4] = {'N', 'M', 'L', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

Matrix CenterColumns(const Matrix& m) {
  return m.rowwise() - m.colwise().mean();
}

// Singular values of B at or below this count as zero.
double SingularTolerance(const Matrix& centered_x, const Matrix& centered_f) {
  const double eps = std::numeric_limits<double>::epsilon();
  const auto dim = static_cast<double>(
      std::max({centered_x.rows(), centered_x.cols(), centered_f.cols()}));
  return 64.0 * eps * dim * centered_x.norm() * centered_f.norm();
}

void CheckFitInputs(const Matrix& features, const Matrix& labels, Index d) {
  const Index n = features.rows();
  if (n < 2) throw InvalidInputError("fit needs at least two samples");
  if (labels.rows() != n) {
    throw InvalidInputError("feature and label matrices disagree on n");
  }
  const Index limit = std::min(labels.cols(), features.cols());
  if (d < 1 || d > limit) {
    throw InvalidInputError("target dimension d=" + std::to_string(d) +
                            " must lie in [1, min(C, D)=" +
                            std::to_string(limit) + "]");
  }
  if (!features.allFinite() || !labels.allFinite()) {
    throw InvalidInputError("fit inputs contain non-finite values");
  }
}

template <typename T>
void WriteLe(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little ||
                std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T ReadLe(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw ParseError("truncated projection file", 0);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

Matrix CenteringOperator::Apply(const Matrix& m) const {
  if (m.rows() != n_) {
    throw InvalidInputError("centering operator size mismatch");
  }
  return CenterColumns(m);
}

Matrix CenteringOperator::Dense() const {
  return Matrix::Identity(n_, n_) -
         Matrix::Constant(n_, n_, 1.0 / static_cast<double>(n_));
}

Matrix DependenceFactor(const Matrix& features, const Matrix& labels) {
  if (features.rows() != labels.rows()) {
    throw InvalidInputError("feature and label matrices disagree on n");
  }
  // F^T H X = (H F)^T (H X) since H is symmetric and idempotent.
  return CenterColumns(labels).transpose() * CenterColumns(features);
}

Matrix DependenceMatrix(const Matrix& features, const Matrix& labels) {
  const Matrix b = DependenceFactor(features, labels);
  return b.transpose() * b;
}

Projection SelectTop(const Vector& values, const Matrix& vectors, Index d,
                     double zero_tolerance) {
  const Index dim = vectors.rows();
  if (d < 1 || d > dim) throw InvalidInputError("d out of range");

  Index rank = 0;
  const Index available = std::min<Index>(d, values.size());
  while (rank < available && values(rank) > zero_tolerance) ++rank;

  Projection out;
  out.basis = Matrix::Zero(dim, d);
  out.eigenvalues = Vector::Zero(d);
  out.rank = rank;
  out.basis.leftCols(rank) = vectors.leftCols(rank);
  out.eigenvalues.head(rank) = values.head(rank);

  Index filled = rank;
  for (Index j = 0; j < dim && filled < d; ++j) {
    Vector v = Vector::Unit(dim, j);
    for (int pass = 0; pass < 2; ++pass) {
      const auto q = out.basis.leftCols(filled);
      v -= q * (q.transpose() * v);
    }
    const double norm = v.norm();
    if (norm > 1e-6) out.basis.col(filled++) = v / norm;
  }
  if (filled < d) throw NumericError("could not complete orthonormal basis");

  for (Index c = 0; c < d; ++c) {
    Index pivot = 0;
    out.basis.col(c).cwiseAbs().maxCoeff(&pivot);
    if (out.basis(pivot, c) < 0.0) out.basis.col(c) *= -1.0;
  }
  return out;
}

Projection NmlsdrFit(const Matrix& features, const Matrix& f_tilde, Index d) {
  CheckFitInputs(features, f_tilde, d);
  const Matrix hx = CenterColumns(features);
  const Matrix hf = CenterColumns(f_tilde);
  const Matrix b = hf.transpose() * hx;  // C x D
  const double sv_tol = SingularTolerance(hx, hf);

  if (features.cols() > f_tilde.cols()) {
    Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinV);
    const Vector values = svd.singularValues().array().square();
    return SelectTop(values, svd.matrixV(), d, sv_tol * sv_tol);
  }
  const Matrix m = b.transpose() * b;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of the dependence matrix failed");
  }
  const Vector values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  return SelectTop(values, vectors, d, sv_tol * sv_tol);
}

Projection MddmpFit(const Matrix& labeled_features,
                    const BinaryMatrix& labeled_labels, Index d) {
  if (labeled_features.rows() == 0 || labeled_labels.rows() == 0) {
    throw InvalidInputError("MDDMp needs labeled data (l = 0)");
  }
  if (!IsBinary(labeled_labels)) {
    throw InvalidInputError("MDDMp labels must be binary");
  }
  return NmlsdrFit(labeled_features, labeled_labels.cast<double>(), d);
}

Projection PcaFit(const Matrix& features, Index d) {
  const Index n = features.rows();
  const Index dim = features.cols();
  if (n < 2) throw InvalidInputError("PCA needs at least two samples");
  if (d < 1 || d > dim) {
    throw InvalidInputError("PCA target dimension must lie in [1, D]");
  }
  if (!features.allFinite()) {
    throw InvalidInputError("PCA input contains non-finite values");
  }
  const Matrix centered = CenterColumns(features);
  const Matrix covariance =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
  if (eig.info() != Eigen::Success) {
    throw NumericError("covariance eigendecomposition failed");
  }
  const Vector values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  const double tol = 64.0 * std::numeric_limits<double>::epsilon() *
                     static_cast<double>(dim) * std::max(values(0), 0.0);
  return SelectTop(values, vectors, d, tol);
}

Matrix Transform(const Projection& projection, const Matrix& features) {
  if (features.cols() != projection.input_dim()) {
    throw InvalidInputError(
        "feature dimension " + std::to_string(features.cols()) +
        " does not match projection input dimension " +
        std::to_string(projection.input_dim()));
  }
  return features * projection.basis;
}

double Objective(const Matrix& basis, const Matrix& dependence) {
  return (basis.transpose() * dependence * basis).trace();
}

void WriteProjection(const Projection& projection,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  WriteLe<std::uint32_t>(out, kFormatVersion);
  WriteLe<std::uint64_t>(out, static_cast<std::uint64_t>(projection.input_dim()));
  WriteLe<std::uint64_t>(out,
                         static_cast<std::uint64_t>(projection.output_dim()));
  WriteLe<std::uint64_t>(out, static_cast<std::uint64_t>(projection.rank));
  for (Index i = 0; i < projection.eigenvalues.size(); ++i) {
    WriteLe<double>(out, projection.eigenvalues(i));
  }
  for (Index c = 0; c < projection.basis.cols(); ++c) {
    for (Index r = 0; r < projection.basis.rows(); ++r) {
      WriteLe<double>(out, projection.basis(r, c));
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Projection ReadProjection(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a projection file: " + path.string(), 0);
  }
  const auto version = ReadLe<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw ParseError("unsupported projection format version " +
                         std::to_string(version),
                     0);
  }
  const auto dim = static_cast<Index>(ReadLe<std::uint64_t>(in));
  const auto d = static_cast<Index>(ReadLe<std::uint64_t>(in));
  Projection p;
  p.rank = static_cast<Index>(ReadLe<std::uint64_t>(in));
  p.eigenvalues.resize(d);
  for (Index i = 0; i < d; ++i) p.eigenvalues(i) = ReadLe<double>(in);
  p.basis.resize(dim, d);
  for (Index c = 0; c < d; ++c) {
    for (Index r = 0; r < dim; ++r) p.basis(r, c) = ReadLe<double>(in);
  }
  return p;
}

void WriteProjectionSidecar(const std::filesystem::path& path,
                            const nlohmann::json& metadata) {
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  std::ofstream out(sidecar, std::ios::trunc);
  if (!out) throw IoError("cannot open " + sidecar.string() + " for writing");
  out << metadata.dump(2) << '\n';
}

}  // namespace nmlsdr::projection
