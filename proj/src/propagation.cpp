#include "nmlsdr/propagation.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>
#include <vector>

#include "nmlsdr/error.hpp"

namespace nmlsdr::propagation {
namespace {

void CheckShapes(const graph::TransitionMatrix& transition,
                 const BinaryMatrix& initial, const AlphaSchedule& alpha) {
  const Index n = transition.size();
  if (initial.rows() != n || alpha.size() != n) {
    throw InvalidInputError(
        "propagation inputs disagree on the number of samples (T: " +
        std::to_string(n) + ", Y: " + std::to_string(initial.rows()) +
        ", alpha: " + std::to_string(alpha.size()) + ")");
  }
  if (!IsBinary(initial)) {
    throw InvalidInputError("initial label matrix must be binary");
  }
}

// Rounding can leave entries a few ulps outside [0, 1].
Matrix ClampUnit(Matrix f) { return f.cwiseMax(0.0).cwiseMin(1.0); }

// T = D~^{-1} W~ with W~ symmetric. Rows with alpha_i = 0 are fixed at Y_i;
// scaling the remaining rows by d~_i / alpha_i gives the symmetric positive
// definite system
//   (diag(d~ / alpha) - W~_ff) F_f = diag(d~ (1 - alpha) / alpha) Y_f + W~_fc Y_c.
Matrix SolveSymmetric(const SparseMatrix& w, const Matrix& y, const Vector& a) {
  const Index n = w.rows();
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  std::vector<Index> free_rows;
  for (Index i = 0; i < n; ++i) {
    if (a(i) > 0.0) {
      slot[static_cast<std::size_t>(i)] = static_cast<Index>(free_rows.size());
      free_rows.push_back(i);
    }
  }
  Matrix f = y;
  const auto m = static_cast<Index>(free_rows.size());
  if (m == 0) return f;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(w.nonZeros() + m));
  Matrix rhs(m, y.cols());
  for (Index r = 0; r < m; ++r) {
    const Index i = free_rows[static_cast<std::size_t>(r)];
    double degree = 0.0;
    rhs.row(r).setZero();
    for (SparseMatrix::InnerIterator it(w, i); it; ++it) {
      degree += it.value();
      const Index c = slot[static_cast<std::size_t>(it.col())];
      if (c >= 0) {
        triplets.emplace_back(r, c, -it.value());
      } else {
        rhs.row(r) += it.value() * y.row(it.col());
      }
    }
    if (!(degree > 0.0)) {
      throw NumericError("propagation system has an isolated row");
    }
    triplets.emplace_back(r, r, degree / a(i));
    rhs.row(r) += degree * (1.0 - a(i)) / a(i) * y.row(i);
  }
  Eigen::SparseMatrix<double> system(m, m);
  system.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system);
  if (solver.info() != Eigen::Success) {
    throw NumericError("propagation system is not positive definite");
  }
  const Matrix solved = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !solved.allFinite()) {
    throw NumericError("propagation solve failed");
  }
  for (Index r = 0; r < m; ++r) {
    f.row(free_rows[static_cast<std::size_t>(r)]) = solved.row(r);
  }
  return f;
}

Matrix SolveGeneral(const SparseMatrix& t, const Matrix& y, const Vector& a) {
  const Index n = t.rows();
  Eigen::SparseMatrix<double> system = -(a.asDiagonal() * t);
  for (Index i = 0; i < n; ++i) system.coeffRef(i, i) += 1.0;
  system.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(system);
  if (solver.info() != Eigen::Success) {
    throw NumericError("propagation system is singular: " +
                       solver.lastErrorMessage());
  }
  const Matrix rhs = (Vector::Ones(n) - a).asDiagonal() * y;
  Matrix f = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !f.allFinite()) {
    throw NumericError("propagation solve failed");
  }
  return f;
}

}  // namespace

AlphaSchedule::AlphaSchedule(Vector alpha) : alpha_(std::move(alpha)) {
  for (Index i = 0; i < alpha_.size(); ++i) {
    if (!(alpha_(i) >= 0.0 && alpha_(i) < 1.0)) {
      throw InvalidInputError("alpha[" + std::to_string(i) +
                              "] must lie in [0, 1)");
    }
  }
}

AlphaSchedule AlphaSchedule::Split(Index n, Index labeled, double alpha_labeled,
                                   double alpha_unlabeled) {
  if (labeled < 0 || labeled > n) {
    throw InvalidInputError("labeled count out of range");
  }
  Vector alpha(n);
  alpha.head(labeled).setConstant(alpha_labeled);
  alpha.tail(n - labeled).setConstant(alpha_unlabeled);
  return AlphaSchedule(std::move(alpha));
}

Matrix PropagateIterative(const graph::TransitionMatrix& transition,
                          const BinaryMatrix& initial,
                          const AlphaSchedule& alpha, double tolerance,
                          int max_iterations) {
  CheckShapes(transition, initial, alpha);
  if (!(tolerance > 0.0)) throw InvalidInputError("tolerance must be positive");
  if (max_iterations < 1) {
    throw InvalidInputError("max_iterations must be at least 1");
  }
  const SparseMatrix& t = transition.probabilities();
  const Vector& a = alpha.values();
  const Matrix y = initial.cast<double>();
  const Matrix anchor = (Vector::Ones(a.size()) - a).asDiagonal() * y;

  Matrix f = y;
  double change = 0.0;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    Matrix next = a.asDiagonal() * (t * f);
    next += anchor;
    change = (next - f).cwiseAbs().maxCoeff();
    f = std::move(next);
    if (change < tolerance) return ClampUnit(std::move(f));
  }
  throw ConvergenceError("label propagation did not converge in " +
                             std::to_string(max_iterations) +
                             " iterations (last change " +
                             std::to_string(change) + ")",
                         f, change, max_iterations);
}

Matrix PropagateDirect(const graph::TransitionMatrix& transition,
                       const BinaryMatrix& initial,
                       const AlphaSchedule& alpha) {
  CheckShapes(transition, initial, alpha);
  const Matrix y = initial.cast<double>();
  if (const SparseMatrix* w = transition.symmetric_factor()) {
    return ClampUnit(SolveSymmetric(*w, y, alpha.values()));
  }
  return ClampUnit(
      SolveGeneral(transition.probabilities(), y, alpha.values()));
}

BinaryMatrix Harden(const Matrix& soft, double threshold) {
  return (soft.array() > threshold).cast<std::uint8_t>();
}

Matrix AssembleFTilde(const Matrix& soft, Index labeled, double threshold) {
  if (labeled < 0 || labeled > soft.rows()) {
    throw InvalidInputError("labeled count out of range");
  }
  Matrix out = soft;
  out.topRows(labeled) =
      Harden(soft.topRows(labeled), threshold).cast<double>();
  return out;
}

}  // namespace nmlsdr::propagation
