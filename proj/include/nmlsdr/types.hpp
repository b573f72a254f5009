#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>

namespace nmlsdr {

using Index = Eigen::Index;

// n x D feature matrix, one sample per row.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Row-major copy used where per-sample rows are scanned repeatedly.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// n x C label matrix with entries in {0, 1}.
using BinaryMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline bool IsBinary(const BinaryMatrix& y) {
  return (y.array() <= 1).all();
}

}  // namespace nmlsdr
