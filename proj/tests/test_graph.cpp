#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nmlsdr/error.hpp"
#include "nmlsdr/graph.hpp"
#include "nmlsdr/propagation.hpp"
#include "support/oracles.hpp"

namespace nmlsdr::graph {
namespace {

Matrix Column(std::initializer_list<double> values) {
  Matrix m(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

TEST(RbfAdjacency, IdenticalPointsGiveUnitWeight) {
  const Matrix x = Column({2.0, 2.0});
  const Matrix w = RbfAdjacency(x, 1.0).Dense();
  EXPECT_DOUBLE_EQ(w(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(w(0, 0), 0.0);
}

TEST(RbfAdjacency, UnitDistanceGivesExpMinusOne) {
  const Matrix w = RbfAdjacency(Column({0.0, 1.0}), 1.0).Dense();
  EXPECT_NEAR(w(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(w(0, 1), 0.36788, 1e-5);
}

TEST(RbfAdjacency, MatchesPairwiseOracle) {
  std::mt19937_64 gen(11);
  const Matrix x = oracle::Gaussian(gen, 5, 3);
  const double sigma = 1.7;
  const Matrix w = RbfAdjacency(x, sigma).Dense();
  for (Index i = 0; i < 5; ++i) {
    for (Index j = 0; j < 5; ++j) {
      const double expected =
          i == j ? 0.0 : std::exp(-oracle::SquaredDistance(x, i, j) / (sigma * sigma));
      EXPECT_NEAR(w(i, j), expected, 1e-14);
      EXPECT_EQ(w(i, j), w(j, i));
      if (i != j) {
        EXPECT_GT(w(i, j), 0.0);
        EXPECT_LE(w(i, j), 1.0);
      }
    }
  }
}

TEST(RbfAdjacency, RejectsBadInput) {
  Matrix x = Column({0.0, 1.0});
  EXPECT_THROW(RbfAdjacency(x, 0.0), InvalidInputError);
  EXPECT_THROW(RbfAdjacency(Column({1.0}), 1.0), InvalidInputError);
  x(1, 0) = std::nan("");
  EXPECT_THROW(RbfAdjacency(x, 1.0), InvalidInputError);
}

TEST(RbfAdjacency, EquivariantUnderReordering) {
  std::mt19937_64 gen(5);
  const Matrix x = oracle::Gaussian(gen, 8, 2);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(8);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 8, gen);
  const Matrix w = RbfAdjacency(x, 1.3).Dense();
  const Matrix wp = RbfAdjacency(perm * x, 1.3).Dense();
  EXPECT_LT((wp - perm * w * perm.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(KnnAdjacency, CollinearPoints) {
  const Matrix w = KnnAdjacency(Column({0.0, 1.0, 3.0}), 1).Dense();
  Matrix expected(3, 3);
  expected << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  EXPECT_EQ(w, expected);
}

TEST(KnnAdjacency, FullNeighborhoodIsComplete) {
  std::mt19937_64 gen(3);
  const Matrix x = oracle::Gaussian(gen, 6, 2);
  const Matrix w = KnnAdjacency(x, 5).Dense();
  EXPECT_EQ(w, Matrix::Ones(6, 6) - Matrix::Identity(6, 6));
}

TEST(KnnAdjacency, MatchesBruteForceOracle) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::Gaussian(gen, 20, 3);
    const Matrix w = KnnAdjacency(x, 5).Dense();
    EXPECT_EQ(w, oracle::BruteKnnAdjacency(x, 5));
    for (Index i = 0; i < 20; ++i) {
      EXPECT_GE(w.row(i).sum(), 5.0);
      EXPECT_LE(w.row(i).sum(), 19.0);
    }
  }
}

TEST(KnnAdjacency, TiesBrokenBySmallerIndex) {
  // Point 0 is equidistant from 1 and 2; with k=1 it must pick 1.
  const Matrix x = Column({0.0, -1.0, 1.0, 10.0});
  const auto nn = NearestNeighbors(x, x, 1, true);
  EXPECT_EQ(nn[0], std::vector<Index>{1});
  EXPECT_EQ(KnnAdjacency(x, 1).Dense(), oracle::BruteKnnAdjacency(x, 1));
}

TEST(KnnAdjacency, ManyExactTiesOnIntegerData) {
  std::mt19937_64 gen(23);
  Matrix x(60, 6);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = oracle::UniformInt(gen, 0, 2);
  }
  EXPECT_EQ(KnnAdjacency(x, 7).Dense(), oracle::BruteKnnAdjacency(x, 7));
}

TEST(KnnAdjacency, BinarySymmetricZeroDiagonal) {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = oracle::UniformInt(gen, 3, 40);
    const int k = oracle::UniformInt(gen, 1, static_cast<int>(n) - 1);
    const Matrix w = KnnAdjacency(oracle::Gaussian(gen, n, 4), k).Dense();
    EXPECT_EQ(w, w.transpose());
    EXPECT_EQ(w.diagonal(), Vector::Zero(n));
    EXPECT_TRUE((w.array() == 0.0 || w.array() == 1.0).all());
  }
}

TEST(KnnAdjacency, RejectsBadK) {
  const Matrix x = Column({0.0, 1.0, 2.0});
  EXPECT_THROW(KnnAdjacency(x, 3), InvalidInputError);
  EXPECT_THROW(KnnAdjacency(x, 0), InvalidInputError);
}

TEST(NearestNeighbors, QueriesAgainstReference) {
  std::mt19937_64 gen(31);
  const Matrix ref = oracle::Gaussian(gen, 30, 3);
  const Matrix qry = oracle::Gaussian(gen, 10, 3);
  const auto nn = NearestNeighbors(ref, qry, 4, false);
  for (Index q = 0; q < qry.rows(); ++q) {
    EXPECT_EQ(nn[static_cast<std::size_t>(q)],
              oracle::BruteQueryNeighbors(ref, qry.row(q).transpose(), 4));
  }
}

TEST(SymmetricNormalize, UnitDegreesUnchanged) {
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  EXPECT_EQ(Matrix(SymmetricNormalize(AdjacencyMatrix::FromDense(w))), w);
}

TEST(SymmetricNormalize, ScalesByDegrees) {
  Matrix w(2, 2);
  w << 0, 2, 2, 0;
  Matrix expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(Matrix(SymmetricNormalize(AdjacencyMatrix::FromDense(w))), expected);
}

TEST(SymmetricNormalize, SpectralRadiusAtMostOne) {
  std::mt19937_64 gen(37);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = oracle::UniformInt(gen, 2, 15);
    Matrix w = oracle::Gaussian(gen, n, n).cwiseAbs();
    w = (w + w.transpose()).eval();
    w.diagonal().setZero();
    const Matrix wt = Matrix(SymmetricNormalize(AdjacencyMatrix::FromDense(w)));
    EXPECT_EQ(wt, wt.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(wt);
    EXPECT_LE(eig.eigenvalues().cwiseAbs().maxCoeff(), 1.0 + 1e-12);
  }
}

TEST(SymmetricNormalize, IsolatedNodeIsDegenerate) {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = w(1, 0) = 1.0;
  EXPECT_THROW(SymmetricNormalize(AdjacencyMatrix::FromDense(w)),
               DegenerateGraphError);
}

TEST(AdjacencyMatrix, RejectsInvalidMatrices) {
  Matrix w(2, 2);
  w << 0, 1, 2, 0;
  EXPECT_THROW(AdjacencyMatrix::FromDense(w), InvalidInputError);
  w << 0, -1, -1, 0;
  EXPECT_THROW(AdjacencyMatrix::FromDense(w), InvalidInputError);
  w << 1, 1, 1, 0;
  EXPECT_THROW(AdjacencyMatrix::FromDense(w), InvalidInputError);
}

TEST(RowStochastic, AlreadyStochastic) {
  Matrix wt(2, 2);
  wt << 0, 1, 1, 0;
  EXPECT_EQ(RowStochastic(wt.sparseView()).Dense(), wt);
}

TEST(RowStochastic, TriangleGivesHalves) {
  Matrix wt = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
  const Matrix t = RowStochastic(wt.sparseView()).Dense();
  EXPECT_EQ(t, 0.5 * wt);
}

TEST(RowStochastic, RowsSumToOne) {
  std::mt19937_64 gen(41);
  const Matrix wt = oracle::Gaussian(gen, 12, 12).cwiseAbs();
  const Matrix t = RowStochastic(wt.sparseView()).Dense();
  for (Index i = 0; i < 12; ++i) EXPECT_NEAR(t.row(i).sum(), 1.0, 1e-12);
}

TEST(RowStochastic, ZeroRowIsDegenerate) {
  Matrix wt = Matrix::Zero(2, 2);
  wt(0, 1) = 1.0;
  EXPECT_THROW(RowStochastic(wt.sparseView()), DegenerateGraphError);
}

TEST(RowStochastic, KeepsSymmetricFactorOnlyForSymmetricInput) {
  Matrix sym(2, 2);
  sym << 0, 1, 1, 0;
  EXPECT_NE(RowStochastic(sym.sparseView()).symmetric_factor(), nullptr);
  Matrix asym(2, 2);
  asym << 0, 1, 2, 0;
  EXPECT_EQ(RowStochastic(asym.sparseView()).symmetric_factor(), nullptr);
  EXPECT_EQ(TransitionMatrix::FromDense(sym).symmetric_factor(), nullptr);
}

TEST(TransitionMatrix, RejectsNonStochastic) {
  Matrix t(2, 2);
  t << 0.5, 0.4, 0, 1;
  EXPECT_THROW(TransitionMatrix::FromDense(t), InvalidInputError);
}

TEST(KnnTransition, MatchesDenseOracle) {
  std::mt19937_64 gen(43);
  const Matrix x = oracle::Gaussian(gen, 25, 3);
  const Matrix t = KnnTransition(x, 4).Dense();
  EXPECT_LT((t - oracle::DenseTransition(oracle::BruteKnnAdjacency(x, 4)))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(TransitionSpectrum, DampedSpectralRadiusBelowOne) {
  std::mt19937_64 gen(47);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = oracle::UniformInt(gen, 5, 50);
    const Matrix x = oracle::Gaussian(gen, n, 3);
    const Matrix t = (trial % 2 ? RbfTransition(x, 1.0)
                                : KnnTransition(x, oracle::UniformInt(gen, 1, 4)))
                         .Dense();
    Eigen::EigenSolver<Matrix> full(t);
    EXPECT_NEAR(full.eigenvalues().cwiseAbs().maxCoeff(), 1.0, 1e-10);
    Vector alpha(n);
    for (Index i = 0; i < n; ++i) alpha(i) = oracle::Uniform(gen, 0.0, 0.999);
    Eigen::EigenSolver<Matrix> damped(alpha.asDiagonal() * t);
    EXPECT_LT(damped.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  }
}

}  // namespace
}  // namespace nmlsdr::graph
