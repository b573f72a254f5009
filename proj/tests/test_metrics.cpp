#include <gtest/gtest.h>

#include <random>

#include "nmlsdr/error.hpp"
#include "nmlsdr/metrics.hpp"
#include "support/oracles.hpp"

namespace nmlsdr::metrics {
namespace {

BinaryMatrix Rows(Index rows, Index cols, std::initializer_list<int> values) {
  BinaryMatrix m(rows, cols);
  auto it = values.begin();
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = static_cast<std::uint8_t>(*it++);
  }
  return m;
}

Matrix Scores(Index rows, Index cols, std::initializer_list<double> values) {
  Matrix m(rows, cols);
  auto it = values.begin();
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = *it++;
  }
  return m;
}

TEST(HammingLossPrime, Examples) {
  const BinaryMatrix y = Rows(2, 3, {1, 0, 1, 0, 1, 0});
  EXPECT_EQ(HammingLossPrime(y, y), 1.0);
  const BinaryMatrix flipped = (1 - y.array()).matrix();
  EXPECT_EQ(HammingLossPrime(y, flipped), 0.0);
  EXPECT_EQ(HammingLossPrime(Rows(1, 4, {1, 0, 0, 1}), Rows(1, 4, {1, 1, 0, 1})), 0.75);
  EXPECT_THROW(HammingLossPrime(y, BinaryMatrix::Zero(2, 2)), InvalidInputError);
}

TEST(MacroF1, Examples) {
  const BinaryMatrix y = Rows(3, 2, {1, 0, 0, 1, 1, 1});
  EXPECT_EQ(MacroF1(y, y), 1.0);
  EXPECT_EQ(MacroF1(y, BinaryMatrix::Zero(3, 2)), 0.0);
  // Class 0 perfect; class 1 has truth {1, 2} and predicts only {1}.
  const BinaryMatrix pred = Rows(3, 2, {1, 0, 0, 1, 1, 0});
  EXPECT_DOUBLE_EQ(MacroF1(y, pred), 5.0 / 6.0);
  // A class absent from truth and prediction contributes 0.
  EXPECT_DOUBLE_EQ(MacroF1(Rows(1, 2, {1, 0}), Rows(1, 2, {1, 0})), 0.5);
}

TEST(MicroF1, Examples) {
  const BinaryMatrix y = Rows(2, 2, {1, 0, 0, 1});
  EXPECT_EQ(MicroF1(y, y), 1.0);
  EXPECT_EQ(MicroF1(y, Rows(2, 2, {0, 1, 1, 0})), 0.0);
  // TP = 3, FP = 1, FN = 2.
  const BinaryMatrix truth = Rows(1, 6, {1, 1, 1, 1, 1, 0});
  const BinaryMatrix pred = Rows(1, 6, {1, 1, 1, 0, 0, 1});
  EXPECT_DOUBLE_EQ(MicroF1(truth, pred), 2.0 / 3.0);
}

TEST(RankingLossPrime, Examples) {
  const BinaryMatrix y = Rows(1, 3, {1, 0, 0});
  EXPECT_EQ(RankingLossPrime(y, Scores(1, 3, {0.9, 0.2, 0.1})), 1.0);
  EXPECT_EQ(RankingLossPrime(y, Scores(1, 3, {0.0, 0.2, 0.1})), 0.0);
  EXPECT_EQ(RankingLossPrime(y, Scores(1, 3, {0.4, 0.9, 0.1})), 0.5);
  // A tie counts half a violation.
  EXPECT_EQ(RankingLossPrime(Rows(1, 2, {1, 0}), Scores(1, 2, {0.3, 0.3})), 0.5);
}

TEST(RankingLossPrime, SkipsDegenerateRowsAndThrowsWhenNoneCount) {
  const BinaryMatrix y = Rows(2, 2, {1, 1, 1, 0});
  EXPECT_EQ(RankingLossPrime(y, Scores(2, 2, {0.1, 0.9, 0.9, 0.1})), 1.0);
  EXPECT_THROW(RankingLossPrime(Rows(1, 2, {1, 1}), Scores(1, 2, {0.1, 0.2})),
               UndefinedMetricError);
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(AveragePrecision(Rows(1, 3, {1, 0, 1}), Scores(1, 3, {0.9, 0.1, 0.8})), 1.0);
  EXPECT_EQ(AveragePrecision(Rows(1, 4, {0, 0, 0, 1}), Scores(1, 4, {0.9, 0.8, 0.7, 0.1})),
            0.25);
  EXPECT_DOUBLE_EQ(AveragePrecision(Rows(1, 3, {1, 1, 0}), Scores(1, 3, {0.9, 0.1, 0.5})),
                   5.0 / 6.0);
}

TEST(OneErrorPrime, Examples) {
  const BinaryMatrix y = Rows(2, 3, {1, 0, 0, 0, 1, 0});
  EXPECT_EQ(OneErrorPrime(y, Scores(2, 3, {0.9, 0.1, 0.0, 0.1, 0.8, 0.2})), 1.0);
  EXPECT_EQ(OneErrorPrime(y, Scores(2, 3, {0.1, 0.9, 0.0, 0.9, 0.1, 0.2})), 0.0);
  EXPECT_EQ(OneErrorPrime(y, Scores(2, 3, {0.9, 0.1, 0.0, 0.9, 0.1, 0.2})), 0.5);
  // Argmax ties go to the smaller class index.
  EXPECT_EQ(OneErrorPrime(Rows(1, 2, {1, 0}), Scores(1, 2, {0.5, 0.5})), 1.0);
  EXPECT_EQ(OneErrorPrime(Rows(1, 2, {0, 1}), Scores(1, 2, {0.5, 0.5})), 0.0);
}

TEST(CoveragePrime, Examples) {
  const BinaryMatrix single = Rows(2, 3, {1, 0, 0, 0, 0, 1});
  EXPECT_EQ(CoveragePrime(single, Scores(2, 3, {0.9, 0.1, 0.0, 0.0, 0.1, 0.9})), 1.0);
  EXPECT_EQ(CoveragePrime(single, Scores(2, 3, {0.0, 0.5, 0.9, 0.9, 0.5, 0.0})), 0.0);
  // Relevant labels at ranks 1 and 3 of 4.
  const BinaryMatrix y = Rows(2, 4, {1, 0, 1, 0, 1, 0, 1, 0});
  const Matrix s = Scores(2, 4, {0.9, 0.8, 0.7, 0.1, 0.9, 0.8, 0.7, 0.1});
  EXPECT_DOUBLE_EQ(CoveragePrime(y, s), 1.0 / 3.0);
  EXPECT_THROW(CoveragePrime(Rows(1, 1, {1}), Scores(1, 1, {0.5})), UndefinedMetricError);
}

TEST(RankRow, DescendingWithIndexTies) {
  const auto rank = RankRow(Vector(Eigen::Vector4d(0.5, 0.9, 0.5, 0.1)));
  EXPECT_EQ(rank, (std::vector<Index>{2, 1, 3, 4}));
}

TEST(Metrics, AgreeWithBruteForceOracles) {
  std::mt19937_64 gen(1);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = oracle::UniformInt(gen, 1, 20);
    const Index c = oracle::UniformInt(gen, 2, 6);
    const BinaryMatrix y = oracle::RandomBinary(gen, n, c);
    Matrix s(n, c);
    // Coarse scores so ties are frequent.
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < c; ++j) s(i, j) = oracle::UniformInt(gen, 0, 4) / 4.0;
    }
    const auto [rl_sum, rl_n] = oracle::BruteRankingLoss(y, s);
    const auto [ap_sum, ap_n] = oracle::BruteAveragePrecision(y, s);
    const auto [cov_sum, cov_n] = oracle::BruteCoverage(y, s);
    const auto [oe_sum, oe_n] = oracle::BruteOneError(y, s);
    if (rl_n > 0) {
      EXPECT_EQ(RankingLossPrime(y, s), 1.0 - rl_sum / rl_n);
      EXPECT_EQ(AveragePrecision(y, s), ap_sum / ap_n);
      ++checked;
    } else {
      EXPECT_THROW(RankingLossPrime(y, s), UndefinedMetricError);
      EXPECT_THROW(AveragePrecision(y, s), UndefinedMetricError);
    }
    if (cov_n > 0) {
      EXPECT_EQ(CoveragePrime(y, s),
                1.0 - (cov_sum / cov_n) / static_cast<double>(c - 1));
      EXPECT_EQ(OneErrorPrime(y, s), oe_sum / oe_n);
    }
  }
  EXPECT_GT(checked, 200);
}

TEST(Metrics, PermutationAndMonotoneInvariance) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 15;
    const BinaryMatrix y = oracle::RandomBinary(gen, n, 4);
    const BinaryMatrix pred = oracle::RandomBinary(gen, n, 4);
    const Matrix s = oracle::Gaussian(gen, n, 4).cwiseAbs();
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + n, gen);
    const BinaryMatrix yp = perm * y;
    const BinaryMatrix pp = perm * pred;
    const Matrix sp = perm * s;
    const MetricsReport a = EvaluateAll(y, pred, s);
    const MetricsReport b = EvaluateAll(yp, pp, sp);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(a.Get(i), b.Get(i), 1e-12);
    const Matrix monotone = (s.array().exp() * 3.0 + 1.0).matrix();
    const MetricsReport c = EvaluateAll(y, pred, monotone);
    EXPECT_EQ(c.rl_prime, a.rl_prime);
    EXPECT_EQ(c.ap, a.ap);
    EXPECT_EQ(c.oe_prime, a.oe_prime);
    EXPECT_EQ(c.cov_prime, a.cov_prime);
    for (std::size_t i = 0; i < 7; ++i) {
      EXPECT_GE(a.Get(i), 0.0);
      EXPECT_LE(a.Get(i), 1.0);
    }
  }
}

TEST(Metrics, SingleLabelProperties) {
  std::mt19937_64 gen(3);
  const Index n = 40;
  BinaryMatrix y = BinaryMatrix::Zero(n, 5);
  Matrix s = oracle::Gaussian(gen, n, 5);
  Index correct = 0;
  for (Index i = 0; i < n; ++i) {
    y(i, oracle::UniformInt(gen, 0, 4)) = 1;
    Index top = 0;
    s.row(i).maxCoeff(&top);
    correct += y(i, top);
  }
  EXPECT_DOUBLE_EQ(OneErrorPrime(y, s), static_cast<double>(correct) / n);
  const Matrix perfect = y.cast<double>();
  EXPECT_EQ(CoveragePrime(y, perfect), 1.0);
}

TEST(EvaluateAll, PerfectAndRandom) {
  const BinaryMatrix y = Rows(3, 3, {1, 0, 1, 0, 1, 0, 1, 1, 0});
  const MetricsReport perfect = EvaluateAll(y, y, y.cast<double>());
  for (std::size_t i = 0; i < 7; ++i) {
    if (i != MetricIndex("cov_prime")) EXPECT_EQ(perfect.Get(i), 1.0);
  }
  // Two rows reach depth 2 of 3 labels, one row depth 1.
  EXPECT_DOUBLE_EQ(perfect.cov_prime, 1.0 - (0.5 + 0.5 + 0.0) / 3.0);
  std::mt19937_64 gen(4);
  const BinaryMatrix big = oracle::RandomBinary(gen, 500, 5);
  const Matrix s = oracle::Gaussian(gen, 500, 5);
  const MetricsReport r = EvaluateAll(big, (s.array() > 0.5).cast<std::uint8_t>(), s);
  EXPECT_GT(r.ap, 0.0);
  EXPECT_LT(r.ap, 1.0);
}

TEST(MetricsReport, NamesJsonAndCsv) {
  MetricsReport r;
  for (std::size_t i = 0; i < 7; ++i) r.Set(i, 0.125 * static_cast<double>(i + 1));
  EXPECT_EQ(r.Get("ap"), 0.375);
  EXPECT_EQ(r.Get("mif1"), 0.875);
  EXPECT_EQ(MetricIndex("cov_prime"), 4u);
  EXPECT_THROW(MetricIndex("auc"), InvalidInputError);
  EXPECT_EQ(ToJson(r).at("hl_prime"), 0.125);
  EXPECT_EQ(CsvHeader(), "hl_prime,rl_prime,ap,oe_prime,cov_prime,ma_f1,mi_f1");
  EXPECT_EQ(CsvValues(r), "0.125,0.25,0.375,0.5,0.625,0.75,0.875");
}

}  // namespace
}  // namespace nmlsdr::metrics
