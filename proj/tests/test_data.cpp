#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "nmlsdr/data.hpp"
#include "nmlsdr/error.hpp"
#include "support/oracles.hpp"

namespace nmlsdr::data {
namespace {

Matrix Stack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

BinaryMatrix Stack(const BinaryMatrix& a, const BinaryMatrix& b) {
  BinaryMatrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

class SyntheticTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { split_ = new SyntheticSplit(GenerateSynthetic(11)); }
  static void TearDownTestSuite() { delete split_; }
  static SyntheticSplit* split_;
};
SyntheticSplit* SyntheticTest::split_ = nullptr;

TEST_F(SyntheticTest, ShapesAndSplit) {
  EXPECT_EQ(split_->train.size(), 6000);
  EXPECT_EQ(split_->test.size(), 2000);
  EXPECT_EQ(split_->train.num_features(), 320);
  EXPECT_EQ(split_->train.num_labels(), 4);
  EXPECT_EQ(split_->train.split, Split::kTrain);
  EXPECT_EQ(split_->test.split, Split::kTest);
  split_->train.Validate();
  split_->test.Validate();
}

TEST_F(SyntheticTest, LabelCardinalityAndCrossCounts) {
  const BinaryMatrix y = Stack(split_->train.labels, split_->test.labels);
  EXPECT_DOUBLE_EQ(y.cast<double>().sum() / static_cast<double>(y.rows()), 1.375);
  // Pairwise co-occurrence counts: each direction contributes round(f * 2000).
  const Eigen::Matrix4d co = y.cast<double>().transpose() * y.cast<double>();
  EXPECT_EQ(co(0, 1), 1200.0);
  EXPECT_EQ(co(1, 2), 800.0);
  EXPECT_EQ(co(2, 3), 1000.0);
  // A class-1 sample may join both 0 and 2; nothing joins 0 and 3 together.
  EXPECT_EQ(co(0, 3), 0.0);
}

TEST_F(SyntheticTest, BlockStructure) {
  const Matrix x = Stack(split_->train.features, split_->test.features);
  const BinaryMatrix y = Stack(split_->train.labels, split_->test.labels);
  EXPECT_EQ(x.minCoeff(), 0.0);
  EXPECT_EQ(x.maxCoeff(), 10.0);
  EXPECT_TRUE((x.array() == x.array().round()).all());
  std::vector<Index> distractor_hits(12, 0);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index block = 0; block < 16; ++block) {
      const Index nonzero = (x.row(i).segment(block * 20, 20).array() != 0.0).count();
      if (block < 4) {
        EXPECT_EQ(nonzero, y(i, block) ? 2 : 0);
      } else if (nonzero > 0) {
        EXPECT_EQ(nonzero, 4);
        ++distractor_hits[static_cast<std::size_t>(block - 4)];
      }
    }
  }
  for (Index hits : distractor_hits) EXPECT_EQ(hits, 4000);
}

TEST_F(SyntheticTest, DeterministicPerSeed) {
  const SyntheticSplit again = GenerateSynthetic(11);
  EXPECT_EQ(again.train.features, split_->train.features);
  EXPECT_EQ(again.test.labels, split_->test.labels);
  const SyntheticSplit other = GenerateSynthetic(12, {200, 100});
  EXPECT_EQ(other.train.size(), 700);
  EXPECT_NE(other.train.features, split_->train.features.topRows(700));
}

TEST(Synthetic, RejectsBadSizes) {
  EXPECT_THROW(GenerateSynthetic(1, {0, 0}), InvalidInputError);
  EXPECT_THROW(GenerateSynthetic(1, {10, 40}), InvalidInputError);
}

TEST(FlipLabels, FlipsExactCountAndIsInvolution) {
  std::mt19937_64 gen(1);
  const BinaryMatrix y = oracle::RandomBinary(gen, 97, 5);
  const BinaryMatrix flipped = FlipLabels(y, 0.1, 42);
  EXPECT_EQ((flipped.array() != y.array()).count(), 49);  // round(48.5)
  EXPECT_EQ(FlipLabels(flipped, 0.1, 42), y);
  EXPECT_EQ(FlipLabels(y, 0.1, 42), flipped);
  EXPECT_NE(FlipLabels(y, 0.1, 43), flipped);
  EXPECT_EQ(FlipLabels(y, 0.0, 42), y);
  EXPECT_THROW(FlipLabels(y, 1.0, 42), InvalidInputError);
}

TEST(MaskLabels, HalfOfSixThousand) {
  std::mt19937_64 gen(2);
  const BinaryMatrix y = oracle::RandomBinary(gen, 6000, 4);
  const PartialLabels p = MaskLabels(y, 0.5, 7);
  EXPECT_EQ(p.labeled, 3000);
  ASSERT_EQ(p.order.size(), 6000u);
  std::vector<Index> sorted = p.order;
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < 6000; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
  EXPECT_TRUE(std::is_sorted(p.order.begin(), p.order.begin() + 3000));
  EXPECT_TRUE(std::is_sorted(p.order.begin() + 3000, p.order.end()));
  for (Index i = 0; i < 3000; ++i) {
    EXPECT_EQ(p.initial.row(i), y.row(p.order[static_cast<std::size_t>(i)]));
  }
  EXPECT_EQ(p.initial.bottomRows(3000), BinaryMatrix::Zero(3000, 4));
}

TEST(MaskLabels, FullyLabeledKeepsOrder) {
  std::mt19937_64 gen(3);
  const BinaryMatrix y = oracle::RandomBinary(gen, 20, 3);
  const PartialLabels p = MaskLabels(y, 1.0, 1);
  EXPECT_EQ(p.labeled, 20);
  EXPECT_EQ(p.initial, y);
  for (Index i = 0; i < 20; ++i) EXPECT_EQ(p.order[static_cast<std::size_t>(i)], i);
  EXPECT_EQ(MaskLabels(y, 0.0, 1).labeled, 0);
  EXPECT_THROW(MaskLabels(y, 1.5, 1), InvalidInputError);
}

TEST(Standardize, TrainStatisticsOnly) {
  std::mt19937_64 gen(4);
  Matrix train = oracle::Gaussian(gen, 50, 4) * 3.0;
  train.col(2).setConstant(7.0);
  const Matrix test = oracle::Gaussian(gen, 10, 4) * 100.0;
  const Standardized s = Standardize(train, test);
  EXPECT_LT(s.train.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  for (Index f : {0, 1, 3}) {
    const double var = s.train.col(f).squaredNorm() / 49.0;
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
  EXPECT_EQ(s.scale(2), 1.0);
  EXPECT_EQ(s.train.col(2), Vector::Zero(50));
  const Matrix expected_test =
      (test.rowwise() - s.mean.transpose()).array().rowwise() /
      s.scale.transpose().array();
  EXPECT_LT((s.test - expected_test).cwiseAbs().maxCoeff(), 1e-12);
  // Test data never influences the statistics.
  EXPECT_EQ(Standardize(train, test * 2.0).mean, s.mean);
  EXPECT_THROW(Standardize(train, Matrix::Zero(1, 3)), InvalidInputError);
}

constexpr const char* kCsv =
    "a,b,l1,l2\n"
    "1.5,2,0,1\n"
    "\n"
    "-3,4e1,1,1\n";

constexpr const char* kArff =
    "% comment\n"
    "@relation toy\n"
    "@attribute a numeric\n"
    "@attribute 'b' real\n"
    "@attribute l1 {0,1}\n"
    "@attribute l2 {0, 1}\n"
    "@data\n"
    "1.5,2,0,1\n"
    "-3,40,1,1\n";

TEST(Parse, CsvAndArffAgree) {
  const MultiLabelDataset csv = ParseCsv(kCsv, 2, LabelPosition::kTail);
  const MultiLabelDataset arff = ParseArff(kArff, 2, LabelPosition::kTail);
  Matrix x(2, 2);
  x << 1.5, 2, -3, 40;
  BinaryMatrix y(2, 2);
  y << 0, 1, 1, 1;
  EXPECT_EQ(csv.features, x);
  EXPECT_EQ(csv.labels, y);
  EXPECT_EQ(arff.features, x);
  EXPECT_EQ(arff.labels, y);
  EXPECT_EQ(csv.label_names, (std::vector<std::string>{"l1", "l2"}));
  EXPECT_EQ(arff.feature_names, (std::vector<std::string>{"a", "b"}));
}

TEST(Parse, LabelsAtHead) {
  const MultiLabelDataset ds = ParseCsv("1,0,5,6\n0,0,7,8\n", 2, LabelPosition::kHead);
  EXPECT_EQ(ds.features(1, 1), 8.0);
  EXPECT_EQ(ds.labels(0, 0), 1);
  EXPECT_TRUE(ds.feature_names.empty());
}

TEST(Parse, NonBinaryLabelReportsLine) {
  try {
    ParseCsv("a,l\n1,0\n2,2\n", 1, LabelPosition::kTail);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    ParseCsv("1,0\n2,x\n", 1, LabelPosition::kTail);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(ParseCsv("1,0\n2\n", 1, LabelPosition::kTail), ParseError);
  EXPECT_THROW(ParseArff("@attribute a string\n@data\n", 0, LabelPosition::kTail),
               ParseError);
  EXPECT_THROW(ParseArff("@attribute a numeric\n@attribute l numeric\n@data\n1,0\n", 1,
                         LabelPosition::kTail),
               ParseError);
}

TEST(Bundle, RoundTripIsExact) {
  const SyntheticSplit split = GenerateSynthetic(5, {30, 20});
  MultiLabelDataset ds = split.train;
  ds.features(0, 0) = 0.1 + 0.2;
  const auto dir = std::filesystem::temp_directory_path() / "nmlsdr_bundle_test";
  std::filesystem::remove_all(dir);
  WriteBundle(dir, ds, {{"generator", "test"}}, 5);
  const MultiLabelDataset back = ReadBundle(dir);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.feature_names, ds.feature_names);
  EXPECT_EQ(back.label_names, ds.label_names);
  EXPECT_EQ(back.split, Split::kTrain);
  std::ifstream manifest(dir / "manifest.json");
  const auto json = nlohmann::json::parse(manifest);
  EXPECT_EQ(json.at("n"), 100);
  EXPECT_EQ(json.at("C"), 4);
  EXPECT_EQ(json.at("seed"), 5);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(ReadBundle(dir), Error);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_EQ(FormatDouble(3.0), "3");
  EXPECT_EQ(std::stod(FormatDouble(0.1 + 0.2)), 0.1 + 0.2);
}

}  // namespace
}  // namespace nmlsdr::data
