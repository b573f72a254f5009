#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "nmlsdr/types.hpp"

namespace nmlsdr::data {

enum class Split { kUnspecified, kTrain, kTest };

const char* SplitName(Split split);

struct MultiLabelDataset {
  Matrix features;             // n x D
  BinaryMatrix labels;         // n x C
  std::vector<bool> labeled;   // length n; all true unless masked
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;
  Split split = Split::kUnspecified;

  Index size() const { return features.rows(); }
  Index num_features() const { return features.cols(); }
  Index num_labels() const { return labels.cols(); }

  // Throws InvalidInputError on inconsistent shapes or non-binary labels.
  void Validate() const;
};

struct NoiseSpec {
  double flip_fraction = 0.1;
  double labeled_fraction = 0.5;
  std::uint64_t seed = 0;
};

/// Noisy, partially labeled training labels in canonical order.
///
/// Row i of `initial` is the observed label row of original sample order[i].
/// Rows [0, labeled) carry their labels; rows [labeled, n) are all zero.
struct PartialLabels {
  BinaryMatrix initial;
  Index labeled = 0;
  std::vector<Index> order;
};

struct SyntheticOptions {
  Index samples_per_class = 2000;
  Index test_samples = 2000;
};

struct SyntheticSplit {
  MultiLabelDataset train;
  MultiLabelDataset test;
};

/// Toy multi-label problem: 4 classes, 320 integer-valued features.
///
/// Block c (features 20c..20c+19) belongs to class c; members of c get 2 of
/// its 20 features drawn uniformly from 1..10. Cross memberships: 30% of
/// class 0 also join 1 and vice versa, 20% for 1<->2, 25% for 2<->3; a sample
/// activates the block of every class it owns. Each of the 12 distractor
/// blocks independently picks half of all samples and gives them 4 of its 20
/// features from 1..10. Everything else is 0. After a random permutation the
/// last `test_samples` rows form the test split.
///
/// Draw order on stream "synthetic": cross memberships (pair by pair, first
/// the lower class then the upper), class-block features (sample by sample,
/// owned classes ascending), distractor blocks (block by block, selected
/// samples ascending), then the split permutation.
SyntheticSplit GenerateSynthetic(std::uint64_t seed,
                                 const SyntheticOptions& options = {});

// Inverts exactly round(p * n * C) distinct cells drawn on stream "flip".
// The same seed and shape always selects the same cells.
BinaryMatrix FlipLabels(const BinaryMatrix& labels, double fraction,
                        std::uint64_t seed);

// Marks round((1 - f) * n) uniformly drawn rows (stream "mask") unlabeled and
// reorders labeled-first, preserving the relative order inside each group.
PartialLabels MaskLabels(const BinaryMatrix& labels, double labeled_fraction,
                         std::uint64_t seed);

Matrix ReorderRows(const Matrix& m, const std::vector<Index>& order);
BinaryMatrix ReorderRows(const BinaryMatrix& m, const std::vector<Index>& order);

struct Standardized {
  Matrix train;
  Matrix test;
  Vector mean;
  Vector scale;  // sample standard deviation (n - 1); 1 where the std < 1e-12
};

// Statistics from `train` only, applied to both.
Standardized Standardize(const Matrix& train, const Matrix& test);

enum class FileFormat { kCsv, kArff };
enum class LabelPosition { kHead, kTail };

MultiLabelDataset LoadDataset(const std::filesystem::path& path,
                              FileFormat format, Index label_count,
                              LabelPosition labels_at);

MultiLabelDataset ParseCsv(const std::string& text, Index label_count,
                           LabelPosition labels_at);
MultiLabelDataset ParseArff(const std::string& text, Index label_count,
                            LabelPosition labels_at);

/// On-disk bundle: features.csv, labels.csv (header rows with names) and
/// manifest.json {format_version, n, D, C, l, seed, split, provenance}.
void WriteBundle(const std::filesystem::path& dir,
                 const MultiLabelDataset& dataset,
                 const nlohmann::json& provenance, std::uint64_t seed);
MultiLabelDataset ReadBundle(const std::filesystem::path& dir);

// Shortest round-trip decimal form of a double.
std::string FormatDouble(double value);

}  // namespace nmlsdr::data
