#include "nmlsdr/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include "nmlsdr/error.hpp"
#include "nmlsdr/rng.hpp"

namespace nmlsdr::data {
namespace {

constexpr Index kNumClasses = 4;
constexpr Index kBlockWidth = 20;
constexpr Index kNumBlocks = 16;
constexpr Index kFeaturesPerOwnedBlock = 2;       // 10% of 20
constexpr Index kFeaturesPerDistractorBlock = 4;  // 20% of 20
constexpr std::int64_t kMaxFeatureValue = 10;

struct CrossMembership {
  Index lower;
  Index upper;
  double fraction;
};

constexpr std::array<CrossMembership, 3> kCrossMemberships = {{
    {0, 1, 0.30},
    {1, 2, 0.20},
    {2, 3, 0.25},
}};

std::string_view Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::optional<double> ParseNumber(std::string_view s) {
  s = Trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(Trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::vector<std::pair<std::size_t, std::string_view>> Lines(
    std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t start = 0;
  std::size_t number = 1;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.emplace_back(number++, text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Column index range of the label block within `width` columns.
std::pair<Index, Index> LabelColumns(Index width, Index label_count,
                                     LabelPosition at, std::size_t line) {
  if (label_count < 1 || label_count >= width) {
    throw ParseError("label count " + std::to_string(label_count) +
                         " leaves no feature columns in a row of width " +
                         std::to_string(width),
                     line);
  }
  if (at == LabelPosition::kHead) return {0, label_count};
  return {width - label_count, width};
}

struct RowTable {
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> line_numbers;
  std::vector<std::string> header;
};

MultiLabelDataset BuildDataset(const RowTable& table, Index label_count,
                               LabelPosition at) {
  if (table.rows.empty()) throw ParseError("no data rows", 0);
  const auto width = static_cast<Index>(table.rows.front().size());
  const auto [label_begin, label_end] =
      LabelColumns(width, label_count, at, table.line_numbers.front());
  const auto n = static_cast<Index>(table.rows.size());

  MultiLabelDataset ds;
  ds.features.resize(n, width - label_count);
  ds.labels.resize(n, label_count);
  ds.labeled.assign(static_cast<std::size_t>(n), true);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const std::size_t line = table.line_numbers[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                           std::to_string(row.size()),
                       line);
    }
    Index feature = 0;
    for (Index col = 0; col < width; ++col) {
      const auto cell = row[static_cast<std::size_t>(col)];
      const auto value = ParseNumber(cell);
      if (!value || !std::isfinite(*value)) {
        throw ParseError("column " + std::to_string(col + 1) +
                             " is not a finite number: '" + std::string(cell) +
                             "'",
                         line);
      }
      if (col >= label_begin && col < label_end) {
        if (*value != 0.0 && *value != 1.0) {
          throw ParseError("label cell in column " + std::to_string(col + 1) +
                               " is not binary: '" + std::string(cell) + "'",
                           line);
        }
        ds.labels(i, col - label_begin) = static_cast<std::uint8_t>(*value);
      } else {
        ds.features(i, feature++) = *value;
      }
    }
  }
  if (!table.header.empty()) {
    for (Index col = 0; col < width; ++col) {
      const auto& name = table.header[static_cast<std::size_t>(col)];
      if (col >= label_begin && col < label_end) {
        ds.label_names.push_back(name);
      } else {
        ds.feature_names.push_back(name);
      }
    }
  }
  return ds;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string_view Unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') &&
      s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

void WriteCsv(const std::filesystem::path& path,
              const std::vector<std::string>& header, const auto& matrix) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << '\n';
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index c = 0; c < matrix.cols(); ++c) {
      if (c) out << ',';
      out << FormatDouble(static_cast<double>(matrix(i, c)));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> DefaultNames(const std::vector<std::string>& names,
                                      Index count, const char* prefix) {
  if (static_cast<Index>(names.size()) == count) return names;
  std::vector<std::string> out;
  for (Index i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

struct NumericTable {
  std::vector<std::string> header;
  Matrix values;
  std::vector<std::size_t> line_numbers;
};

NumericTable ParseNumericTable(const std::string& text) {
  NumericTable table;
  std::vector<std::vector<double>> rows;
  bool first = true;
  for (const auto& [number, raw] : Lines(text)) {
    const auto line = Trim(raw);
    if (line.empty()) continue;
    const auto fields = SplitFields(line);
    if (first) {
      first = false;
      const bool numeric = std::all_of(
          fields.begin(), fields.end(),
          [](std::string_view f) { return ParseNumber(f).has_value(); });
      if (!numeric) {
        for (auto f : fields) table.header.emplace_back(Unquote(f));
        continue;
      }
    }
    std::vector<double> row;
    for (auto f : fields) {
      const auto v = ParseNumber(f);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("not a finite number: '" + std::string(f) + "'",
                         number);
      }
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("inconsistent row width", number);
    }
    rows.push_back(std::move(row));
    table.line_numbers.push_back(number);
  }
  const auto width = rows.empty() ? table.header.size() : rows.front().size();
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < width; ++c) {
      table.values(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
    }
  }
  return table;
}

}  // namespace

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kTest:
      return "test";
    case Split::kUnspecified:
      break;
  }
  return "unspecified";
}

void MultiLabelDataset::Validate() const {
  if (labels.rows() != features.rows()) {
    throw InvalidInputError("features and labels disagree on n");
  }
  if (static_cast<Index>(labeled.size()) != features.rows()) {
    throw InvalidInputError("labeled mask has the wrong length");
  }
  if (!IsBinary(labels)) throw InvalidInputError("labels must be binary");
  if (!features.allFinite()) {
    throw InvalidInputError("features contain non-finite values");
  }
}

SyntheticSplit GenerateSynthetic(std::uint64_t seed,
                                 const SyntheticOptions& options) {
  const Index per_class = options.samples_per_class;
  const Index n = per_class * kNumClasses;
  if (per_class < 1 || options.test_samples < 0 || options.test_samples >= n) {
    throw InvalidInputError("invalid synthetic dataset size");
  }
  Rng rng(seed, "synthetic");

  BinaryMatrix labels = BinaryMatrix::Zero(n, kNumClasses);
  for (Index i = 0; i < n; ++i) labels(i, i / per_class) = 1;

  const auto per = static_cast<std::size_t>(per_class);
  for (const auto& cross : kCrossMemberships) {
    const auto count =
        static_cast<std::size_t>(std::llround(cross.fraction * per_class));
    for (const auto& [from, to] : {std::pair{cross.lower, cross.upper},
                                  std::pair{cross.upper, cross.lower}}) {
      for (std::size_t offset : rng.SampleWithoutReplacement(per, count)) {
        labels(from * per_class + static_cast<Index>(offset), to) = 1;
      }
    }
  }

  const Index dim = kNumBlocks * kBlockWidth;
  Matrix features = Matrix::Zero(n, dim);
  const auto width = static_cast<std::size_t>(kBlockWidth);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < kNumClasses; ++c) {
      if (!labels(i, c)) continue;
      for (std::size_t f : rng.SampleWithoutReplacement(
               width, static_cast<std::size_t>(kFeaturesPerOwnedBlock))) {
        features(i, c * kBlockWidth + static_cast<Index>(f)) =
            static_cast<double>(rng.UniformInt(1, kMaxFeatureValue));
      }
    }
  }
  for (Index block = kNumClasses; block < kNumBlocks; ++block) {
    auto chosen = rng.SampleWithoutReplacement(static_cast<std::size_t>(n),
                                               static_cast<std::size_t>(n / 2));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t sample : chosen) {
      for (std::size_t f : rng.SampleWithoutReplacement(
               width, static_cast<std::size_t>(kFeaturesPerDistractorBlock))) {
        features(static_cast<Index>(sample),
                 block * kBlockWidth + static_cast<Index>(f)) =
            static_cast<double>(rng.UniformInt(1, kMaxFeatureValue));
      }
    }
  }

  const auto perm = rng.Permutation(static_cast<std::size_t>(n));
  std::vector<Index> order(perm.begin(), perm.end());
  const Index n_train = n - options.test_samples;
  const std::vector<Index> train_rows(order.begin(), order.begin() + n_train);
  const std::vector<Index> test_rows(order.begin() + n_train, order.end());

  std::vector<std::string> feature_names;
  for (Index f = 0; f < dim; ++f) feature_names.push_back("x" + std::to_string(f));
  std::vector<std::string> label_names;
  for (Index c = 0; c < kNumClasses; ++c) {
    label_names.push_back("class" + std::to_string(c + 1));
  }

  SyntheticSplit split;
  for (auto [ds, rows, tag] :
       {std::tuple{&split.train, &train_rows, Split::kTrain},
        std::tuple{&split.test, &test_rows, Split::kTest}}) {
    ds->features = ReorderRows(features, *rows);
    ds->labels = ReorderRows(labels, *rows);
    ds->labeled.assign(rows->size(), true);
    ds->feature_names = feature_names;
    ds->label_names = label_names;
    ds->split = tag;
  }
  return split;
}

BinaryMatrix FlipLabels(const BinaryMatrix& labels, double fraction,
                        std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw InvalidInputError("flip fraction must lie in [0, 1)");
  }
  const auto cells = static_cast<std::size_t>(labels.size());
  const auto count = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(cells)));
  BinaryMatrix out = labels;
  Rng rng(seed, "flip");
  const auto cols = static_cast<std::size_t>(labels.cols());
  for (std::size_t cell : rng.SampleWithoutReplacement(cells, count)) {
    const auto i = static_cast<Index>(cell / cols);
    const auto c = static_cast<Index>(cell % cols);
    out(i, c) = out(i, c) ? 0 : 1;
  }
  return out;
}

PartialLabels MaskLabels(const BinaryMatrix& labels, double labeled_fraction,
                         std::uint64_t seed) {
  if (!(labeled_fraction >= 0.0 && labeled_fraction <= 1.0)) {
    throw InvalidInputError("labeled fraction must lie in [0, 1]");
  }
  const auto n = static_cast<std::size_t>(labels.rows());
  const auto unlabeled_count = static_cast<std::size_t>(
      std::llround((1.0 - labeled_fraction) * static_cast<double>(n)));
  std::vector<bool> unlabeled(n, false);
  Rng rng(seed, "mask");
  for (std::size_t i : rng.SampleWithoutReplacement(n, unlabeled_count)) {
    unlabeled[i] = true;
  }

  PartialLabels out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!unlabeled[i]) out.order.push_back(static_cast<Index>(i));
  }
  out.labeled = static_cast<Index>(out.order.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (unlabeled[i]) out.order.push_back(static_cast<Index>(i));
  }
  out.initial = ReorderRows(labels, out.order);
  out.initial.bottomRows(labels.rows() - out.labeled).setZero();
  return out;
}

Matrix ReorderRows(const Matrix& m, const std::vector<Index>& order) {
  Matrix out(static_cast<Index>(order.size()), m.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(order[i]);
  }
  return out;
}

BinaryMatrix ReorderRows(const BinaryMatrix& m,
                         const std::vector<Index>& order) {
  BinaryMatrix out(static_cast<Index>(order.size()), m.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(order[i]);
  }
  return out;
}

Standardized Standardize(const Matrix& train, const Matrix& test) {
  if (train.rows() == 0) throw InvalidInputError("training set is empty");
  if (test.cols() != train.cols()) {
    throw InvalidInputError("train and test disagree on feature count");
  }
  Standardized out;
  out.mean = train.colwise().mean().transpose();
  const Matrix centered = train.rowwise() - out.mean.transpose();
  out.scale = Vector::Ones(train.cols());
  if (train.rows() > 1) {
    const Vector std_dev =
        (centered.colwise().squaredNorm().transpose() /
         static_cast<double>(train.rows() - 1))
            .cwiseSqrt();
    for (Index f = 0; f < train.cols(); ++f) {
      if (std_dev(f) >= 1e-12) out.scale(f) = std_dev(f);
    }
  }
  const auto inv_scale = out.scale.cwiseInverse().transpose();
  out.train = centered.array().rowwise() * inv_scale.array();
  out.test = (test.rowwise() - out.mean.transpose()).array().rowwise() *
             inv_scale.array();
  return out;
}

MultiLabelDataset ParseCsv(const std::string& text, Index label_count,
                           LabelPosition labels_at) {
  RowTable table;
  bool first = true;
  for (const auto& [number, raw] : Lines(text)) {
    const auto line = Trim(raw);
    if (line.empty()) continue;
    auto fields = SplitFields(line);
    if (first) {
      first = false;
      const bool numeric = std::all_of(
          fields.begin(), fields.end(),
          [](std::string_view f) { return ParseNumber(f).has_value(); });
      if (!numeric) {
        for (auto f : fields) table.header.emplace_back(Unquote(f));
        continue;
      }
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(number);
  }
  if (!table.header.empty() && !table.rows.empty() &&
      table.header.size() != table.rows.front().size()) {
    throw ParseError("header width does not match data width",
                     table.line_numbers.front());
  }
  return BuildDataset(table, label_count, labels_at);
}

MultiLabelDataset ParseArff(const std::string& text, Index label_count,
                            LabelPosition labels_at) {
  struct Attribute {
    std::string name;
    bool binary_nominal;
    std::size_t line;
  };
  std::vector<Attribute> attributes;
  RowTable table;
  bool in_data = false;
  for (const auto& [number, raw] : Lines(text)) {
    const auto line = Trim(raw);
    if (line.empty() || line.front() == '%') continue;
    if (!in_data) {
      if (line.front() != '@') {
        throw ParseError("unexpected content before @data", number);
      }
      const auto space = line.find_first_of(" \t");
      const auto keyword = ToLower(line.substr(0, space));
      if (keyword == "@relation") continue;
      if (keyword == "@data") {
        in_data = true;
        continue;
      }
      if (keyword != "@attribute" || space == std::string_view::npos) {
        throw ParseError("unsupported ARFF declaration", number);
      }
      auto rest = Trim(line.substr(space));
      std::string_view name;
      if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
        const auto close = rest.find(rest.front(), 1);
        if (close == std::string_view::npos) {
          throw ParseError("unterminated attribute name", number);
        }
        name = rest.substr(1, close - 1);
        rest = Trim(rest.substr(close + 1));
      } else {
        const auto end = rest.find_first_of(" \t");
        if (end == std::string_view::npos) {
          throw ParseError("attribute without a type", number);
        }
        name = rest.substr(0, end);
        rest = Trim(rest.substr(end));
      }
      const auto type = ToLower(rest);
      if (type == "numeric" || type == "real" || type == "integer") {
        attributes.push_back({std::string(name), false, number});
      } else if (!type.empty() && type.front() == '{') {
        std::string compact;
        for (char c : type) {
          if (c != ' ' && c != '\t') compact.push_back(c);
        }
        if (compact != "{0,1}" && compact != "{1,0}") {
          throw ParseError("only {0,1} nominal attributes are supported",
                           number);
        }
        attributes.push_back({std::string(name), true, number});
      } else {
        throw ParseError("unsupported attribute type '" + std::string(rest) +
                             "'",
                         number);
      }
      continue;
    }
    if (line.front() == '{') {
      throw ParseError("sparse ARFF rows are not supported", number);
    }
    table.rows.push_back(SplitFields(line));
    table.line_numbers.push_back(number);
  }
  if (!in_data) throw ParseError("missing @data section", 0);
  const auto width = static_cast<Index>(attributes.size());
  if (!table.rows.empty() &&
      static_cast<Index>(table.rows.front().size()) != width) {
    throw ParseError("row width does not match the attribute count",
                     table.line_numbers.front());
  }
  const auto [label_begin, label_end] =
      LabelColumns(width, label_count, labels_at, 0);
  for (Index col = 0; col < width; ++col) {
    const auto& attr = attributes[static_cast<std::size_t>(col)];
    const bool is_label = col >= label_begin && col < label_end;
    if (is_label && !attr.binary_nominal) {
      throw ParseError("label attribute '" + attr.name + "' is not {0,1}",
                       attr.line);
    }
    table.header.push_back(attr.name);
  }
  return BuildDataset(table, label_count, labels_at);
}

MultiLabelDataset LoadDataset(const std::filesystem::path& path,
                              FileFormat format, Index label_count,
                              LabelPosition labels_at) {
  const std::string text = ReadFile(path);
  return format == FileFormat::kCsv ? ParseCsv(text, label_count, labels_at)
                                    : ParseArff(text, label_count, labels_at);
}

std::string FormatDouble(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

void WriteBundle(const std::filesystem::path& dir,
                 const MultiLabelDataset& dataset,
                 const nlohmann::json& provenance, std::uint64_t seed) {
  dataset.Validate();
  std::filesystem::create_directories(dir);
  WriteCsv(dir / "features.csv",
           DefaultNames(dataset.feature_names, dataset.num_features(), "x"),
           dataset.features);
  WriteCsv(dir / "labels.csv",
           DefaultNames(dataset.label_names, dataset.num_labels(), "y"),
           dataset.labels);
  nlohmann::json manifest = {
      {"format_version", 1},
      {"n", dataset.size()},
      {"D", dataset.num_features()},
      {"C", dataset.num_labels()},
      {"l", std::count(dataset.labeled.begin(), dataset.labeled.end(), true)},
      {"seed", seed},
      {"split", SplitName(dataset.split)},
      {"provenance", provenance},
  };
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

MultiLabelDataset ReadBundle(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ReadFile(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest.json: ") + e.what(), 0);
  }
  const NumericTable features = ParseNumericTable(ReadFile(dir / "features.csv"));
  const NumericTable labels = ParseNumericTable(ReadFile(dir / "labels.csv"));
  if (features.values.rows() != labels.values.rows()) {
    throw ParseError("features.csv and labels.csv disagree on row count", 0);
  }
  MultiLabelDataset ds;
  ds.features = features.values;
  ds.labels.resize(labels.values.rows(), labels.values.cols());
  for (Index i = 0; i < labels.values.rows(); ++i) {
    for (Index c = 0; c < labels.values.cols(); ++c) {
      const double v = labels.values(i, c);
      if (v != 0.0 && v != 1.0) {
        throw ParseError("labels.csv: non-binary value in column " +
                             std::to_string(c + 1),
                         labels.line_numbers[static_cast<std::size_t>(i)]);
      }
      ds.labels(i, c) = static_cast<std::uint8_t>(v);
    }
  }
  ds.feature_names = features.header;
  ds.label_names = labels.header;
  const auto n = static_cast<std::size_t>(ds.size());
  const auto l = manifest.value("l", static_cast<std::int64_t>(n));
  if (l < 0 || static_cast<std::size_t>(l) > n) {
    throw ParseError("manifest l out of range", 0);
  }
  ds.labeled.assign(n, false);
  std::fill(ds.labeled.begin(), ds.labeled.begin() + l, true);
  const auto split = manifest.value("split", std::string("unspecified"));
  ds.split = split == "train"  ? Split::kTrain
             : split == "test" ? Split::kTest
                               : Split::kUnspecified;
  if (manifest.contains("n") && manifest["n"].get<Index>() != ds.size()) {
    throw ParseError("manifest n does not match the data files", 0);
  }
  return ds;
}

}  // namespace nmlsdr::data
