#include "nmlsdr/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nmlsdr/error.hpp"

namespace nmlsdr::stats {
namespace {

struct RankedDifferences {
  std::vector<double> doubled_ranks;  // 2 * averaged rank, integral
  std::vector<bool> positive;
  std::vector<int> tie_sizes;
};

RankedDifferences Rank(const std::vector<double>& a,
                       const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw InvalidInputError("paired samples must have equal length");
  }
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw InvalidInputError("non-finite paired value");
    if (d != 0.0) diffs.push_back(d);
  }
  std::vector<std::size_t> order(diffs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });

  RankedDifferences out;
  out.doubled_ranks.resize(diffs.size());
  out.positive.resize(diffs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) {
      ++j;
    }
    // Positions i..j (0-based) share rank ((i+1) + (j+1)) / 2.
    const double doubled = static_cast<double>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) out.doubled_ranks[order[t]] = doubled;
    out.tie_sizes.push_back(static_cast<int>(j - i + 1));
    i = j + 1;
  }
  for (std::size_t t = 0; t < diffs.size(); ++t) out.positive[t] = diffs[t] > 0;
  return out;
}

SignedRankResult Sums(const RankedDifferences& r) {
  SignedRankResult out;
  out.pairs = static_cast<int>(r.doubled_ranks.size());
  for (std::size_t t = 0; t < r.doubled_ranks.size(); ++t) {
    (r.positive[t] ? out.w_plus : out.w_minus) += r.doubled_ranks[t] / 2.0;
  }
  return out;
}

}  // namespace

SignedRankResult SignedRankExact(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  const RankedDifferences r = Rank(a, b);
  SignedRankResult out = Sums(r);
  out.exact = true;
  if (out.pairs == 0) return out;

  int total = 0;
  for (double dr : r.doubled_ranks) total += static_cast<int>(dr);
  // counts[s]: sign patterns whose doubled positive rank sum equals s.
  std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
  counts[0] = 1.0;
  int reach = 0;
  for (double dr : r.doubled_ranks) {
    const int step = static_cast<int>(dr);
    for (int s = reach; s >= 0; --s) {
      counts[static_cast<std::size_t>(s + step)] += counts[static_cast<std::size_t>(s)];
    }
    reach += step;
  }
  const double patterns = std::ldexp(1.0, out.pairs);
  const auto observed = static_cast<int>(std::lround(2.0 * out.w_plus));
  double lower = 0.0;
  double upper = 0.0;
  for (int s = 0; s <= total; ++s) {
    if (s <= observed) lower += counts[static_cast<std::size_t>(s)];
    if (s >= observed) upper += counts[static_cast<std::size_t>(s)];
  }
  out.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / patterns);
  return out;
}

SignedRankResult SignedRankNormal(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  const RankedDifferences r = Rank(a, b);
  SignedRankResult out = Sums(r);
  out.exact = false;
  if (out.pairs == 0) return out;
  const double n = out.pairs;
  const double mean = n * (n + 1.0) / 4.0;
  double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  for (int t : r.tie_sizes) {
    variance -= (static_cast<double>(t) * t * t - t) / 48.0;
  }
  if (!(variance > 0.0)) return out;
  const double z =
      std::max(0.0, std::abs(out.w_plus - mean) - 0.5) / std::sqrt(variance);
  out.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return out;
}

SignedRankResult SignedRankTest(const std::vector<double>& a,
                                const std::vector<double>& b) {
  const RankedDifferences r = Rank(a, b);
  return r.doubled_ranks.size() <= static_cast<std::size_t>(kExactMaxPairs)
             ? SignedRankExact(a, b)
             : SignedRankNormal(a, b);
}

std::pair<double, double> WilcoxonPairScore(const std::vector<double>& a,
                                            const std::vector<double>& b,
                                            double alpha_level) {
  if (a.size() != b.size() || a.size() < 5) {
    throw InvalidInputError(
        "Wilcoxon scoring needs two equal-length samples of length >= 5");
  }
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
    throw InvalidInputError("significance level must lie in (0, 1)");
  }
  const SignedRankResult test = SignedRankTest(a, b);
  if (test.pairs == 0 || !(test.p_value < alpha_level)) return {0.5, 0.5};
  if (test.w_plus > test.w_minus) return {1.0, 0.0};
  if (test.w_minus > test.w_plus) return {0.0, 1.0};
  return {0.5, 0.5};
}

}  // namespace nmlsdr::stats
