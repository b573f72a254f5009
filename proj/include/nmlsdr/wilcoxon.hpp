#pragma once

#include <utility>
#include <vector>

namespace nmlsdr::stats {

inline constexpr int kExactMaxPairs = 25;

struct SignedRankResult {
  int pairs = 0;          // non-zero differences that were ranked
  double w_plus = 0.0;    // rank sum of positive differences (a > b)
  double w_minus = 0.0;
  double p_value = 1.0;   // two-sided
  bool exact = true;
};

/// Two-sided Wilcoxon signed-rank test on paired differences a - b.
///
/// Zero differences are dropped and tied |differences| get averaged ranks.
/// Up to kExactMaxPairs pairs the null distribution is exact: all 2^n sign
/// patterns are counted by dynamic programming over doubled ranks, so
/// averaged half-ranks stay integral. Beyond that a normal approximation with
/// tie-corrected variance and continuity correction is used.
SignedRankResult SignedRankTest(const std::vector<double>& a,
                                const std::vector<double>& b);

// Both routes on the same data, regardless of size.
SignedRankResult SignedRankExact(const std::vector<double>& a,
                                 const std::vector<double>& b);
SignedRankResult SignedRankNormal(const std::vector<double>& a,
                                  const std::vector<double>& b);

/// Pairwise comparison score: (1, 0) if a is significantly better than b at
/// `alpha_level`, (0, 1) if b is, otherwise (0.5, 0.5). Needs equal lengths
/// of at least 5.
std::pair<double, double> WilcoxonPairScore(const std::vector<double>& a,
                                            const std::vector<double>& b,
                                            double alpha_level = 0.05);

}  // namespace nmlsdr::stats
