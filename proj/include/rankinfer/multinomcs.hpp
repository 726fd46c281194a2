#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankinfer/rankcs.hpp"

namespace rankinfer {

// Observed category counts of a single multinomial sample.
struct MultinomialCounts {
  std::vector<std::uint64_t> counts;
  std::vector<std::string> labels;

  std::uint64_t total() const;
  void validate() const;  // p >= 2 (InsufficientCategories), total >= 1
};

enum class Correction { holm, bonferroni };

// p-value for H_{k,l}: theta_k <= theta_l, conditional on S = X_k + X_l:
// 2^{-S} * sum_{i=X_k}^{S} C(S, i). S = 0 gives 1.
double pairwise_pvalue(std::uint64_t xk, std::uint64_t xl);

// Multiplicity-adjusted p-values for a family of size pvals.size(). Holm
// ties are broken by original position.
std::vector<double> adjust_pvalues(std::span<const double> pvals, Correction method);

// Finite-sample confidence sets for the ranks (omega = 0, decreasing) of the
// category probabilities. Marginal mode tests, for each target j, the
// 2(p-1) hypotheses involving j; simultaneous mode tests all p(p-1) ordered
// pairs at once. Rejection: adjusted p <= 1 - coverage.
RankConfidenceSet cs_ranks_multinomial(
    const MultinomialCounts& data, double coverage, CsMode mode, Correction method,
    const std::optional<std::vector<std::size_t>>& indices = std::nullopt);

}  // namespace rankinfer
