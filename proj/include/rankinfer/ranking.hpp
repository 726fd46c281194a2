#pragma once

#include <span>
#include <vector>

namespace rankinfer {

enum class Direction { increasing, decreasing };

// Tie handling: omega = 0 gives the smallest rank among ties, 0.5 the
// mid-rank and 1 the largest rank.
struct TieRule {
  double omega = 0.0;
  Direction direction = Direction::decreasing;

  TieRule() = default;
  TieRule(double omega_, Direction direction_);
};

enum class RankKind { integer, fractional };

struct RankVector {
  std::vector<double> values;
  RankKind kind = RankKind::integer;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

// R_j = omega * #{k : theta_k <= theta_j} + (1 - omega) * #{k : theta_k < theta_j}
//       + 1 - omega
// with the comparisons reversed for decreasing ranks. Ties use exact
// equality. Throws NonFinite on NaN or infinite input.
RankVector irank(std::span<const double> theta, TieRule rule);

// irank / p.
RankVector frank(std::span<const double> theta, TieRule rule);

// Ranks of x where the counts run over `reference`.
RankVector irank_against(std::span<const double> x, std::span<const double> reference,
                         TieRule rule);

// irank_against / reference.size(). Queries outside the reference's support
// may yield 0 or values above 1.
RankVector frank_against(std::span<const double> x, std::span<const double> reference,
                         TieRule rule);

}  // namespace rankinfer
