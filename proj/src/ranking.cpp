#include "rankinfer/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rankinfer/errors.hpp"

namespace rankinfer {

TieRule::TieRule(double omega_, Direction direction_) : omega(omega_), direction(direction_) {
  if (!(omega >= 0.0 && omega <= 1.0)) {
    throw InvalidArgument("omega must lie in [0, 1], got " + std::to_string(omega));
  }
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NonFinite(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

RankVector irank_against(std::span<const double> x, std::span<const double> reference,
                         TieRule rule) {
  require_finite(x, "ranked vector");
  require_finite(reference, "reference vector");
  if (reference.empty()) throw InvalidArgument("reference vector is empty");

  std::vector<double> sorted(reference.begin(), reference.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  RankVector out;
  out.kind = RankKind::integer;
  out.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double below = static_cast<double>(
        std::lower_bound(sorted.begin(), sorted.end(), x[i]) - sorted.begin());
    const double at_or_below = static_cast<double>(
        std::upper_bound(sorted.begin(), sorted.end(), x[i]) - sorted.begin());
    double weak, strict;
    if (rule.direction == Direction::increasing) {
      weak = at_or_below;
      strict = below;
    } else {
      weak = n - below;
      strict = n - at_or_below;
    }
    // Same as omega * weak + (1 - omega) * strict + 1 - omega, but exact
    // for untied values.
    out.values[i] = strict + 1.0 + rule.omega * (weak - strict - 1.0);
  }
  return out;
}

RankVector irank(std::span<const double> theta, TieRule rule) {
  if (theta.empty()) throw InvalidArgument("cannot rank an empty vector");
  return irank_against(theta, theta, rule);
}

RankVector frank_against(std::span<const double> x, std::span<const double> reference,
                         TieRule rule) {
  RankVector out = irank_against(x, reference, rule);
  const double n = static_cast<double>(reference.size());
  for (double& v : out.values) v /= n;
  out.kind = RankKind::fractional;
  return out;
}

RankVector frank(std::span<const double> theta, TieRule rule) {
  if (theta.empty()) throw InvalidArgument("cannot rank an empty vector");
  return frank_against(theta, theta, rule);
}

}  // namespace rankinfer
