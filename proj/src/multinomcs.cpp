#include "rankinfer/multinomcs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankinfer/errors.hpp"
#include "rankinfer/numerics.hpp"
#include "rankinfer/ranking.hpp"

namespace rankinfer {

std::uint64_t MultinomialCounts::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void MultinomialCounts::validate() const {
  if (counts.size() < 2) {
    throw InsufficientCategories("need at least two categories, got " +
                                 std::to_string(counts.size()));
  }
  if (!labels.empty() && labels.size() != counts.size()) {
    throw InvalidArgument("number of labels does not match number of categories");
  }
  if (total() == 0) throw InvalidArgument("total count must be positive");
}

double pairwise_pvalue(std::uint64_t xk, std::uint64_t xl) {
  const std::uint64_t s = xk + xl;
  if (s == 0 || xk == 0) return 1.0;
  if (s <= 62) {
    // Exact integer tail; at most one rounding in the final scaling.
    std::uint64_t binom = 1;  // C(s, i) for i walking down from s
    std::uint64_t sum = 0;
    for (std::uint64_t i = s;; --i) {
      sum += binom;
      if (i == xk) break;
      binom = static_cast<std::uint64_t>(static_cast<unsigned __int128>(binom) * i / (s - i + 1));
    }
    return std::ldexp(static_cast<double>(sum), -static_cast<int>(s));
  }
  return std::min(1.0, std::exp(log_binom_tail(xk, s)));
}

std::vector<double> adjust_pvalues(std::span<const double> pvals, Correction method) {
  const std::size_t m = pvals.size();
  for (double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p-values must lie in [0, 1]");
  }
  std::vector<double> out(m);
  const double family = static_cast<double>(m);
  if (method == Correction::bonferroni) {
    for (std::size_t i = 0; i < m; ++i) out[i] = std::min(1.0, family * pvals[i]);
    return out;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  double running = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const double scaled = std::min(1.0, (family - static_cast<double>(r)) * pvals[order[r]]);
    running = std::max(running, scaled);
    out[order[r]] = running;
  }
  return out;
}

RankConfidenceSet cs_ranks_multinomial(const MultinomialCounts& data, double coverage,
                                       CsMode mode, Correction method,
                                       const std::optional<std::vector<std::size_t>>& indices) {
  data.validate();
  if (!(coverage > 0.0 && coverage < 1.0)) {
    throw InvalidArgument("coverage must lie strictly between 0 and 1");
  }
  const double alpha = 1.0 - coverage;
  const std::size_t p = data.counts.size();

  std::vector<std::size_t> populations;
  if (indices && mode == CsMode::marginal) {
    populations = *indices;
    for (std::size_t j : populations) {
      if (j >= p) throw InvalidArgument("category index out of range");
    }
  } else {
    populations.resize(p);
    std::iota(populations.begin(), populations.end(), std::size_t{0});
  }

  // pvalue[k][l] tests H_{k,l}: theta_k <= theta_l.
  std::vector<std::vector<double>> pvalue(p, std::vector<double>(p, 1.0));
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t l = 0; l < p; ++l) {
      if (k != l) pvalue[k][l] = pairwise_pvalue(data.counts[k], data.counts[l]);
    }
  }

  // rejected[k][l]: H_{k,l} rejected, i.e. theta_k > theta_l claimed.
  std::vector<std::vector<char>> rejected(p, std::vector<char>(p, 0));
  if (mode == CsMode::simultaneous) {
    std::vector<double> family;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; k < p; ++k) {
      for (std::size_t l = 0; l < p; ++l) {
        if (k == l) continue;
        family.push_back(pvalue[k][l]);
        pairs.emplace_back(k, l);
      }
    }
    const std::vector<double> adjusted = adjust_pvalues(family, method);
    for (std::size_t h = 0; h < pairs.size(); ++h) {
      if (adjusted[h] <= alpha) rejected[pairs[h].first][pairs[h].second] = 1;
    }
  }

  const std::vector<double> counts_real(data.counts.begin(), data.counts.end());
  const std::vector<double> ranks = irank(counts_real, TieRule(0.0, Direction::decreasing)).values;

  RankConfidenceSet out;
  out.mode = mode;
  out.sidedness = Sidedness::two_sided;
  out.coverage = coverage;
  out.p = p;
  out.populations = populations;
  for (std::size_t j : populations) {
    int rej_minus = 0;
    int rej_plus = 0;
    if (mode == CsMode::marginal) {
      // Family: H_{k,j} and H_{j,k} for every k != j.
      std::vector<double> family;
      family.reserve(2 * (p - 1));
      for (std::size_t k = 0; k < p; ++k) {
        if (k == j) continue;
        family.push_back(pvalue[k][j]);
        family.push_back(pvalue[j][k]);
      }
      const std::vector<double> adjusted = adjust_pvalues(family, method);
      std::size_t h = 0;
      for (std::size_t k = 0; k < p; ++k) {
        if (k == j) continue;
        if (adjusted[h++] <= alpha) ++rej_minus;
        if (adjusted[h++] <= alpha) ++rej_plus;
      }
    } else {
      for (std::size_t k = 0; k < p; ++k) {
        if (k == j) continue;
        if (rejected[k][j]) ++rej_minus;
        if (rejected[j][k]) ++rej_plus;
      }
    }
    out.lower.push_back(rej_minus + 1);
    out.upper.push_back(static_cast<int>(p) - rej_plus);
    out.rank.push_back(ranks[j]);
  }
  return out;
}

}  // namespace rankinfer
