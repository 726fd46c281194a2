#include "rankinfer/rankcs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rankinfer/errors.hpp"
#include "rankinfer/ranking.hpp"

namespace rankinfer {

void EstimatesWithCovariance::validate() const {
  const std::size_t p = theta_hat.size();
  if (p < 2) throw InvalidArgument("need at least two populations to rank");
  if (static_cast<std::size_t>(sigma_hat.rows()) != p ||
      static_cast<std::size_t>(sigma_hat.cols()) != p) {
    throw InvalidArgument("covariance matrix must be " + std::to_string(p) + "x" +
                          std::to_string(p));
  }
  if (!labels.empty() && labels.size() != p) {
    throw InvalidArgument("number of labels does not match number of estimates");
  }
  for (double t : theta_hat) {
    if (!std::isfinite(t)) throw NonFinite("estimates contain non-finite values");
  }
  if (!sigma_hat.allFinite()) throw NonFinite("covariance matrix contains non-finite values");
  const double scale = std::max(1.0, sigma_hat.cwiseAbs().maxCoeff());
  if ((sigma_hat - sigma_hat.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument("covariance matrix is not symmetric");
  }
  if (sigma_hat.diagonal().minCoeff() < 0.0) {
    throw InvalidArgument("covariance matrix has a negative variance");
  }
}

EstimatesWithCovariance EstimatesWithCovariance::from_standard_errors(
    std::vector<double> theta_hat, const std::vector<double>& se,
    std::vector<std::string> labels) {
  if (se.size() != theta_hat.size()) {
    throw InvalidArgument("number of standard errors does not match number of estimates");
  }
  EstimatesWithCovariance est;
  est.sigma_hat = DenseMatrix::Zero(static_cast<Eigen::Index>(se.size()),
                                    static_cast<Eigen::Index>(se.size()));
  for (std::size_t j = 0; j < se.size(); ++j) {
    if (!(se[j] >= 0.0)) throw InvalidArgument("standard errors must be nonnegative");
    est.sigma_hat(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = se[j] * se[j];
  }
  est.theta_hat = std::move(theta_hat);
  est.labels = std::move(labels);
  return est;
}

void BootstrapConfig::validate() const {
  if (draws < 100) throw InvalidArgument("need at least 100 bootstrap draws");
  if (!(coverage > 0.0 && coverage < 1.0)) {
    throw InvalidArgument("coverage must lie strictly between 0 and 1");
  }
}

DenseMatrix pairwise_se(const EstimatesWithCovariance& est) {
  est.validate();
  const Eigen::Index p = static_cast<Eigen::Index>(est.size());
  DenseMatrix se = DenseMatrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j + 1; k < p; ++k) {
      double var = est.sigma_hat(j, j) + est.sigma_hat(k, k) - 2.0 * est.sigma_hat(j, k);
      if (var < 0.0 && var > -1e-12) var = 0.0;
      if (var < 1e-12) {
        throw DegeneratePair("variance of the difference between populations " +
                             std::to_string(j + 1) + " and " + std::to_string(k + 1) +
                             " is (numerically) zero");
      }
      se(j, k) = se(k, j) = std::sqrt(var);
    }
  }
  return se;
}

double empirical_quantile(std::vector<double> values, double coverage) {
  if (values.empty()) throw InvalidArgument("empirical_quantile: no values");
  const double m = static_cast<double>(values.size());
  auto index = static_cast<std::size_t>(std::ceil(m * coverage - 1e-9));
  index = std::clamp<std::size_t>(index, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(index - 1),
                   values.end());
  return values[index - 1];
}

namespace {

enum Statistic : unsigned { kMarginal = 1, kSimultaneous = 2, kLower = 4 };

// Per-draw maxima of studentized differences, all from one shared m x p
// normal sample.
struct BootstrapMaxima {
  std::vector<std::vector<double>> marginal;  // [population][draw]
  std::vector<double> simultaneous;
  std::vector<double> lower;
};

BootstrapMaxima bootstrap_maxima(const EstimatesWithCovariance& est, const BootstrapConfig& cfg,
                                 unsigned which, const std::vector<std::size_t>& marginal_for) {
  cfg.validate();
  const DenseMatrix se = pairwise_se(est);
  const std::size_t p = est.size();
  const std::size_t m = cfg.draws;

  DenseMatrix inv_se = DenseMatrix::Zero(se.rows(), se.cols());
  for (Eigen::Index j = 0; j < se.rows(); ++j) {
    for (Eigen::Index k = 0; k < se.cols(); ++k) {
      if (j != k) inv_se(j, k) = 1.0 / se(j, k);
    }
  }

  SeededRng rng(cfg.seed);
  const DenseMatrix draws = mvn_sample(cholesky_psd(est.sigma_hat), rng, m);

  BootstrapMaxima out;
  if (which & kMarginal) out.marginal.assign(p, std::vector<double>(m, 0.0));
  if (which & kSimultaneous) out.simultaneous.assign(m, 0.0);
  if (which & kLower) out.lower.assign(m, 0.0);

  std::vector<char> wanted(p, 0);
  for (std::size_t j : marginal_for) wanted[j] = 1;

  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    std::vector<double> row_max(p);
    for (std::size_t d = begin; d < end; ++d) {
      const auto di = static_cast<Eigen::Index>(d);
      std::fill(row_max.begin(), row_max.end(), 0.0);
      double overall = 0.0;
      double one_sided = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < p; ++j) {
        const auto ji = static_cast<Eigen::Index>(j);
        for (std::size_t k = j + 1; k < p; ++k) {
          const auto ki = static_cast<Eigen::Index>(k);
          const double diff = (draws(di, ki) - draws(di, ji)) * inv_se(ji, ki);
          const double abs_diff = std::fabs(diff);
          row_max[j] = std::max(row_max[j], abs_diff);
          row_max[k] = std::max(row_max[k], abs_diff);
          overall = std::max(overall, abs_diff);
          // (Z_k - Z_j)/se for the pair (j, k) and (Z_j - Z_k)/se for (k, j).
          one_sided = std::max(one_sided, std::max(diff, -diff));
        }
      }
      if (which & kMarginal) {
        for (std::size_t j = 0; j < p; ++j) {
          if (wanted[j]) out.marginal[j][d] = row_max[j];
        }
      }
      if (which & kSimultaneous) out.simultaneous[d] = overall;
      if (which & kLower) out.lower[d] = one_sided;
    }
  });
  return out;
}

std::vector<double> estimated_ranks(const EstimatesWithCovariance& est) {
  return irank(est.theta_hat, TieRule(0.0, Direction::decreasing)).values;
}

}  // namespace

double critical_value_marginal(const EstimatesWithCovariance& est, std::size_t j,
                               const BootstrapConfig& cfg) {
  if (j >= est.size()) throw InvalidArgument("population index out of range");
  auto maxima = bootstrap_maxima(est, cfg, kMarginal, {j});
  return empirical_quantile(std::move(maxima.marginal[j]), cfg.coverage);
}

double critical_value_simultaneous(const EstimatesWithCovariance& est,
                                   const BootstrapConfig& cfg) {
  auto maxima = bootstrap_maxima(est, cfg, kSimultaneous, {});
  return empirical_quantile(std::move(maxima.simultaneous), cfg.coverage);
}

double critical_value_lower(const EstimatesWithCovariance& est, const BootstrapConfig& cfg) {
  auto maxima = bootstrap_maxima(est, cfg, kLower, {});
  return empirical_quantile(std::move(maxima.lower), cfg.coverage);
}

RankConfidenceSet cs_ranks(const EstimatesWithCovariance& est, const BootstrapConfig& cfg,
                           CsMode mode, const std::optional<std::vector<std::size_t>>& indices) {
  est.validate();
  const std::size_t p = est.size();
  std::vector<std::size_t> populations;
  if (indices && mode == CsMode::marginal) {
    populations = *indices;
    for (std::size_t j : populations) {
      if (j >= p) throw InvalidArgument("population index out of range");
    }
  } else {
    populations.resize(p);
    for (std::size_t j = 0; j < p; ++j) populations[j] = j;
  }

  const DenseMatrix se = pairwise_se(est);
  std::vector<double> critical(p, 0.0);
  if (mode == CsMode::marginal) {
    auto maxima = bootstrap_maxima(est, cfg, kMarginal, populations);
    for (std::size_t j : populations) {
      critical[j] = empirical_quantile(maxima.marginal[j], cfg.coverage);
    }
  } else {
    auto maxima = bootstrap_maxima(est, cfg, kSimultaneous, {});
    std::fill(critical.begin(), critical.end(),
              empirical_quantile(std::move(maxima.simultaneous), cfg.coverage));
  }

  const std::vector<double> ranks = estimated_ranks(est);
  RankConfidenceSet out;
  out.mode = mode;
  out.sidedness = Sidedness::two_sided;
  out.coverage = cfg.coverage;
  out.p = p;
  out.populations = populations;
  for (std::size_t j : populations) {
    const auto ji = static_cast<Eigen::Index>(j);
    int n_minus = 0;
    int n_plus = 0;
    for (std::size_t k = 0; k < p; ++k) {
      if (k == j) continue;
      const auto ki = static_cast<Eigen::Index>(k);
      const double diff = est.theta_hat[j] - est.theta_hat[k];
      const double half_width = se(ji, ki) * critical[j];
      if (diff + half_width < 0.0) ++n_minus;
      if (diff - half_width > 0.0) ++n_plus;
    }
    out.lower.push_back(n_minus + 1);
    out.upper.push_back(static_cast<int>(p) - n_plus);
    out.rank.push_back(ranks[j]);
  }
  return out;
}

RankConfidenceSet cs_ranks_lower(const EstimatesWithCovariance& est, const BootstrapConfig& cfg) {
  est.validate();
  const std::size_t p = est.size();
  const DenseMatrix se = pairwise_se(est);
  const double critical = critical_value_lower(est, cfg);
  const std::vector<double> ranks = estimated_ranks(est);

  RankConfidenceSet out;
  out.mode = CsMode::simultaneous;
  out.sidedness = Sidedness::lower_bounds_only;
  out.coverage = cfg.coverage;
  out.p = p;
  for (std::size_t j = 0; j < p; ++j) {
    int n_minus = 0;
    for (std::size_t k = 0; k < p; ++k) {
      if (k == j) continue;
      const double upper_end = est.theta_hat[j] - est.theta_hat[k] +
                               se(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *
                                   critical;
      if (upper_end < 0.0) ++n_minus;
    }
    out.populations.push_back(j);
    out.lower.push_back(n_minus + 1);
    out.upper.push_back(static_cast<int>(p));
    out.rank.push_back(ranks[j]);
  }
  return out;
}

TauBestSet cs_tau_best(const EstimatesWithCovariance& est, const BootstrapConfig& cfg,
                       std::size_t tau) {
  if (tau < 1 || tau > est.size()) {
    throw InvalidArgument("tau must lie between 1 and the number of populations");
  }
  const RankConfidenceSet bounds = cs_ranks_lower(est, cfg);
  TauBestSet out;
  out.tau = tau;
  out.coverage = cfg.coverage;
  for (std::size_t i = 0; i < bounds.populations.size(); ++i) {
    if (static_cast<std::size_t>(bounds.lower[i]) <= tau) {
      out.members.push_back(bounds.populations[i]);
    }
  }
  return out;
}

TauBestSet cs_tau_worst(const EstimatesWithCovariance& est, const BootstrapConfig& cfg,
                        std::size_t tau) {
  EstimatesWithCovariance negated = est;
  for (double& t : negated.theta_hat) t = -t;
  return cs_tau_best(negated, cfg, tau);
}

}  // namespace rankinfer
