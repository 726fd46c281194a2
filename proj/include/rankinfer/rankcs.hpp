#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rankinfer/numerics.hpp"

namespace rankinfer {

// Point estimates with their estimated covariance matrix.
struct EstimatesWithCovariance {
  std::vector<double> theta_hat;
  DenseMatrix sigma_hat;
  std::vector<std::string> labels;  // empty or one per population

  // Checks p >= 2, dimensions, finiteness, symmetry within 1e-10 and a
  // nonnegative diagonal.
  void validate() const;

  std::size_t size() const { return theta_hat.size(); }

  // Independent estimates: Sigma = diag(se^2).
  static EstimatesWithCovariance from_standard_errors(std::vector<double> theta_hat,
                                                      const std::vector<double>& se,
                                                      std::vector<std::string> labels = {});
};

struct BootstrapConfig {
  std::size_t draws = 1000;
  double coverage = 0.95;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class CsMode { marginal, simultaneous };
enum class Sidedness { two_sided, lower_bounds_only };

// Confidence sets {L_j, ..., U_j} for a subset of populations (0-based
// `populations`), with the estimated rank (omega = 0, decreasing).
struct RankConfidenceSet {
  std::vector<std::size_t> populations;
  std::vector<int> lower;
  std::vector<double> rank;
  std::vector<int> upper;
  CsMode mode = CsMode::marginal;
  Sidedness sidedness = Sidedness::two_sided;
  double coverage = 0.95;
  std::size_t p = 0;
};

struct TauBestSet {
  std::size_t tau = 1;
  std::vector<std::size_t> members;  // 0-based, ascending
  double coverage = 0.95;
};

// Pairwise standard errors se_jk = sqrt(s_jj + s_kk - 2 s_jk). Throws
// DegeneratePair when an off-diagonal variance falls below 1e-12.
DenseMatrix pairwise_se(const EstimatesWithCovariance& est);

// Smallest order statistic with 1-based index >= ceil(m * coverage).
double empirical_quantile(std::vector<double> values, double coverage);

// (1 - alpha)-quantile of max_{k != j} |Z_j - Z_k| / se_jk, Z ~ N(0, Sigma).
double critical_value_marginal(const EstimatesWithCovariance& est, std::size_t j,
                               const BootstrapConfig& cfg);

// Same with the maximum over all pairs.
double critical_value_simultaneous(const EstimatesWithCovariance& est,
                                   const BootstrapConfig& cfg);

// (1 - alpha)-quantile of max over ordered pairs of (Z_k - Z_j) / se_jk.
double critical_value_lower(const EstimatesWithCovariance& est, const BootstrapConfig& cfg);

// Two-sided confidence sets. In marginal mode only `indices` (default: all)
// are computed, each from the same bootstrap draws.
RankConfidenceSet cs_ranks(const EstimatesWithCovariance& est, const BootstrapConfig& cfg,
                           CsMode mode,
                           const std::optional<std::vector<std::size_t>>& indices = std::nullopt);

// Simultaneous lower confidence bounds; U_j = p for every j.
RankConfidenceSet cs_ranks_lower(const EstimatesWithCovariance& est, const BootstrapConfig& cfg);

// Projection confidence set for the tau-best populations: {j : L_j <= tau}.
TauBestSet cs_tau_best(const EstimatesWithCovariance& est, const BootstrapConfig& cfg,
                       std::size_t tau);

// tau-best among the negated estimates.
TauBestSet cs_tau_worst(const EstimatesWithCovariance& est, const BootstrapConfig& cfg,
                        std::size_t tau);

}  // namespace rankinfer
