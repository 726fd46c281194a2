#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankinfer/numerics.hpp"
#include "rankinfer/table.hpp"

namespace rankinfer {

// ---------------------------------------------------------------------------
// Model specification
// ---------------------------------------------------------------------------

struct Term {
  std::string column;
  bool ranked = false;

  std::string label() const { return ranked ? "r(" + column + ")" : column; }
  bool operator==(const Term&) const = default;
};

// response ~ regressors, optionally with every regressor and the intercept
// interacted with the levels of `group`. Ranks are increasing fractional
// ranks with tie parameter `omega`, computed on the pooled sample.
struct RankRegressionModel {
  Term response;
  std::vector<Term> regressors;
  bool intercept = true;
  std::optional<std::string> group;
  double omega = 1.0;

  // At most one ranked regressor; omega in [0, 1]; no duplicate terms.
  void validate() const;
  const Term* ranked_regressor() const;
  std::string formula() const;
};

// Grammar (whitespace-insensitive):
//   formula     := ranked_term "~" rhs
//   rhs         := term_sum | "(" term_sum ")" ":" identifier | term ":" identifier
//   term_sum    := term ("+" term)*
//   term        := identifier | "r(" identifier ")"
// Throws FormulaError carrying the offending character offset.
RankRegressionModel parse_formula(std::string_view text);

// Two-line message: the formula and a caret under `position`.
std::string caret_diagnostic(std::string_view text, std::size_t position);

// ---------------------------------------------------------------------------
// Design
// ---------------------------------------------------------------------------

enum class ColumnKind { intercept, ranked, plain };

struct DesignColumn {
  std::string name;
  ColumnKind kind = ColumnKind::plain;
  std::string source;                // data column; empty for intercepts
  std::optional<std::size_t> group;  // level index for interacted columns
};

struct RankRegressionDesign {
  DenseMatrix z;
  DenseVector response;  // fractional ranks of Y when the response is ranked
  std::vector<DesignColumn> columns;

  bool response_ranked = false;
  bool regressor_ranked = false;
  std::vector<double> response_raw;
  std::vector<double> regressor_raw;    // raw X of the ranked regressor
  std::vector<double> regressor_ranks;  // R^X_i

  std::vector<std::string> group_levels;  // empty when ungrouped
  std::vector<std::size_t> group_of_row;

  // Design column carrying R^X for each row (the ranked column of the row's
  // group), or -1 when the row has none.
  std::vector<Eigen::Index> rank_column_of_row;

  double omega = 1.0;
  std::vector<std::string> warnings;

  std::size_t n() const { return static_cast<std::size_t>(z.rows()); }
};

// Ranked columns become frank(., omega, increasing) over the full sample.
// Errors: MissingColumn, MissingValues, EmptyGroup (a level with < 2 rows).
// A single-level group column falls back to the ungrouped model and records
// a warning.
RankRegressionDesign build_design(const RankRegressionModel& model, const TableData& data);

// ---------------------------------------------------------------------------
// Fit
// ---------------------------------------------------------------------------

struct RankRegressionFit {
  RankRegressionModel model;
  RankRegressionDesign design;
  QRFactorization qr;
  DenseVector coefficients;
  DenseVector fitted;
  DenseVector residuals;

  std::size_t n() const { return design.n(); }
  const std::vector<std::string>& warnings() const { return design.warnings; }
  std::vector<std::string> coefficient_names() const;
};

RankRegressionFit fit(const RankRegressionModel& model, const TableData& data);
RankRegressionFit fit_design(const RankRegressionModel& model, RankRegressionDesign design);

// Fitted values for new rows. Ranked columns are ranked against the training
// sample (frank_against), so out-of-support values are allowed.
DenseVector predict(const RankRegressionFit& fit, const TableData& newdata);

// (Z'Z)^{-1} D^{-1} with D = diag((Z'Z)^{-1}). Column j holds 1 at row j and
// minus the coefficients of regressing Z_j on the remaining columns.
DenseMatrix projection_coefficients(const RankRegressionFit& fit);

// gamma_j: coefficients of Z_j on Z_{-j}, in the order of the remaining columns.
DenseVector projection_gamma(const DenseMatrix& projection, Eigen::Index j);

// ---------------------------------------------------------------------------
// Indicator-matrix products
// ---------------------------------------------------------------------------

// Matrix with entries I_ij = omega * 1{x_i <= x_j} + (1 - omega) * 1{x_i < x_j}.
// The sorting permutation and tie runs are computed once, so repeated
// products cost O(n) each after the O(n log n) setup.
class IndicatorMatrix {
 public:
  IndicatorMatrix(std::span<const double> x, double omega);

  std::size_t size() const { return order_.size(); }
  std::vector<double> apply(std::span<const double> v) const;

 private:
  std::vector<std::size_t> order_;  // indices of x in decreasing order
  std::vector<std::size_t> run_id_;  // tie-run id at each sorted position
  double omega_;
};

std::vector<double> indicator_matvec(std::span<const double> x, std::span<const double> v,
                                     double omega);

// ---------------------------------------------------------------------------
// Variance estimation
// ---------------------------------------------------------------------------

struct HTerms {
  DenseVector h1;
  DenseVector h2;
  DenseVector h3;
  double sigma2_nu = 0.0;

  DenseVector total() const { return h1 + h2 + h3; }
};

// Influence components for coefficient j.
//   H1_i = eps_i * nu_i
//   H2_i = n^{-1} sum_k a_i(k) nu_k
//   H3_i = n^{-1} sum_k eps_k b_i(k)
// where nu = Z_j - Z_{-j} gamma_j, a_i(k) is eps_k with every estimated rank
// R_V(V_k) of a ranked variable replaced by I(V_i, V_k), and b_i(k) is nu_k
// with the same replacement. Inner sums are indicator-matrix products.
HTerms h_terms(const RankRegressionFit& fit, const DenseMatrix& projection, Eigen::Index j);

struct CorrectedCovariance {
  DenseMatrix vcov;       // covariance of the coefficient vector (Sigma / n)
  DenseVector sigma2_nu;  // per coefficient
};

// Sigma_jk = (n s2_j s2_k)^{-1} sum_i H^(j)_i H^(k)_i, returned divided by n.
CorrectedCovariance corrected_vcov(const RankRegressionFit& fit);

struct CoefficientRow {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double z_value = 0.0;
  double p_value = 1.0;
  std::string signif;
};

std::vector<CoefficientRow> summarize(const RankRegressionFit& fit,
                                      const CorrectedCovariance& cov);
std::vector<CoefficientRow> summarize(const RankRegressionFit& fit);

// "***" p <= 0.001, "**" <= 0.01, "*" <= 0.05, "." <= 0.1, "" otherwise.
std::string significance_stars(double p_value);

struct CoefficientInterval {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
};

std::vector<CoefficientInterval> confint(const RankRegressionFit& fit,
                                         const CorrectedCovariance& cov, double level);
std::vector<CoefficientInterval> confint(const RankRegressionFit& fit, double level);

inline constexpr const char* kDegreesOfFreedomWarning =
    "The number of residual degrees of freedom is not correct. "
    "z-values are reported since p-values use the standard normal distribution.";

}  // namespace rankinfer
