#include "rankinfer/rankreg.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <utility>

#include "rankinfer/errors.hpp"
#include "rankinfer/ranking.hpp"

namespace rankinfer {

namespace {

// Maps doubles to unsigned keys whose order is the reverse of the values'.
std::uint64_t descending_key(double v) {
  if (v == 0.0) v = 0.0;  // fold -0 into +0
  const auto bits = std::bit_cast<std::uint64_t>(v);
  const std::uint64_t ascending = (bits >> 63) ? ~bits : bits | (std::uint64_t{1} << 63);
  return ~ascending;
}

// Indices of x sorted by decreasing value, ties by increasing index, and the
// matching keys.
std::vector<std::size_t> decreasing_order(std::span<const double> x,
                                          std::vector<std::uint64_t>& sorted_keys) {
  const std::size_t n = x.size();
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) keyed[i] = {descending_key(x[i]), i};
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> order(n);
  sorted_keys.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    sorted_keys[s] = keyed[s].first;
    order[s] = keyed[s].second;
  }
  return order;
}

std::string trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return std::string(s);
}

// Distinct levels, sorted numerically when every level is a number and
// lexicographically otherwise.
std::vector<std::string> sorted_levels(const std::vector<std::string>& cells) {
  std::vector<std::string> levels;
  for (const auto& c : cells) levels.push_back(trimmed(c));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  bool all_numeric = true;
  std::map<std::string, double> value;
  for (const auto& l : levels) {
    double v;
    if (!parse_number(l, v)) {
      all_numeric = false;
      break;
    }
    value[l] = v;
  }
  if (all_numeric) {
    std::stable_sort(levels.begin(), levels.end(),
                     [&](const std::string& a, const std::string& b) { return value[a] < value[b]; });
  }
  return levels;
}

void fill_design(const RankRegressionModel& model, RankRegressionDesign& d,
                 const std::map<std::string, std::vector<double>>& regressor_values,
                 const std::vector<double>& regressor_ranks) {
  const std::size_t n = d.group_of_row.empty() ? regressor_values.begin()->second.size()
                                               : d.group_of_row.size();
  const bool grouped = !d.group_levels.empty();
  d.columns.clear();
  if (!grouped) {
    d.columns.push_back({"(Intercept)", ColumnKind::intercept, "", std::nullopt});
    for (const auto& t : model.regressors) {
      d.columns.push_back({t.label(), t.ranked ? ColumnKind::ranked : ColumnKind::plain, t.column,
                           std::nullopt});
    }
  } else {
    const std::string& g = *model.group;
    for (std::size_t l = 0; l < d.group_levels.size(); ++l) {
      d.columns.push_back({g + d.group_levels[l], ColumnKind::intercept, "", l});
    }
    for (const auto& t : model.regressors) {
      for (std::size_t l = 0; l < d.group_levels.size(); ++l) {
        d.columns.push_back({t.label() + ":" + g + d.group_levels[l],
                             t.ranked ? ColumnKind::ranked : ColumnKind::plain, t.column, l});
      }
    }
  }

  const auto p = static_cast<Eigen::Index>(d.columns.size());
  d.z = DenseMatrix::Zero(static_cast<Eigen::Index>(n), p);
  d.rank_column_of_row.assign(n, -1);
  for (Eigen::Index c = 0; c < p; ++c) {
    const DesignColumn& col = d.columns[static_cast<std::size_t>(c)];
    const std::vector<double>* base = nullptr;
    if (col.kind == ColumnKind::ranked) {
      base = &regressor_ranks;
    } else if (col.kind == ColumnKind::plain) {
      base = &regressor_values.at(col.source);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (col.group && d.group_of_row[i] != *col.group) continue;
      d.z(static_cast<Eigen::Index>(i), c) = base ? (*base)[i] : 1.0;
      if (col.kind == ColumnKind::ranked) d.rank_column_of_row[i] = c;
    }
  }
}

}  // namespace

RankRegressionDesign build_design(const RankRegressionModel& model, const TableData& data) {
  model.validate();
  RankRegressionDesign d;
  d.omega = model.omega;
  const TieRule rule(model.omega, Direction::increasing);
  const std::size_t n = data.rows();
  if (n < 2) throw InvalidArgument("need at least two observations");

  d.response_raw = data.numeric(model.response.column);
  d.response_ranked = model.response.ranked;
  std::map<std::string, std::vector<double>> regressor_values;
  for (const auto& t : model.regressors) regressor_values[t.column] = data.numeric(t.column);

  std::vector<double> response = d.response_raw;
  if (d.response_ranked) response = frank(d.response_raw, rule).values;
  d.response = Eigen::Map<const DenseVector>(response.data(), static_cast<Eigen::Index>(n));

  if (const Term* ranked = model.ranked_regressor()) {
    d.regressor_ranked = true;
    d.regressor_raw = regressor_values.at(ranked->column);
    d.regressor_ranks = frank(d.regressor_raw, rule).values;
  }
  for (const auto& [name, values] : regressor_values) {
    for (double v : values) {
      if (!std::isfinite(v)) throw NonFinite("column '" + name + "' contains non-finite values");
    }
  }
  for (double v : d.response_raw) {
    if (!std::isfinite(v)) throw NonFinite("response contains non-finite values");
  }

  if (model.group) {
    const auto& cells = data.text(*model.group);
    for (std::size_t i = 0; i < n; ++i) {
      if (trimmed(cells[i]).empty() || trimmed(cells[i]) == "NA") {
        throw MissingValues("group column '" + *model.group + "' has a missing value in data row " +
                            std::to_string(i + 1));
      }
    }
    std::vector<std::string> levels = sorted_levels(cells);
    if (levels.size() < 2) {
      d.warnings.push_back("group column '" + *model.group +
                           "' has a single level; fitting the ungrouped model");
    } else {
      std::map<std::string, std::size_t> index;
      for (std::size_t l = 0; l < levels.size(); ++l) index[levels[l]] = l;
      d.group_of_row.resize(n);
      std::vector<std::size_t> counts(levels.size(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        d.group_of_row[i] = index.at(trimmed(cells[i]));
        ++counts[d.group_of_row[i]];
      }
      for (std::size_t l = 0; l < levels.size(); ++l) {
        if (counts[l] < 2) {
          throw EmptyGroup("group level '" + levels[l] + "' has fewer than 2 observations");
        }
      }
      d.group_levels = std::move(levels);
    }
  }

  fill_design(model, d, regressor_values, d.regressor_ranks);
  return d;
}

std::vector<std::string> RankRegressionFit::coefficient_names() const {
  std::vector<std::string> names;
  for (const auto& c : design.columns) names.push_back(c.name);
  return names;
}

RankRegressionFit fit_design(const RankRegressionModel& model, RankRegressionDesign design) {
  QRFactorization qr = qr_decompose(design.z);
  DenseVector coefficients = qr.solve(design.response);
  if (!coefficients.allFinite()) throw NonFinite("regression coefficients are not finite");
  DenseVector fitted = design.z * coefficients;
  DenseVector residuals = design.response - fitted;
  return RankRegressionFit{model,
                           std::move(design),
                           std::move(qr),
                           std::move(coefficients),
                           std::move(fitted),
                           std::move(residuals)};
}

RankRegressionFit fit(const RankRegressionModel& model, const TableData& data) {
  return fit_design(model, build_design(model, data));
}

DenseVector predict(const RankRegressionFit& fit, const TableData& newdata) {
  const RankRegressionModel& model = fit.model;
  const std::size_t n = newdata.rows();
  RankRegressionDesign d;
  d.group_levels = fit.design.group_levels;
  std::map<std::string, std::vector<double>> regressor_values;
  for (const auto& t : model.regressors) regressor_values[t.column] = newdata.numeric(t.column);
  std::vector<double> ranks;
  if (const Term* ranked = model.ranked_regressor()) {
    ranks = frank_against(regressor_values.at(ranked->column), fit.design.regressor_raw,
                          TieRule(model.omega, Direction::increasing))
                .values;
  }
  if (!d.group_levels.empty()) {
    const auto& cells = newdata.text(*model.group);
    d.group_of_row.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = std::find(d.group_levels.begin(), d.group_levels.end(), trimmed(cells[i]));
      if (it == d.group_levels.end()) {
        throw InvalidArgument("group level '" + cells[i] + "' was not seen during fitting");
      }
      d.group_of_row[i] = static_cast<std::size_t>(it - d.group_levels.begin());
    }
  }
  fill_design(model, d, regressor_values, ranks);
  return d.z * fit.coefficients;
}

DenseMatrix projection_coefficients(const RankRegressionFit& fit) {
  const DenseMatrix inv = inverse_from_qr(fit.qr);
  const DenseVector scale = inv.diagonal().cwiseInverse();
  return inv * scale.asDiagonal();
}

DenseVector projection_gamma(const DenseMatrix& projection, Eigen::Index j) {
  const Eigen::Index p = projection.rows();
  DenseVector gamma(p - 1);
  for (Eigen::Index k = 0, out = 0; k < p; ++k) {
    if (k != j) gamma(out++) = -projection(k, j);
  }
  return gamma;
}

IndicatorMatrix::IndicatorMatrix(std::span<const double> x, double omega) : omega_(omega) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw InvalidArgument("omega must lie in [0, 1]");
  for (double v : x) {
    if (!std::isfinite(v)) throw NonFinite("indicator matrix: x contains non-finite values");
  }
  const std::size_t n = x.size();
  std::vector<std::uint64_t> keys;
  order_ = decreasing_order(x, keys);
  run_id_.resize(n);
  std::size_t run = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (s > 0 && keys[s] != keys[s - 1]) ++run;
    run_id_[s] = run;
  }
}

std::vector<double> IndicatorMatrix::apply(std::span<const double> v) const {
  const std::size_t n = order_.size();
  if (v.size() != n) throw InvalidArgument("indicator matrix: vector length mismatch");
  std::vector<double> sorted(n);
  for (std::size_t s = 0; s < n; ++s) sorted[s] = v[order_[s]];

  // With x sorted decreasingly, row i picks up every j before its tie run,
  // plus (omega = 1 part) its whole tie run.
  std::vector<double> weak;
  if (omega_ > 0.0) weak = grouped_cumsum(sorted, run_id_, Placement::first);
  std::vector<double> strict;
  if (omega_ < 1.0) {
    strict = grouped_cumsum(sorted, run_id_, Placement::last);
    // Shift by one place: the strict indicator has zeros on the diagonal.
    for (std::size_t s = n; s-- > 1;) strict[s] = strict[s - 1];
    if (n > 0) strict[0] = 0.0;
  }

  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    double c = 0.0;
    if (omega_ > 0.0) c += omega_ * weak[s];
    if (omega_ < 1.0) c += (1.0 - omega_) * strict[s];
    out[order_[s]] = c;
  }
  return out;
}

std::vector<double> indicator_matvec(std::span<const double> x, std::span<const double> v,
                                     double omega) {
  if (x.size() != v.size()) throw InvalidArgument("indicator_matvec: length mismatch");
  return IndicatorMatrix(x, omega).apply(v);
}

namespace {

std::span<const double> as_span(const DenseVector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

DenseVector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const DenseVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// State shared by every coefficient's H-terms: the sorting permutations of
// X and Y and the split of fitted values into rank and non-rank parts.
class VarianceContext {
 public:
  explicit VarianceContext(const RankRegressionFit& fit) : fit_(fit) {
    const auto& d = fit.design;
    const auto n = static_cast<Eigen::Index>(d.n());
    if (d.response_ranked) iy_.emplace(d.response_raw, d.omega);
    if (d.regressor_ranked) ix_.emplace(d.regressor_raw, d.omega);
    rank_slope_ = DenseVector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index c = d.rank_column_of_row[static_cast<std::size_t>(k)];
      if (c >= 0) rank_slope_(k) = fit.coefficients(c);
    }
    nonrank_fitted_ = fit.fitted;
    if (d.regressor_ranked) {
      nonrank_fitted_ -= rank_slope_.cwiseProduct(to_vector(d.regressor_ranks));
    }
  }

  HTerms compute(const DenseMatrix& projection, Eigen::Index j) const {
    const auto& d = fit_.design;
    const auto n = static_cast<Eigen::Index>(d.n());
    const double nd = static_cast<double>(n);
    const DenseVector u = projection.col(j);
    const DenseVector nu = d.z * u;
    const DenseVector& eps = fit_.residuals;

    HTerms h;
    h.sigma2_nu = nu.squaredNorm() / nd;
    h.h1 = eps.cwiseProduct(nu);

    // H2: eps_k with R^Y_k -> I(Y_i, Y_k) and R^X_k -> I(X_i, X_k).
    DenseVector h2;
    if (iy_) {
      h2 = to_vector(iy_->apply(as_span(nu)));
    } else {
      h2 = DenseVector::Constant(n, d.response.dot(nu));
    }
    if (ix_) {
      const DenseVector weighted = rank_slope_.cwiseProduct(nu);
      h2 -= to_vector(ix_->apply(as_span(weighted)));
    }
    h2.array() -= nonrank_fitted_.dot(nu);
    h.h2 = h2 / nd;

    // H3: nu_k with R^X_k -> I(X_i, X_k).
    if (ix_) {
      DenseVector loading = DenseVector::Zero(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index c = d.rank_column_of_row[static_cast<std::size_t>(k)];
        if (c >= 0) loading(k) = u(c);
      }
      const DenseVector rest = nu - loading.cwiseProduct(to_vector(d.regressor_ranks));
      const DenseVector weighted = loading.cwiseProduct(eps);
      DenseVector h3 = to_vector(ix_->apply(as_span(weighted)));
      h3.array() += eps.dot(rest);
      h.h3 = h3 / nd;
    } else {
      h.h3 = DenseVector::Constant(n, eps.dot(nu) / nd);
    }
    return h;
  }

 private:
  const RankRegressionFit& fit_;
  std::optional<IndicatorMatrix> iy_;
  std::optional<IndicatorMatrix> ix_;
  DenseVector rank_slope_;      // coefficient multiplying R^X_k in row k
  DenseVector nonrank_fitted_;  // fitted values minus the rank part
};

}  // namespace

HTerms h_terms(const RankRegressionFit& fit, const DenseMatrix& projection, Eigen::Index j) {
  if (j < 0 || j >= projection.cols()) throw InvalidArgument("coefficient index out of range");
  return VarianceContext(fit).compute(projection, j);
}

CorrectedCovariance corrected_vcov(const RankRegressionFit& fit) {
  const DenseMatrix projection = projection_coefficients(fit);
  const VarianceContext ctx(fit);
  const Eigen::Index p = projection.cols();
  const auto n = static_cast<Eigen::Index>(fit.n());
  const double nd = static_cast<double>(n);

  DenseMatrix influence(n, p);
  CorrectedCovariance out;
  out.sigma2_nu.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const HTerms h = ctx.compute(projection, j);
    influence.col(j) = h.total();
    out.sigma2_nu(j) = h.sigma2_nu;
  }
  const DenseMatrix cross = influence.transpose() * influence;
  out.vcov.resize(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = 0; k < p; ++k) {
      out.vcov(j, k) = cross(j, k) / (nd * out.sigma2_nu(j) * out.sigma2_nu(k)) / nd;
    }
  }
  out.vcov = 0.5 * (out.vcov + out.vcov.transpose());
  return out;
}

std::string significance_stars(double p_value) {
  if (p_value <= 0.001) return "***";
  if (p_value <= 0.01) return "**";
  if (p_value <= 0.05) return "*";
  if (p_value <= 0.1) return ".";
  return "";
}

std::vector<CoefficientRow> summarize(const RankRegressionFit& fit,
                                      const CorrectedCovariance& cov) {
  std::vector<CoefficientRow> rows;
  const auto names = fit.coefficient_names();
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    CoefficientRow row;
    row.name = names[static_cast<std::size_t>(j)];
    row.estimate = fit.coefficients(j);
    row.std_error = std::sqrt(std::max(cov.vcov(j, j), 0.0));
    if (row.std_error > 0.0) {
      row.z_value = row.estimate / row.std_error;
      row.p_value = std::erfc(std::fabs(row.z_value) / std::sqrt(2.0));
    } else {
      row.z_value = std::numeric_limits<double>::infinity();
      row.p_value = 0.0;
    }
    row.signif = significance_stars(row.p_value);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CoefficientRow> summarize(const RankRegressionFit& fit) {
  return summarize(fit, corrected_vcov(fit));
}

std::vector<CoefficientInterval> confint(const RankRegressionFit& fit,
                                         const CorrectedCovariance& cov, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidArgument("confidence level must lie strictly between 0 and 1");
  }
  const double q = normal_quantile(0.5 * (1.0 + level));
  const auto names = fit.coefficient_names();
  std::vector<CoefficientInterval> out;
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    const double se = std::sqrt(std::max(cov.vcov(j, j), 0.0));
    const double est = fit.coefficients(j);
    out.push_back({names[static_cast<std::size_t>(j)], est - q * se, est + q * se});
  }
  return out;
}

std::vector<CoefficientInterval> confint(const RankRegressionFit& fit, double level) {
  return confint(fit, corrected_vcov(fit), level);
}

}  // namespace rankinfer
