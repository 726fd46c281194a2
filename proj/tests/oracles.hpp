#pragma once

// Slow, independent reference implementations used only by the tests.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Gauss-Jordan with partial pivoting.
inline Matrix gauss_jordan_inverse(Matrix a) {
  const Eigen::Index n = a.rows();
  Matrix inv = Matrix::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::fabs(a(r, c)) > std::fabs(a(piv, c))) piv = r;
    }
    if (a(piv, c) == 0.0) throw std::runtime_error("singular");
    a.row(c).swap(a.row(piv));
    inv.row(c).swap(inv.row(piv));
    const double d = a(c, c);
    a.row(c) /= d;
    inv.row(c) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      if (f == 0.0) continue;
      a.row(r) -= f * a.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

inline Vector ols(const Matrix& z, const Vector& y) {
  return gauss_jordan_inverse(z.transpose() * z) * (z.transpose() * y);
}

// Coefficients of column j on the remaining columns, in their order.
inline Vector projection_gamma(const Matrix& z, Eigen::Index j) {
  Matrix rest(z.rows(), z.cols() - 1);
  for (Eigen::Index c = 0, k = 0; c < z.cols(); ++c) {
    if (c != j) rest.col(k++) = z.col(c);
  }
  return ols(rest, z.col(j));
}

inline double indicator(double u, double v, double omega) {
  return omega * (u <= v ? 1.0 : 0.0) + (1.0 - omega) * (u < v ? 1.0 : 0.0);
}

// Integer ranks by counting.
inline std::vector<double> rank(const std::vector<double>& x, double omega, bool increasing) {
  const std::size_t n = x.size();
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j) {
    double weak = 0, strict = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool le = increasing ? x[k] <= x[j] : x[k] >= x[j];
      const bool lt = increasing ? x[k] < x[j] : x[k] > x[j];
      weak += le;
      strict += lt;
    }
    r[j] = omega * weak + (1.0 - omega) * strict + 1.0 - omega;
  }
  return r;
}

// Fractional increasing ranks: (1/n) sum_k I(x_k, x_j) + (1 - omega) / n.
inline std::vector<double> frank_increasing(const std::vector<double>& x, double omega) {
  const std::size_t n = x.size();
  std::vector<double> r(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) r[j] += indicator(x[k], x[j], omega);
    r[j] = (r[j] + 1.0 - omega) / static_cast<double>(n);
  }
  return r;
}

inline std::vector<double> indicator_product(const std::vector<double>& x,
                                             const std::vector<double>& v, double omega) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i] += indicator(x[i], x[j], omega) * v[j];
  }
  return out;
}

// 2^{-s} sum_{i=x}^{s} C(s, i) with exact integer arithmetic (s <= 62).
inline double binomial_tail(std::uint64_t x, std::uint64_t s) {
  std::vector<std::uint64_t> row{1};
  for (std::uint64_t k = 1; k <= s; ++k) {
    std::vector<std::uint64_t> next(k + 1, 1);
    for (std::uint64_t i = 1; i < k; ++i) next[i] = row[i - 1] + row[i];
    row = std::move(next);
  }
  std::uint64_t num = 0;
  for (std::uint64_t i = x; i <= s; ++i) num += row[i];
  return std::ldexp(static_cast<double>(num), -static_cast<int>(s));
}

// Same sum for s <= 125 with 128-bit integers, returned as long double.
inline long double binomial_tail_wide(unsigned x, unsigned s) {
  using u128 = unsigned __int128;
  u128 binom = 1, num = 0;
  for (unsigned i = 0; i <= s; ++i) {
    if (i >= x) num += binom;
    binom = binom * (s - i) / (i + 1);
  }
  const auto hi = static_cast<long double>(static_cast<std::uint64_t>(num >> 64));
  const auto lo = static_cast<long double>(static_cast<std::uint64_t>(num));
  return std::ldexp(hi, 64 - static_cast<int>(s)) + std::ldexp(lo, -static_cast<int>(s));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// White's HC0 sandwich, (Z'Z)^{-1} Z' diag(e^2) Z (Z'Z)^{-1}.
inline Matrix hc0(const Matrix& z, const Vector& resid) {
  const Matrix bread = gauss_jordan_inverse(z.transpose() * z);
  Matrix meat = Matrix::Zero(z.cols(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    meat += resid(i) * resid(i) * z.row(i).transpose() * z.row(i);
  }
  return bread * meat * bread;
}

// sigma^2 (Z'Z)^{-1} with sigma^2 = RSS / (n - k).
inline Matrix homoskedastic_vcov(const Matrix& z, const Vector& resid) {
  const double s2 = resid.squaredNorm() / static_cast<double>(z.rows() - z.cols());
  return s2 * gauss_jordan_inverse(z.transpose() * z);
}

// Everything the double-loop variance oracle needs about a design.
struct RankDesign {
  Matrix z;
  std::vector<double> y_raw;
  bool y_ranked = false;
  std::vector<double> x_raw;  // empty when no regressor is ranked
  // Column of z holding R^X for each row, -1 if none.
  std::vector<Eigen::Index> rank_col;
  double omega = 1.0;
};

// Corrected covariance, divided by n, evaluated by O(n^2) loops over the
// influence terms with every estimated rank in the residual (H2) or in the
// projection residual (H3) replaced by the indicator I(V_i, V_k).
inline Matrix naive_corrected_vcov(const RankDesign& d) {
  const Eigen::Index n = d.z.rows();
  const Eigen::Index p = d.z.cols();
  const double nd = static_cast<double>(n);
  const double w = d.omega;
  const bool x_ranked = !d.x_raw.empty();

  Vector y(n);
  const std::vector<double> ry = d.y_ranked ? frank_increasing(d.y_raw, w) : d.y_raw;
  for (Eigen::Index i = 0; i < n; ++i) y(i) = ry[static_cast<std::size_t>(i)];
  const Vector beta = ols(d.z, y);
  const Vector eps = y - d.z * beta;

  Matrix h(n, p);
  Vector s2(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Vector g = projection_gamma(d.z, j);
    Vector u = Vector::Zero(p);  // nu = Z u
    u(j) = 1.0;
    for (Eigen::Index c = 0, k = 0; c < p; ++c) {
      if (c != j) u(c) = -g(k++);
    }
    const Vector nu = d.z * u;
    s2(j) = nu.squaredNorm() / nd;

    for (Eigen::Index i = 0; i < n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      double h2 = 0.0, h3 = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const auto sk = static_cast<std::size_t>(k);
        const Eigen::Index rc = d.rank_col[sk];
        // a_i(k): residual with ranks substituted.
        double a = d.y_ranked ? indicator(d.y_raw[si], d.y_raw[sk], w) : d.y_raw[sk];
        for (Eigen::Index c = 0; c < p; ++c) {
          const double zkc =
              (x_ranked && c == rc) ? indicator(d.x_raw[si], d.x_raw[sk], w) : d.z(k, c);
          a -= beta(c) * zkc;
        }
        // b_i(k): projection residual with ranks substituted.
        double b = 0.0;
        for (Eigen::Index c = 0; c < p; ++c) {
          const double zkc =
              (x_ranked && c == rc) ? indicator(d.x_raw[si], d.x_raw[sk], w) : d.z(k, c);
          b += u(c) * zkc;
        }
        h2 += a * nu(k);
        h3 += eps(k) * b;
      }
      h(i, j) = eps(i) * nu(i) + h2 / nd + h3 / nd;
    }
  }

  Matrix v(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = 0; k < p; ++k) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) acc += h(i, j) * h(i, k);
      v(j, k) = acc / (nd * s2(j) * s2(k)) / nd;
    }
  }
  return v;
}

// Draws with heavy ties: values from a pool of `distinct` levels.
inline std::vector<double> tied_sample(std::mt19937_64& gen, std::size_t n, std::size_t distinct) {
  std::uniform_int_distribution<std::size_t> pick(0, distinct - 1);
  std::vector<double> x(n);
  for (auto& v : x) v = static_cast<double>(pick(gen)) * 0.37 - 1.0;
  return x;
}

}  // namespace oracle
