#include "rankinfer/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "rankinfer/errors.hpp"

namespace rankinfer {

QRFactorization::QRFactorization(const DenseMatrix& z) : rows_(z.rows()) {
  if (z.rows() < z.cols() || z.cols() == 0) {
    throw RankDeficient("design matrix has " + std::to_string(z.rows()) + " rows and " +
                        std::to_string(z.cols()) + " columns; need rows >= cols > 0");
  }
  if (!z.allFinite()) throw NonFinite("design matrix contains non-finite entries");
  qr_.compute(z);
  r_ = qr_.matrixQR().topRows(z.cols()).triangularView<Eigen::Upper>();
  const DenseVector diag = r_.diagonal().cwiseAbs();
  const double largest = diag.maxCoeff();
  const double smallest = diag.minCoeff();
  if (!(largest > 0.0) || smallest <= kRankTolerance * largest) {
    throw RankDeficient("design matrix is rank deficient (collinear regressors)");
  }
}

DenseMatrix QRFactorization::thin_q() const {
  return qr_.householderQ() * DenseMatrix::Identity(rows_, cols());
}

DenseVector QRFactorization::solve(const DenseVector& y) const {
  DenseVector qty = qr_.householderQ().transpose() * y;
  return r_.triangularView<Eigen::Upper>().solve(qty.head(cols()));
}

QRFactorization qr_decompose(const DenseMatrix& z) { return QRFactorization(z); }

DenseMatrix inverse_from_qr(const QRFactorization& f) {
  const Eigen::Index p = f.cols();
  DenseMatrix r_inv = f.r().triangularView<Eigen::Upper>().solve(DenseMatrix::Identity(p, p));
  DenseMatrix inv = r_inv * r_inv.transpose();
  return 0.5 * (inv + inv.transpose());
}

DenseMatrix cholesky_psd(const DenseMatrix& s, double tol) {
  if (s.rows() != s.cols()) throw InvalidArgument("covariance matrix must be square");
  if (!s.allFinite()) throw NonFinite("covariance matrix contains non-finite entries");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw InvalidArgument("covariance matrix is not symmetric");
  }
  const DenseMatrix sym = 0.5 * (s + s.transpose());

  Eigen::LLT<DenseMatrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    DenseMatrix l = llt.matrixL();
    if (l.allFinite()) return l;
  }

  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NotPSD("eigendecomposition of covariance failed");
  DenseVector values = eig.eigenvalues();
  const double largest = values.maxCoeff();
  if (values.minCoeff() < -1e-8 * std::max(largest, 0.0)) {
    throw NotPSD("covariance matrix is not positive semidefinite (min eigenvalue " +
                 std::to_string(values.minCoeff()) + ")");
  }
  values = values.cwiseMax(0.0).cwiseSqrt();
  // B B' = S with B = V sqrt(Lambda); B' = QR gives S = R'R, so L = R'.
  const DenseMatrix bt = (eig.eigenvectors() * values.asDiagonal()).transpose();
  Eigen::HouseholderQR<DenseMatrix> qr(bt);
  DenseMatrix upper = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < upper.rows(); ++i) {
    if (upper(i, i) < 0.0) upper.row(i) *= -1.0;
  }
  return upper.transpose();
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

SeededRng SeededRng::substream(std::uint64_t seed, std::uint64_t stream) {
  return SeededRng(splitmix64(seed ^ splitmix64(stream + 1)));
}

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double SeededRng::normal() { return normal_quantile(uniform_open()); }

DenseMatrix mvn_sample(const DenseMatrix& l, SeededRng& rng, std::size_t m) {
  if (l.rows() != l.cols()) throw InvalidArgument("mvn_sample: factor must be square");
  const Eigen::Index p = l.rows();
  DenseMatrix xi(p, static_cast<Eigen::Index>(m));
  for (Eigen::Index draw = 0; draw < xi.cols(); ++draw) {
    for (Eigen::Index j = 0; j < p; ++j) xi(j, draw) = rng.normal();
  }
  DenseMatrix out = (l.triangularView<Eigen::Lower>() * xi).transpose();
  return out;
}

namespace {

// log of 2^{-s} sum_{i=x}^{s} C(s, i) for x > s / 2, where terms decrease
// from the first one onward. Extended precision keeps lgamma's absolute
// error well below double rounding.
long double log_upper_tail(std::uint64_t x, std::uint64_t s) {
  const long double sd = static_cast<long double>(s);
  const long double xd = static_cast<long double>(x);
  const long double log_first = std::lgamma(sd + 1.0L) - std::lgamma(xd + 1.0L) -
                                std::lgamma(sd - xd + 1.0L);
  long double term = 1.0L, sum = 1.0L;
  for (std::uint64_t i = x; i < s; ++i) {
    term *= static_cast<long double>(s - i) / static_cast<long double>(i + 1);
    sum += term;
    if (term < 1e-22L * sum) break;
  }
  return log_first + std::log(sum) - sd * std::log(2.0L);
}

}  // namespace

double log_binom_tail(std::uint64_t x, std::uint64_t s) {
  if (x > s) throw InvalidArgument("log_binom_tail: x must not exceed s");
  if (x == 0) return 0.0;
  if (2 * x > s) return static_cast<double>(log_upper_tail(x, s));
  // Tail of at least one half: one minus the mirrored upper tail.
  return static_cast<double>(std::log1p(-std::exp(log_upper_tail(s - x + 1, s))));
}

std::vector<double> grouped_cumsum(std::span<const double> v,
                                   std::span<const std::size_t> group_ids,
                                   Placement placement) {
  if (v.size() != group_ids.size()) {
    throw InvalidArgument("grouped_cumsum: values and group ids differ in length");
  }
  const std::size_t n = v.size();
  std::vector<double> out(n, 0.0);
  double running = 0.0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    double run_sum = v[start];
    while (end < n && group_ids[end] == group_ids[start]) run_sum += v[end++];
    if (placement == Placement::first) {
      running += run_sum;
      std::fill(out.begin() + start, out.begin() + end, running);
    } else {
      std::fill(out.begin() + start, out.begin() + end - 1, running);
      running += run_sum;
      out[end - 1] = running;
    }
    start = end;
  }
  return out;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("RANKINFER_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && value > 0) return static_cast<std::size_t>(value);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(n / 64, 1));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace rankinfer
