#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rankinfer {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

// Thin Householder QR of a tall design matrix. Construction fails with
// RankDeficient when the smallest |R_ii| is below 1e-10 times the largest.
class QRFactorization {
 public:
  explicit QRFactorization(const DenseMatrix& z);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return r_.cols(); }

  // Upper-triangular cols() x cols() factor.
  const DenseMatrix& r() const { return r_; }

  // Thin Q with Q'Q = I.
  DenseMatrix thin_q() const;

  // Least-squares solution of Z b = y.
  DenseVector solve(const DenseVector& y) const;

 private:
  Eigen::Index rows_;
  Eigen::HouseholderQR<DenseMatrix> qr_;
  DenseMatrix r_;
};

inline constexpr double kRankTolerance = 1e-10;

QRFactorization qr_decompose(const DenseMatrix& z);

// (Z'Z)^{-1} = R^{-1} R^{-T}, symmetrized.
DenseMatrix inverse_from_qr(const QRFactorization& f);

// Lower-triangular L with LL' = S. Semidefinite input falls back to an
// eigendecomposition with eigenvalues clipped at zero, provided the most
// negative one is no smaller than -1e-8 times the largest.
DenseMatrix cholesky_psd(const DenseMatrix& s, double tol = 1e-10);

// Standard normal lower-tail probability.
double normal_cdf(double x);

// Standard normal quantile, Wichura's AS 241 (PPND16), relative accuracy
// about 1e-16 on (0, 1).
double normal_quantile(double p);

// Deterministic random stream. Raw bits come from std::mt19937_64, whose
// output sequence is fixed by the C++ standard. Uniforms take the top 53
// bits; normals apply normal_quantile to an open-interval uniform, so the
// whole pipeline avoids implementation-defined std distributions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  // Independent stream for parallel work: the engine is seeded with
  // splitmix64(seed ^ splitmix64(stream + 1)).
  static SeededRng substream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// m x p matrix whose rows are L * xi with xi drawn row by row from rng.
DenseMatrix mvn_sample(const DenseMatrix& l, SeededRng& rng, std::size_t m);

// log( 2^{-s} * sum_{i=x}^{s} C(s, i) ), evaluated in log space.
double log_binom_tail(std::uint64_t x, std::uint64_t s);

enum class Placement { first, last };

// Within each contiguous run of equal group ids the run sum is moved to the
// run's first or last slot (others zeroed); the cumulative sum of the result
// is returned.
std::vector<double> grouped_cumsum(std::span<const double> v,
                                   std::span<const std::size_t> group_ids,
                                   Placement placement);

// Worker count: RANKINFER_THREADS if set and positive, otherwise
// std::thread::hardware_concurrency().
std::size_t worker_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are
// disjoint, so bodies that write only to their own range are deterministic.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace rankinfer
