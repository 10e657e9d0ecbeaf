#ifndef MCARTEST_NUMERICS_HPP
#define MCARTEST_NUMERICS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <span>
#include <vector>

namespace mcar {

enum class VarMode { unbiased, ml };

double column_mean(std::span<const double> x);
double column_var(std::span<const double> x, VarMode mode);

// Covariance of the columns of `cols` (n×m). Divides by n-1 or n.
Eigen::MatrixXd cov_matrix(const Eigen::MatrixXd& cols, VarMode mode);

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Eigenvalues at or below pd_threshold(λ) are treated as zero.
double pd_threshold(const Eigen::VectorXd& eigenvalues);

// Both require a symmetric positive-definite argument and throw
// SingularMatrix (carrying the offending eigenvalue) otherwise.
Eigen::MatrixXd inv_sqrt(const Eigen::MatrixXd& a);
Eigen::MatrixXd inverse(const Eigen::MatrixXd& a);

// Smallest eigenvalue and ratio λmax/λmin, for diagnostics.
struct Spectrum {
  double min_eigenvalue;
  double condition_number;
};
Spectrum spectrum(const Eigen::MatrixXd& a);

double chi2_sf(double x, int df);
double chi2_cdf(double x, int df);
double chi2_quantile(double p, int df);

double normal_cdf(double x);
double normal_quantile(double p);

// Lower-tail quantile of Gamma(shape, scale).
double gamma_quantile(double p, double shape, double scale);

// 1-based ranks, ties get the average of the ranks they span.
std::vector<double> ranks(std::span<const double> x);

// Kendall's tau-a, O(n²).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Sup distance between the empirical CDF of `sample` and `cdf`.
template <typename Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Wilson score interval for k successes out of n at ~95%.
struct Interval {
  double low;
  double high;
};
Interval wilson_interval(long k, long n, double z = 1.959963984540054);

}  // namespace mcar

#endif
