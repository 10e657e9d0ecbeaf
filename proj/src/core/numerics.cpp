#include "mcartest/numerics.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mcartest/error.hpp"

namespace mcar {

double column_mean(std::span<const double> x) {
  if (x.empty()) throw DataError("mean of an empty column");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double column_var(std::span<const double> x, VarMode mode) {
  const std::size_t n = x.size();
  if (mode == VarMode::unbiased ? n < 2 : n < 1) {
    throw DataError("too few observations for a variance");
  }
  const double m = column_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(mode == VarMode::unbiased ? n - 1 : n);
}

Eigen::MatrixXd cov_matrix(const Eigen::MatrixXd& cols, VarMode mode) {
  const Eigen::Index n = cols.rows();
  if (n < 2) throw DataError("covariance needs at least two rows");
  Eigen::MatrixXd centered = cols.rowwise() - cols.colwise().mean();
  Eigen::MatrixXd s = centered.transpose() * centered;
  s /= static_cast<double>(mode == VarMode::unbiased ? n - 1 : n);
  // exact symmetry
  return 0.5 * (s + s.transpose());
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double pd_threshold(const Eigen::VectorXd& eigenvalues) {
  return 1e-10 * std::max(eigenvalues.maxCoeff(), 1.0);
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> checked_eigen(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw DataError("expected a non-empty square matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw DataError("eigendecomposition did not converge");
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > pd_threshold(es.eigenvalues()))) {
    std::ostringstream msg;
    msg << "covariance matrix is singular (smallest eigenvalue " << lmin
        << "); check for a constant column, an incomplete column with no missing or no "
           "observed values, or perfectly correlated complete columns";
    throw SingularMatrix(msg.str(), lmin);
  }
  return es;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Eigen::MatrixXd inv_sqrt(const Eigen::MatrixXd& a) {
  auto es = checked_eigen(a);
  const auto& v = es.eigenvectors();
  Eigen::VectorXd d = es.eigenvalues().array().rsqrt();
  return symmetrize(v * d.asDiagonal() * v.transpose());
}

Eigen::MatrixXd inverse(const Eigen::MatrixXd& a) {
  auto es = checked_eigen(a);
  const auto& v = es.eigenvectors();
  Eigen::VectorXd d = es.eigenvalues().cwiseInverse();
  return symmetrize(v * d.asDiagonal() * v.transpose());
}

Spectrum spectrum(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  return {lmin, lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity()};
}

double chi2_sf(double x, int df) {
  if (df < 1 || !(x >= 0.0)) throw SpecError("chi2_sf: need x >= 0 and df >= 1");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double chi2_cdf(double x, int df) {
  if (df < 1 || !(x >= 0.0)) throw SpecError("chi2_cdf: need x >= 0 and df >= 1");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double p, int df) {
  if (df < 1 || !(p > 0.0 && p < 1.0)) throw SpecError("chi2_quantile: need 0 < p < 1, df >= 1");
  return 2.0 * boost::math::gamma_p_inv(0.5 * df, p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw SpecError("normal_quantile: need 0 < p < 1");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double gamma_quantile(double p, double shape, double scale) {
  if (!(p >= 0.0 && p < 1.0) || shape <= 0 || scale <= 0) {
    throw SpecError("gamma_quantile: bad arguments");
  }
  if (p == 0.0) return 0.0;
  return scale * boost::math::gamma_p_inv(shape, p);
}

std::vector<double> ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw DataError("kendall_tau: need two equal-length samples");
  long long s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = (x[i] - x[j]) * (y[i] - y[j]);
      s += (a > 0) - (a < 0);
    }
  }
  return static_cast<double>(s) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

Interval wilson_interval(long k, long n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace mcar
