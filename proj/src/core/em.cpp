#include <cmath>
#include <map>
#include <numbers>

#include "mcartest/error.hpp"
#include "mcartest/mcar_tests.hpp"

namespace mcar {

namespace {

struct Pattern {
  std::vector<int> obs;
  std::vector<int> mis;
  std::vector<Eigen::Index> rows;
};

// Rows grouped by their observation pattern; all-missing rows are dropped.
std::vector<Pattern> group_patterns(const Dataset& ds) {
  std::map<std::vector<bool>, Pattern> groups;
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    std::vector<bool> key(static_cast<std::size_t>(ds.cols()));
    bool any = false;
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
      key[static_cast<std::size_t>(j)] = ds.observed(i, j);
      any = any || ds.observed(i, j);
    }
    if (!any) continue;
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) {
      for (Eigen::Index j = 0; j < ds.cols(); ++j) {
        (ds.observed(i, j) ? it->second.obs : it->second.mis).push_back(static_cast<int>(j));
      }
    }
    it->second.rows.push_back(i);
  }
  std::vector<Pattern> out;
  out.reserve(groups.size());
  // Most-observed pattern first; the map's key order makes this deterministic.
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) out.push_back(std::move(it->second));
  return out;
}

Eigen::MatrixXd sub(const Eigen::MatrixXd& m, const std::vector<int>& r, const std::vector<int>& c) {
  Eigen::MatrixXd out(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = m(r[i], c[j]);
  return out;
}

Eigen::VectorXd sub(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

// Cholesky of an observed block, with a ridge of 1e-8·trace/k on failure.
Eigen::LLT<Eigen::MatrixXd> factor_block(Eigen::MatrixXd s, bool& ridge_used) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    const double dmax = diag.maxCoeff();
    ok = diag.minCoeff() > 1e-7 * std::max(dmax, 1e-300);
  }
  if (!ok) {
    ridge_used = true;
    const double k = static_cast<double>(s.rows());
    const double ridge = 1e-8 * std::max(s.trace(), 1e-300) / k;
    s.diagonal().array() += ridge;
    llt.compute(s);
    if (llt.info() != Eigen::Success) {
      throw SingularMatrix("EM: observed-block covariance is singular even after ridge", 0.0);
    }
  }
  return llt;
}

struct EStep {
  double loglik = 0.0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd cross;
  Eigen::MatrixXd filled;
};

EStep e_step(const Dataset& ds, const std::vector<Pattern>& patterns, const Eigen::VectorXd& mu,
             const Eigen::MatrixXd& sigma, bool& ridge_used) {
  const Eigen::Index d = ds.cols();
  EStep out;
  out.sum = Eigen::VectorXd::Zero(d);
  out.cross = Eigen::MatrixXd::Zero(d, d);
  out.filled = ds.values();
  const double log2pi = std::log(2.0 * std::numbers::pi);

  for (const auto& pat : patterns) {
    const auto k = static_cast<Eigen::Index>(pat.obs.size());
    const auto llt = factor_block(sub(sigma, pat.obs, pat.obs), ridge_used);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Eigen::VectorXd mu_o = sub(mu, pat.obs);

    Eigen::MatrixXd reg;       // Σ_MO Σ_OO⁻¹
    Eigen::MatrixXd cond_cov;  // Σ_MM - Σ_MO Σ_OO⁻¹ Σ_OM
    Eigen::VectorXd mu_m;
    if (!pat.mis.empty()) {
      const Eigen::MatrixXd s_mo = sub(sigma, pat.mis, pat.obs);
      reg = llt.solve(s_mo.transpose()).transpose();
      cond_cov = sub(sigma, pat.mis, pat.mis) - reg * s_mo.transpose();
      mu_m = sub(mu, pat.mis);
    }

    for (Eigen::Index i : pat.rows) {
      Eigen::VectorXd xo(k);
      for (Eigen::Index a = 0; a < k; ++a) xo(a) = ds.values()(i, pat.obs[a]);
      const Eigen::VectorXd resid = xo - mu_o;
      out.loglik += -0.5 * (static_cast<double>(k) * log2pi + logdet + resid.dot(llt.solve(resid)));

      Eigen::VectorXd row = out.filled.row(i).transpose();
      if (!pat.mis.empty()) {
        const Eigen::VectorXd xm = mu_m + reg * resid;
        for (std::size_t b = 0; b < pat.mis.size(); ++b) row(pat.mis[b]) = xm(b);
        out.filled.row(i) = row.transpose();
      }
      out.sum += row;
      out.cross.noalias() += row * row.transpose();
      for (std::size_t a = 0; a < pat.mis.size(); ++a)
        for (std::size_t b = 0; b < pat.mis.size(); ++b)
          out.cross(pat.mis[a], pat.mis[b]) += cond_cov(a, b);
    }
  }
  return out;
}

}  // namespace

EmResult em_mvn(const Dataset& ds, const EmOptions& opts) {
  const auto patterns = group_patterns(ds);
  Eigen::Index n = 0;
  for (const auto& p : patterns) n += static_cast<Eigen::Index>(p.rows.size());
  const Eigen::Index d = ds.cols();
  if (n <= d) throw DataError("EM needs more rows than columns");

  Eigen::VectorXd mu(d);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double s = 0.0, ss = 0.0;
    Eigen::Index m = 0;
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      if (!ds.observed(i, j)) continue;
      s += ds.values()(i, j);
      ++m;
    }
    if (m == 0) throw DataError("EM: column '" + ds.column_names()[j] + "' has no observed value");
    mu(j) = s / static_cast<double>(m);
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      if (ds.observed(i, j)) ss += (ds.values()(i, j) - mu(j)) * (ds.values()(i, j) - mu(j));
    }
    const double v = ss / static_cast<double>(m);
    sigma(j, j) = v > 0.0 ? v : 1.0;
  }

  EmResult res;
  const double nn = static_cast<double>(n);
  auto m_step = [&](const EStep& e) {
    res.mu = e.sum / nn;
    Eigen::MatrixXd s = e.cross / nn - res.mu * res.mu.transpose();
    res.sigma = 0.5 * (s + s.transpose());
  };

  if (patterns.size() == 1 && patterns.front().mis.empty()) {
    // Nothing to impute: one M-step is the ML estimate.
    bool ridge = false;
    m_step(e_step(ds, patterns, mu, sigma, ridge));
    res.iterations = 1;
    res.converged = true;
    EStep fin = e_step(ds, patterns, res.mu, res.sigma, res.ridge_used);
    res.loglik.push_back(fin.loglik);
    res.filled = std::move(fin.filled);
    return res;
  }

  res.mu = mu;
  res.sigma = sigma;
  for (int it = 1; it <= opts.max_iter; ++it) {
    EStep e = e_step(ds, patterns, res.mu, res.sigma, res.ridge_used);
    res.loglik.push_back(e.loglik);
    m_step(e);
    res.iterations = it;
    const auto m = res.loglik.size();
    if (m >= 2 && res.loglik[m - 1] - res.loglik[m - 2] < opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.filled = e_step(ds, patterns, res.mu, res.sigma, res.ridge_used).filled;
  return res;
}

TestResult d2_general(const Dataset& ds, double alpha, const EmOptions& opts) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw SpecError("alpha must be in (0, 1]");
  const auto patterns = group_patterns(ds);
  if (patterns.size() < 2) throw DataError("test undefined for one pattern");
  const EmResult em = em_mvn(ds, opts);

  double stat = 0.0;
  long df = -static_cast<long>(ds.cols());
  for (const auto& pat : patterns) {
    const auto k = static_cast<Eigen::Index>(pat.obs.size());
    Eigen::VectorXd ybar = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i : pat.rows)
      for (Eigen::Index a = 0; a < k; ++a) ybar(a) += ds.values()(i, pat.obs[a]);
    const double nj = static_cast<double>(pat.rows.size());
    ybar /= nj;
    const Eigen::VectorXd diff = ybar - sub(em.mu, pat.obs);
    stat += nj * diff.dot(inverse(sub(em.sigma, pat.obs, pat.obs)) * diff);
    df += static_cast<long>(k);
  }
  if (df < 1) throw DataError("d2_general: non-positive degrees of freedom");

  TestResult res;
  res.method = Method::d2_general;
  res.statistic = stat;
  res.df = static_cast<int>(df);
  res.p_value = chi2_sf(std::max(stat, 0.0), res.df);
  res.alpha = alpha;
  res.reject = res.p_value <= alpha;
  res.diagnostics = {{"patterns", static_cast<double>(patterns.size())},
                     {"em_iterations", static_cast<double>(em.iterations)},
                     {"em_converged", em.converged ? 1.0 : 0.0},
                     {"em_ridge", em.ridge_used ? 1.0 : 0.0}};
  return res;
}

}  // namespace mcar
