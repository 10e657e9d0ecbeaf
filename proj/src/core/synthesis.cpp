#include "mcartest/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcartest/error.hpp"
#include "mcartest/numerics.hpp"

namespace mcar {

std::string margin_name(Margin m) {
  switch (m) {
    case Margin::exp1: return "exp";
    case Margin::chisq4: return "chisq4";
    case Margin::uniform: return "uniform";
  }
  return "?";
}

Margin parse_margin(const std::string& s) {
  if (s == "exp" || s == "exp1") return Margin::exp1;
  if (s == "chisq4" || s == "chisq") return Margin::chisq4;
  if (s == "uniform") return Margin::uniform;
  throw SpecError("unknown margin '" + s + "' (expected exp, chisq4 or uniform)");
}

std::string mechanism_name(MechanismKind k) {
  switch (k) {
    case MechanismKind::mcar: return "mcar";
    case MechanismKind::mar_1_to_x: return "mar_1_to_x";
    case MechanismKind::mar_rank: return "mar_rank";
    case MechanismKind::mar_mean: return "mar_mean";
  }
  return "?";
}

MechanismKind parse_mechanism(const std::string& s) {
  if (s == "mcar") return MechanismKind::mcar;
  if (s == "mar_1_to_x") return MechanismKind::mar_1_to_x;
  if (s == "mar_rank") return MechanismKind::mar_rank;
  if (s == "mar_mean") return MechanismKind::mar_mean;
  throw SpecError("unknown mechanism '" + s +
                  "' (expected mcar, mar_1_to_x, mar_rank or mar_mean)");
}

Margin DistributionSpec::margin(std::size_t column) const {
  if (margins.empty()) return Margin::uniform;
  return margins.size() == 1 ? margins.front() : margins.at(column);
}

std::string DistributionSpec::describe() const {
  if (kind == DistributionKind::std_normal) return "std_normal";
  std::string s = "clayton(" + format_double(theta) + ")/";
  if (margins.empty()) return s + "uniform";
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (i) s += "+";
    s += margin_name(margins[i]);
  }
  return s;
}

std::string MechanismSpec::describe() const {
  if (kind == MechanismKind::mar_1_to_x) return "mar_1_to_" + format_double(odds);
  return mechanism_name(kind);
}

void validate(const DistributionSpec& spec) {
  if (spec.kind == DistributionKind::clayton && !(spec.theta > 0.0)) {
    throw SpecError("clayton theta must be positive");
  }
}

void validate(const MechanismSpec& spec, int p, int q) {
  auto check_prob = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw SpecError(std::string(what) + " must be in [0, 1]");
  };
  if (spec.has_prob()) check_prob(spec.prob, "mechanism.prob");
  if (spec.kind == MechanismKind::mar_1_to_x) {
    if (!(spec.odds >= 1.0)) throw SpecError("mechanism.odds must be >= 1");
    if (2.0 * spec.prob * spec.odds / (spec.odds + 1.0) > 1.0 + 1e-12) {
      throw SpecError("mechanism.prob too large for the odds: high-group probability exceeds 1");
    }
  }
  if (!spec.controls.empty() && static_cast<int>(spec.controls.size()) != q) {
    throw SpecError("mechanism.controls needs one entry per incomplete column");
  }
  for (int c : spec.controls) {
    if (c < 0 || c >= p) throw SpecError("mechanism.controls entry out of range");
  }
  if (spec.kind == MechanismKind::mar_mean) {
    const auto splits = spec.splits.empty() ? default_mean_splits() : spec.splits;
    if (static_cast<int>(splits.size()) != q) {
      throw SpecError("mechanism.splits needs one entry per incomplete column");
    }
    for (const auto& s : splits) {
      check_prob(s.p_high, "mechanism.splits.p_high");
      check_prob(s.p_low, "mechanism.splits.p_low");
      if (s.control >= p) throw SpecError("mechanism.splits.control out of range");
    }
  }
}

Dataset gen_std_normal(Eigen::Index n, Eigen::Index d, RngStream& rng) {
  if (n < 1 || d < 1) throw SpecError("need n >= 1 and d >= 1");
  Eigen::MatrixXd v(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i, j) = rng.normal();
  return Dataset::complete(std::move(v));
}

Dataset gen_clayton(Eigen::Index n, Eigen::Index d, const DistributionSpec& spec, RngStream& rng) {
  validate(spec);
  if (n < 1 || d < 2) throw SpecError("clayton copula needs n >= 1 and dim >= 2");
  if (spec.margins.size() > 1 && static_cast<Eigen::Index>(spec.margins.size()) != d) {
    throw SpecError("margins list length must be 1 or equal to the dimension");
  }
  const double theta = spec.theta;
  Eigen::MatrixXd v(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Marshall–Olkin: frailty V ~ Gamma(1/θ), U_j = (1 + E_j / V)^(-1/θ).
    const double frailty = rng.gamma(1.0 / theta);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double u = std::pow(1.0 + rng.exponential() / frailty, -1.0 / theta);
      switch (spec.margin(static_cast<std::size_t>(j))) {
        case Margin::exp1: v(i, j) = -std::log1p(-u); break;
        case Margin::chisq4: v(i, j) = gamma_quantile(u, 2.0, 2.0); break;
        case Margin::uniform: v(i, j) = u; break;
      }
    }
  }
  return Dataset::complete(std::move(v));
}

Generated generate(Eigen::Index n, int p, int q, const DistributionSpec& spec, RngStream& rng) {
  if (p < 1 || q < 0) throw SpecError("need p >= 1 and q >= 0");
  const Eigen::Index d = p + q;
  Dataset raw = spec.kind == DistributionKind::std_normal ? gen_std_normal(n, d, rng)
                                                          : gen_clayton(n, d, spec, rng);
  std::vector<std::string> names;
  ColumnRoles roles;
  for (int u = 0; u < p; ++u) {
    names.push_back("X" + std::to_string(u + 1));
    roles.complete.push_back(u);
  }
  for (int v = 0; v < q; ++v) {
    names.push_back("Y" + std::to_string(v + 1));
    roles.incomplete.push_back(p + v);
  }
  return {Dataset(raw.values(), raw.mask(), std::move(names)), std::move(roles)};
}

int control_for(const ColumnRoles& roles, const std::vector<int>& controls, int target) {
  const int ordinal = controls.empty() ? target % roles.p() : controls.at(static_cast<std::size_t>(target));
  return roles.complete.at(static_cast<std::size_t>(ordinal));
}

Dataset apply_mcar(const Dataset& ds, const ColumnRoles& roles, double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw SpecError("missingness probability must be in [0, 1]");
  Dataset out = ds;
  for (int col : roles.incomplete) {
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      if (rng.bernoulli(p)) out.set_missing(i, col);
    }
  }
  return out;
}

namespace {

double median(Eigen::VectorXd v) {
  const auto n = static_cast<std::size_t>(v.size());
  std::sort(v.data(), v.data() + n);
  return n % 2 ? v(static_cast<Eigen::Index>(n / 2))
               : 0.5 * (v(static_cast<Eigen::Index>(n / 2 - 1)) + v(static_cast<Eigen::Index>(n / 2)));
}

}  // namespace

Dataset apply_mar_1_to_x(const Dataset& ds, const ColumnRoles& roles, double p, double odds,
                         const std::vector<int>& controls, RngStream& rng) {
  MechanismSpec spec{MechanismKind::mar_1_to_x, p, odds, controls, {}};
  validate(spec, roles.p(), roles.q());
  const double p_high = std::min(1.0, 2.0 * p * odds / (odds + 1.0));
  const double p_low = 2.0 * p / (odds + 1.0);
  Dataset out = ds;
  for (int v = 0; v < roles.q(); ++v) {
    const int ctrl = control_for(roles, controls, v);
    const int col = roles.incomplete[static_cast<std::size_t>(v)];
    const Eigen::VectorXd c = ds.values().col(ctrl);
    const double med = median(c);
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      if (rng.bernoulli(c(i) > med ? p_high : p_low)) out.set_missing(i, col);
    }
  }
  return out;
}

Dataset apply_mar_rank(const Dataset& ds, const ColumnRoles& roles, double p,
                       const std::vector<int>& controls, RngStream& rng) {
  MechanismSpec spec{MechanismKind::mar_rank, p, 9.0, controls, {}};
  validate(spec, roles.p(), roles.q());
  const auto n = static_cast<std::size_t>(ds.rows());
  const auto m = static_cast<std::size_t>(std::lround(static_cast<double>(n) * p));
  Dataset out = ds;
  for (int v = 0; v < roles.q(); ++v) {
    const int ctrl = control_for(roles, controls, v);
    const int col = roles.incomplete[static_cast<std::size_t>(v)];
    const auto w = ranks(std::span<const double>(ds.values().col(ctrl).data(), n));
    // Efraimidis–Spirakis: the m largest keys log(U)/w are a sequential
    // weighted draw without replacement.
    std::vector<std::pair<double, std::size_t>> keys(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = {std::log(rng.uniform()) / w[i], i};
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(m), keys.end(),
                      [](const auto& a, const auto& b) {
                        return a.first > b.first || (a.first == b.first && a.second < b.second);
                      });
    for (std::size_t k = 0; k < m; ++k) out.set_missing(static_cast<Eigen::Index>(keys[k].second), col);
  }
  return out;
}

std::vector<MeanSplit> default_mean_splits() {
  return {{-1, 0.12, 0.06}, {-1, 0.02, 0.175}};
}

Dataset apply_mar_mean(const Dataset& ds, const ColumnRoles& roles,
                       const std::vector<MeanSplit>& splits, RngStream& rng) {
  MechanismSpec spec{MechanismKind::mar_mean, 0.0, 9.0, {}, splits};
  validate(spec, roles.p(), roles.q());
  const auto& use = splits.empty() ? default_mean_splits() : splits;
  Dataset out = ds;
  for (int v = 0; v < roles.q(); ++v) {
    const auto& s = use[static_cast<std::size_t>(v)];
    const int ctrl = s.control >= 0 ? roles.complete.at(static_cast<std::size_t>(s.control))
                                    : control_for(roles, {}, v);
    const int col = roles.incomplete[static_cast<std::size_t>(v)];
    const Eigen::VectorXd c = ds.values().col(ctrl);
    const double mean = c.mean();
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      if (rng.bernoulli(c(i) > mean ? s.p_high : s.p_low)) out.set_missing(i, col);
    }
  }
  return out;
}

Dataset apply_mechanism(const Dataset& ds, const ColumnRoles& roles, const MechanismSpec& spec,
                        RngStream& rng) {
  switch (spec.kind) {
    case MechanismKind::mcar: return apply_mcar(ds, roles, spec.prob, rng);
    case MechanismKind::mar_1_to_x:
      return apply_mar_1_to_x(ds, roles, spec.prob, spec.odds, spec.controls, rng);
    case MechanismKind::mar_rank: return apply_mar_rank(ds, roles, spec.prob, spec.controls, rng);
    case MechanismKind::mar_mean: return apply_mar_mean(ds, roles, spec.splits, rng);
  }
  throw SpecError("unknown mechanism");
}

}  // namespace mcar
