#include <cmath>
#include <vector>

#include "doctest.h"
#include "mcartest/error.hpp"
#include "mcartest/numerics.hpp"
#include "mcartest/synthesis.hpp"

using namespace mcar;
using doctest::Approx;

namespace {

std::vector<double> column(const Dataset& ds, Eigen::Index j) {
  return std::vector<double>(ds.values().col(j).data(), ds.values().col(j).data() + ds.rows());
}

DistributionSpec clayton(Margin m, double theta = 1.0) {
  DistributionSpec d;
  d.kind = DistributionKind::clayton;
  d.theta = theta;
  d.margins = {m};
  return d;
}

double missing_fraction(const Dataset& ds, Eigen::Index j) {
  return static_cast<double>(ds.missing_count(j)) / static_cast<double>(ds.rows());
}

}  // namespace

TEST_CASE("standard normal generator") {
  RngStream rng(1, {10});
  const auto ds = gen_std_normal(10000, 3, rng);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const auto c = column(ds, j);
    CHECK(std::abs(column_mean(c)) < 4.0 / std::sqrt(10000.0));
    CHECK(column_var(c, VarMode::unbiased) == Approx(1.0).epsilon(0.1));
  }
  RngStream again(1, {10});
  CHECK(gen_std_normal(10000, 3, again).values() == ds.values());
  CHECK(ds.missing_count() == 0);
}

TEST_CASE("clayton copula dependence and margins") {
  RngStream rng(2, {});
  const auto ds = gen_clayton(10000, 3, clayton(Margin::uniform), rng);
  const auto a = column(ds, 0), b = column(ds, 1), c = column(ds, 2);
  CHECK(kendall_tau(a, b) == Approx(1.0 / 3.0).epsilon(0.06));
  CHECK(std::abs(kendall_tau(b, c) - 1.0 / 3.0) < 0.02);

  RngStream rng2(3, {});
  const auto u = gen_clayton(5000, 2, clayton(Margin::uniform), rng2);
  const double crit = 1.63 / std::sqrt(5000.0);
  for (Eigen::Index j = 0; j < 2; ++j) {
    CHECK(ks_distance(column(u, j), [](double x) { return std::clamp(x, 0.0, 1.0); }) < crit);
  }

  RngStream rng3(4, {});
  const auto e = gen_clayton(10000, 2, clayton(Margin::exp1), rng3);
  CHECK(column_mean(column(e, 0)) == Approx(1.0).epsilon(0.05));

  RngStream rng4(5, {});
  const auto q = gen_clayton(10000, 2, clayton(Margin::chisq4), rng4);
  CHECK(column_mean(column(q, 0)) == Approx(4.0).epsilon(0.05));

  // 1%-level KS over 20 independent samples: three or more exceedances has
  // probability about 0.001 for a correct generator.
  const double crit2000 = 1.628 / std::sqrt(2000.0);
  int exceed_exp = 0, exceed_chi = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    RngStream re(6, {s}), rq(7, {s});
    const auto de = gen_clayton(2000, 2, clayton(Margin::exp1), re);
    const auto dq = gen_clayton(2000, 2, clayton(Margin::chisq4), rq);
    exceed_exp += ks_distance(column(de, 1), [](double x) { return 1.0 - std::exp(-x); }) > crit2000;
    exceed_chi += ks_distance(column(dq, 0), [](double x) { return chi2_cdf(std::max(x, 0.0), 4); }) >
                  crit2000;
  }
  CHECK(exceed_exp <= 2);
  CHECK(exceed_chi <= 2);

  RngStream rng5(6, {});
  CHECK_THROWS_AS(gen_clayton(10, 2, clayton(Margin::exp1, 0.0), rng5), SpecError);
  CHECK_THROWS_AS(gen_clayton(10, 1, clayton(Margin::exp1), rng5), SpecError);
}

TEST_CASE("per-column margins") {
  DistributionSpec d = clayton(Margin::exp1);
  d.margins = {Margin::exp1, Margin::uniform};
  RngStream rng(7, {});
  const auto ds = gen_clayton(2000, 2, d, rng);
  CHECK(ds.values().col(1).maxCoeff() < 1.0);
  CHECK(ds.values().col(0).maxCoeff() > 1.0);
  CHECK(d.describe() == "clayton(1)/exp+uniform");
  CHECK(clayton(Margin::chisq4).describe() == "clayton(1)/chisq4");
}

TEST_CASE("generate names columns and roles") {
  RngStream rng(8, {});
  const auto g = generate(20, 2, 3, DistributionSpec{}, rng);
  CHECK(g.data.column_names() == std::vector<std::string>{"X1", "X2", "Y1", "Y2", "Y3"});
  CHECK(g.roles.complete == std::vector<int>{0, 1});
  CHECK(g.roles.incomplete == std::vector<int>{2, 3, 4});
}

TEST_CASE("MCAR amputation") {
  RngStream rng(9, {});
  const auto g = generate(5000, 1, 2, DistributionSpec{}, rng);
  RngStream m0(1, {}), m1(2, {}), m2(3, {});
  CHECK(apply_mcar(g.data, g.roles, 0.0, m0).missing_count() == 0);
  const auto all = apply_mcar(g.data, g.roles, 1.0, m1);
  CHECK(all.missing_count(1) == 5000);
  CHECK(all.missing_count(2) == 5000);
  CHECK(all.missing_count(0) == 0);
  const auto some = apply_mcar(g.data, g.roles, 0.12, m2);
  const double sd = std::sqrt(5000 * 0.12 * 0.88);
  CHECK(std::abs(static_cast<double>(some.missing_count(1)) - 600.0) < 4 * sd);
  CHECK(std::abs(static_cast<double>(some.missing_count(2)) - 600.0) < 4 * sd);
  CHECK(std::abs(static_cast<double>(some.missing_count()) - 1200.0) < 4 * std::sqrt(2.0) * sd);
  RngStream bad(4, {});
  CHECK_THROWS_AS(apply_mcar(g.data, g.roles, 1.2, bad), SpecError);
}

TEST_CASE("MAR 1-to-x amputation") {
  RngStream rng(10, {});
  const auto g = generate(40000, 1, 1, DistributionSpec{}, rng);

  RngStream a(5, {}), b(5, {});
  CHECK(apply_mar_1_to_x(g.data, g.roles, 0.2, 1.0, {}, a).mask() ==
        apply_mcar(g.data, g.roles, 0.2, b).mask());

  RngStream c(6, {});
  const auto m = apply_mar_1_to_x(g.data, g.roles, 0.1, 9.0, {}, c);
  const Eigen::VectorXd x = g.data.values().col(0);
  std::vector<double> xs(x.data(), x.data() + x.size());
  std::nth_element(xs.begin(), xs.begin() + 20000, xs.end());
  long hi = 0, hi_miss = 0, lo = 0, lo_miss = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const bool high = x(i) >= xs[20000];
    (high ? hi : lo)++;
    if (!m.observed(i, 1)) (high ? hi_miss : lo_miss)++;
  }
  CHECK(static_cast<double>(hi_miss) / hi == Approx(0.18).epsilon(0.06));
  CHECK(static_cast<double>(lo_miss) / lo == Approx(0.02).epsilon(0.15));

  RngStream d(7, {});
  CHECK(apply_mar_1_to_x(g.data, g.roles, 0.0, 9.0, {}, d).missing_count() == 0);
  RngStream e(8, {});
  CHECK_THROWS_AS(apply_mar_1_to_x(g.data, g.roles, 0.6, 9.0, {}, e), SpecError);
}

TEST_CASE("MAR rank amputation") {
  RngStream rng(11, {});
  const auto g = generate(50, 1, 2, DistributionSpec{}, rng);
  RngStream a(1, {});
  const auto all = apply_mar_rank(g.data, g.roles, 1.0, {}, a);
  CHECK(all.missing_count(1) == 50);
  CHECK(all.missing_count(2) == 50);
  RngStream b(2, {});
  CHECK(apply_mar_rank(g.data, g.roles, 0.0, {}, b).missing_count() == 0);
  RngStream c(3, {});
  const auto some = apply_mar_rank(g.data, g.roles, 0.3, {}, c);
  CHECK(some.missing_count(1) == 15);
  CHECK(some.missing_count(2) == 15);

  Eigen::MatrixXd v(2, 2);
  v << 1, 0, 2, 0;
  Dataset two(v, MaskMatrix::Constant(2, 2, true), {"X1", "Y1"});
  ColumnRoles roles{{0}, {1}};
  RngStream r(4, {});
  int second = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto out = apply_mar_rank(two, roles, 0.5, {}, r);
    REQUIRE(out.missing_count(1) == 1);
    second += !out.observed(1, 1);
  }
  CHECK(std::abs(static_cast<double>(second) / trials - 2.0 / 3.0) < 0.03);
}

TEST_CASE("MAR mean amputation") {
  RngStream rng(12, {});
  const auto g = generate(5000, 1, 2, DistributionSpec{}, rng);

  RngStream a(1, {}), b(1, {});
  std::vector<MeanSplit> flat{{-1, 0.1, 0.1}, {-1, 0.1, 0.1}};
  CHECK(apply_mar_mean(g.data, g.roles, flat, a).mask() == apply_mcar(g.data, g.roles, 0.1, b).mask());

  RngStream c(2, {});
  const auto d = apply_mar_mean(g.data, g.roles, {}, c);
  CHECK(std::abs(missing_fraction(d, 1) - 0.09) < 0.02);
  CHECK(std::abs(missing_fraction(d, 2) - 0.0975) < 0.02);

  Eigen::MatrixXd v = g.data.values();
  v.col(0).setConstant(3.0);
  Dataset flatx(v, g.data.mask(), g.data.column_names());
  RngStream e(3, {});
  const auto low = apply_mar_mean(flatx, g.roles, {{-1, 0.9, 0.05}, {-1, 0.9, 0.05}}, e);
  CHECK(std::abs(missing_fraction(low, 1) - 0.05) < 0.015);

  CHECK(default_mean_splits().size() == 2);
  RngStream f(4, {});
  CHECK_THROWS_AS(apply_mar_mean(g.data, g.roles, {{-1, 0.1, 0.1}}, f), SpecError);
}

TEST_CASE("control pairing and validation") {
  ColumnRoles roles{{0, 1}, {2, 3, 4}};
  CHECK(control_for(roles, {}, 0) == 0);
  CHECK(control_for(roles, {}, 1) == 1);
  CHECK(control_for(roles, {}, 2) == 0);
  CHECK(control_for(roles, {1, 1, 0}, 0) == 1);

  MechanismSpec m;
  m.kind = MechanismKind::mar_1_to_x;
  m.prob = 0.1;
  CHECK_NOTHROW(validate(m, 2, 3));
  m.controls = {0, 1};
  CHECK_THROWS_AS(validate(m, 2, 3), SpecError);
  m.controls = {0, 1, 2};
  CHECK_THROWS_AS(validate(m, 2, 3), SpecError);
  m.controls.clear();
  m.odds = 0.5;
  CHECK_THROWS_AS(validate(m, 2, 3), SpecError);
  CHECK(parse_mechanism("mar_rank") == MechanismKind::mar_rank);
  CHECK_THROWS_AS(parse_mechanism("mnar"), SpecError);
  CHECK(parse_margin(margin_name(Margin::chisq4)) == Margin::chisq4);
  CHECK_THROWS_AS(parse_margin("weibull"), SpecError);
}
