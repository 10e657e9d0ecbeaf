#include <regex>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mcartest/error.hpp"
#include "mcartest/svg_plot.hpp"

using namespace mcar;

namespace {

std::vector<ResultRow> sweep_rows(std::initializer_list<double> xs, bool by_n) {
  std::vector<ResultRow> rows;
  for (const char* test : {"A_n", "d2_general"}) {
    int k = 0;
    for (double x : xs) {
      ResultRow r;
      r.label = "1X2Y";
      r.distribution = "std_normal";
      r.mechanism = "mar_1_to_9";
      r.test = test;
      r.n = by_n ? static_cast<long>(x) : 100;
      if (!by_n) r.param = x;
      r.rate = 0.05 + 0.1 * k++;
      r.ci_low = r.rate - 0.02;
      r.ci_high = r.rate + 0.02;
      rows.push_back(r);
    }
  }
  return rows;
}

int count(const std::string& s, const std::string& what) {
  int c = 0;
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++c;
  return c;
}

}  // namespace

TEST_CASE("size grid gives two polylines of eight points") {
  const auto rows = sweep_rows({30, 40, 50, 60, 70, 80, 90, 100}, true);
  const std::string svg = render_svg(rows);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<polyline class=\"rate\"") == 2);
  std::regex pts(R"re(<polyline class="rate" data-test="([^"]+)" points="([^"]+)")re");
  int curves = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), pts), end; it != end; ++it) {
    const std::string p = (*it)[2];
    CHECK(count(p, ",") == 8);
    ++curves;
  }
  CHECK(curves == 2);
  CHECK(svg.find("#ff7f0e") != std::string::npos);
  CHECK(svg.find("#1f77b4") != std::string::npos);
  CHECK(count(svg, "class=\"alpha\"") == 1);
}

TEST_CASE("y coordinates stay inside the plot for rates in and out of range") {
  auto rows = sweep_rows({0.03, 0.06, 0.09}, false);
  rows[0].ci_low = -0.5;
  rows[2].rate = 1.0;
  rows[2].ci_high = 1.7;
  PlotOptions opts;
  const std::string svg = render_svg(rows, opts);
  std::regex pts(R"re(points="([^"]+)")re");
  const double top = 40, bottom = opts.height - 52;
  for (std::sregex_iterator it(svg.begin(), svg.end(), pts), end; it != end; ++it) {
    std::istringstream in((*it)[1].str());
    std::string pair;
    while (in >> pair) {
      const double y = std::stod(pair.substr(pair.find(',') + 1));
      CHECK(y >= top - 1e-9);
      CHECK(y <= bottom + 1e-9);
    }
  }
}

TEST_CASE("plot errors") {
  auto one = sweep_rows({0.1}, false);
  CHECK_THROWS_WITH_AS(render_svg(one), doctest::Contains("nothing to plot"), DataError);
  CHECK_THROWS_AS(render_svg({}), DataError);

  auto mixed = sweep_rows({0.1, 0.2}, false);
  mixed[1].n = 300;
  CHECK_THROWS_AS(render_svg(mixed), DataError);

  auto groups = sweep_rows({0.1, 0.2}, false);
  groups[0].mechanism = "mcar";
  CHECK_THROWS_AS(render_svg(groups), DataError);

  auto repeat = sweep_rows({0.1, 0.1}, false);
  CHECK_THROWS_AS(render_svg(repeat), DataError);

  PlotOptions by_n;
  by_n.x = PlotAxis::n;
  CHECK_THROWS_AS(render_svg(sweep_rows({0.1, 0.2}, false), by_n), DataError);
  CHECK(parse_plot_axis("param") == PlotAxis::param);
  CHECK_THROWS_AS(parse_plot_axis("rate"), SpecError);
}

TEST_CASE("labels are escaped") {
  auto rows = sweep_rows({0.1, 0.2}, false);
  for (auto& r : rows) r.label = "a<b&c";
  const std::string svg = render_svg(rows);
  CHECK(svg.find("a&lt;b&amp;c") != std::string::npos);
  CHECK(svg.find("a<b") == std::string::npos);
}
