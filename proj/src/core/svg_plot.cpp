#include "mcartest/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "mcartest/error.hpp"

namespace mcar {

PlotAxis parse_plot_axis(const std::string& s) {
  if (s.empty() || s == "auto") return PlotAxis::auto_detect;
  if (s == "param" || s == "miss_prob") return PlotAxis::param;
  if (s == "n") return PlotAxis::n;
  throw SpecError("unknown x-axis field '" + s + "' (expected param or n)");
}

namespace {

std::string fmt(double v, int prec = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string colour_for(const std::string& test) {
  if (test == "A_n") return "#ff7f0e";
  if (test.rfind("d2", 0) == 0) return "#1f77b4";
  if (test == "D_n") return "#2ca02c";
  return "#7f7f7f";
}

double x_of(const ResultRow& r, PlotAxis axis) {
  return axis == PlotAxis::n ? static_cast<double>(r.n) : r.param.value_or(std::nan(""));
}

}  // namespace

std::string render_svg(const std::vector<ResultRow>& rows, const PlotOptions& opts) {
  if (rows.empty()) throw DataError("nothing to plot: results are empty");

  std::set<std::optional<double>> params;
  std::set<long> ns;
  std::set<std::string> groups;
  for (const auto& r : rows) {
    params.insert(r.param);
    ns.insert(r.n);
    groups.insert(r.label + "|" + r.distribution + "|" + r.mechanism);
  }
  if (groups.size() > 1) throw DataError("mixed sweeps: rows come from different scenarios");

  PlotAxis axis = opts.x;
  if (axis == PlotAxis::auto_detect) {
    if (params.size() > 1 && ns.size() > 1) throw DataError("mixed sweeps: both param and n vary");
    axis = ns.size() > 1 ? PlotAxis::n : PlotAxis::param;
  } else if ((axis == PlotAxis::param && ns.size() > 1) || (axis == PlotAxis::n && params.size() > 1)) {
    throw DataError("mixed sweeps: the other field also varies");
  }

  std::map<std::string, std::vector<const ResultRow*>> series;
  for (const auto& r : rows) {
    if (std::isnan(x_of(r, axis))) throw DataError("rows have no value for the chosen x-axis field");
    if (std::isnan(r.rate)) continue;  // every replication degenerate
    series[r.test].push_back(&r);
  }
  std::size_t max_points = 0;
  for (auto& [test, pts] : series) {
    std::sort(pts.begin(), pts.end(),
              [axis](auto* a, auto* b) { return x_of(*a, axis) < x_of(*b, axis); });
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (x_of(*pts[i], axis) == x_of(*pts[i - 1], axis)) {
        throw DataError("mixed sweeps: repeated x value for test " + test);
      }
    }
    max_points = std::max(max_points, pts.size());
  }
  if (max_points < 2) throw DataError("nothing to plot: need at least two points per curve");

  double xmin = INFINITY, xmax = -INFINITY, ymax = opts.alpha;
  for (const auto& r : rows) {
    xmin = std::min(xmin, x_of(r, axis));
    xmax = std::max(xmax, x_of(r, axis));
    if (!std::isnan(r.ci_high)) ymax = std::max(ymax, r.ci_high);
  }
  ymax = std::min(1.0, std::max(0.1, std::ceil(ymax * 1.1 * 20.0) / 20.0));

  const double W = opts.width, H = opts.height;
  const double left = 64, right = 150, top = 40, bottom = 52;
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (1.0 - std::clamp(y, 0.0, ymax) / ymax) * ph; };

  const ResultRow& head = rows.front();
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" viewBox=\"0 0 " << opts.width << ' ' << opts.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fmt(left) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
      << escape(head.label + "  " + head.distribution + "  " + head.mechanism) << "</text>\n";

  // axes and grid
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" stroke-width=\"1\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double y = ymax * k / 5.0;
    svg << "<line x1=\"" << fmt(left) << "\" x2=\"" << fmt(left + pw) << "\" y1=\"" << fmt(sy(y))
        << "\" y2=\"" << fmt(sy(y)) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(sy(y) + 4)
        << "\" text-anchor=\"end\">" << fmt(y, 3) << "</text>\n";
  }
  std::set<double> xs;
  for (const auto& r : rows) xs.insert(x_of(r, axis));
  for (double x : xs) {
    svg << "<text x=\"" << fmt(sx(x)) << "\" y=\"" << fmt(top + ph + 16)
        << "\" text-anchor=\"middle\">" << (axis == PlotAxis::n ? fmt(x, 0) : fmt(x, 2))
        << "</text>\n";
  }
  svg << "<line x1=\"" << fmt(left) << "\" x2=\"" << fmt(left) << "\" y1=\"" << fmt(top)
      << "\" y2=\"" << fmt(top + ph) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fmt(left) << "\" x2=\"" << fmt(left + pw) << "\" y1=\"" << fmt(top + ph)
      << "\" y2=\"" << fmt(top + ph) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(H - 12)
      << "\" text-anchor=\"middle\">"
      << (axis == PlotAxis::n ? "sample size n" : "missingness probability") << "</text>\n";
  svg << "<text transform=\"translate(16," << fmt(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">rejection rate</text>\n";
  svg << "</g>\n";

  // alpha reference
  svg << "<line class=\"alpha\" x1=\"" << fmt(left) << "\" x2=\"" << fmt(left + pw) << "\" y1=\""
      << fmt(sy(opts.alpha)) << "\" y2=\"" << fmt(sy(opts.alpha))
      << "\" stroke=\"#555\" stroke-dasharray=\"6 4\"/>\n";

  int legend = 0;
  for (const auto& [test, pts] : series) {
    const std::string colour = colour_for(test);
    std::ostringstream band, line;
    for (const auto* r : pts) band << fmt(sx(x_of(*r, axis))) << ',' << fmt(sy(r->ci_high)) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      band << fmt(sx(x_of(**it, axis))) << ',' << fmt(sy((*it)->ci_low)) << ' ';
    }
    for (const auto* r : pts) line << fmt(sx(x_of(*r, axis))) << ',' << fmt(sy(r->rate)) << ' ';
    std::string band_pts = band.str(), line_pts = line.str();
    band_pts.pop_back();
    line_pts.pop_back();
    svg << "<polygon class=\"band\" points=\"" << band_pts << "\" fill=\"" << colour
        << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    svg << "<polyline class=\"rate\" data-test=\"" << escape(test) << "\" points=\"" << line_pts
        << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    for (const auto* r : pts) {
      svg << "<circle cx=\"" << fmt(sx(x_of(*r, axis))) << "\" cy=\"" << fmt(sy(r->rate))
          << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    const double ly = top + 12 + 18 * legend++;
    svg << "<line x1=\"" << fmt(left + pw + 14) << "\" x2=\"" << fmt(left + pw + 38) << "\" y1=\""
        << fmt(ly) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(left + pw + 44) << "\" y=\"" << fmt(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(test) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mcar
