#include "mcartest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <regex>
#include <sstream>
#include <thread>

#include "mcartest/error.hpp"

namespace mcar {

using nlohmann::json;

std::vector<Method> Scenario::methods() const {
  std::vector<Method> out;
  for (const auto& t : tests) {
    Method m = t == "d2" ? (q == 1 ? Method::d2_univariate : Method::d2_general) : parse_method(t);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

void validate(const Scenario& s) {
  if (s.p < 1) throw SpecError("scenario.p must be >= 1");
  if (s.q < 1) throw SpecError("scenario.q must be >= 1");
  if (s.n < 3) throw SpecError("scenario.n must be >= 3");
  if (s.replications < 1) throw SpecError("scenario.replications must be >= 1");
  if (!(s.alpha > 0.0 && s.alpha <= 1.0)) throw SpecError("scenario.alpha must be in (0, 1]");
  if (s.tests.empty()) throw SpecError("scenario.tests must not be empty");
  static const std::regex shape(R"((\d+)X(\d+)Y)");
  std::smatch m;
  if (std::regex_match(s.label, m, shape) &&
      (std::stoi(m[1]) != s.p || std::stoi(m[2]) != s.q)) {
    throw SpecError("scenario.label '" + s.label + "' does not match p=" + std::to_string(s.p) +
                    ", q=" + std::to_string(s.q));
  }
  for (Method meth : s.methods()) {
    if (meth == Method::d_n && (s.p != 1 || s.q != 1)) {
      throw SpecError("scenario.tests: D_n needs p = q = 1");
    }
    if (meth == Method::d2_univariate && s.q != 1) {
      throw SpecError("scenario.tests: d2_univariate needs q = 1");
    }
  }
  validate(s.distribution);
  if (s.distribution.kind == DistributionKind::clayton && s.distribution.margins.size() > 1 &&
      static_cast<int>(s.distribution.margins.size()) != s.p + s.q) {
    throw SpecError("scenario.distribution.margins must have 1 or p+q entries");
  }
  validate(s.mechanism, s.p, s.q);
}

std::uint64_t scenario_hash(const Scenario& s) {
  json j = {{"label", s.label},
            {"distribution", to_json(s.distribution)},
            {"p", s.p},
            {"q", s.q},
            {"n", s.n},
            {"mechanism", to_json(s.mechanism)}};
  return hash_bytes(j.dump());
}

Generated draw_replication(const Scenario& s, long replication) {
  RngStream rng(s.master_seed, {scenario_hash(s), static_cast<std::uint64_t>(replication)});
  Generated g = generate(s.n, s.p, s.q, s.distribution, rng);
  g.data = apply_mechanism(g.data, g.roles, s.mechanism, rng);
  return g;
}

namespace {

constexpr std::uint8_t kAccept = 0, kReject = 1, kDegenerate = 2;

// Runs body(r) for r in [0, count) on `workers` threads; rethrows the
// exception of the lowest failing index.
template <typename Body>
void parallel_for(long count, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max(count, 1L))));
  std::atomic<long> next{0};
  std::mutex err_mu;
  long err_index = count;
  std::exception_ptr err;
  auto worker = [&] {
    for (long r; (r = next.fetch_add(1)) < count;) {
      try {
        body(r);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (r < err_index) {
          err_index = r;
          err = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace

CellResult run_cell(const Scenario& s, unsigned workers) {
  validate(s);
  const auto methods = s.methods();
  const long reps = s.replications;
  std::vector<std::vector<std::uint8_t>> outcome(methods.size(),
                                                 std::vector<std::uint8_t>(static_cast<std::size_t>(reps)));
  std::vector<double> an_stats(static_cast<std::size_t>(reps), std::nan(""));

  parallel_for(reps, workers, [&](long r) {
    const Generated g = draw_replication(s, r);
    for (std::size_t k = 0; k < methods.size(); ++k) {
      std::uint8_t o;
      try {
        TestResult res = run_test(methods[k], g.data, g.roles, s.alpha);
        o = res.reject ? kReject : kAccept;
        if (methods[k] == Method::a_n) an_stats[static_cast<std::size_t>(r)] = res.statistic;
      } catch (const DataError&) {
        o = kDegenerate;
      }
      outcome[k][static_cast<std::size_t>(r)] = o;
    }
  });

  CellResult cell;
  cell.scenario = s;
  bool any_valid = false;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    TestTally t;
    t.method = methods[k];
    for (auto o : outcome[k]) {
      if (o == kDegenerate) {
        ++t.degenerate;
      } else {
        ++t.valid;
        t.rejections += o == kReject;
      }
    }
    t.rate = t.valid ? static_cast<double>(t.rejections) / static_cast<double>(t.valid) : std::nan("");
    t.ci = wilson_interval(t.rejections, t.valid);
    any_valid = any_valid || t.valid > 0;
    cell.tallies.push_back(t);
  }
  if (!any_valid) throw DataError("all replications degenerate in cell '" + s.label + "'");

  if (s.mechanism.kind == MechanismKind::mcar &&
      std::find(methods.begin(), methods.end(), Method::a_n) != methods.end()) {
    std::vector<double> vals;
    for (double v : an_stats)
      if (!std::isnan(v)) vals.push_back(v);
    if (!vals.empty()) {
      const int df = s.p * s.q;
      cell.ks_distance_vs_chi2 = ks_distance(vals, [df](double x) { return chi2_cdf(std::max(x, 0.0), df); });
    }
  }
  return cell;
}

std::vector<CellResult> run_grid(const Scenario& base, const Sweep& sweep, unsigned workers,
                                 const Progress& progress) {
  if (sweep.values.empty()) throw SpecError("sweep must list at least one value");
  std::vector<Scenario> cells;
  for (double v : sweep.values) {
    Scenario s = base;
    if (sweep.field == SweepField::miss_prob) {
      if (!s.mechanism.has_prob()) throw SpecError("sweep.miss_prob: mar_mean has no probability");
      s.mechanism.prob = v;
    } else {
      if (v != std::floor(v)) throw SpecError("sweep.n values must be integers");
      s.n = static_cast<long>(v);
    }
    validate(s);
    cells.push_back(std::move(s));
  }
  std::vector<CellResult> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out.push_back(run_cell(cells[i], workers));
    if (progress) progress(i + 1, cells.size());
  }
  return out;
}

double null_distribution_check(const Scenario& s, unsigned workers, int df_shift) {
  validate(s);
  if (s.mechanism.kind != MechanismKind::mcar) {
    throw SpecError("null_distribution_check needs an MCAR mechanism");
  }
  std::vector<double> stats(static_cast<std::size_t>(s.replications), std::nan(""));
  parallel_for(s.replications, workers, [&](long r) {
    const Generated g = draw_replication(s, r);
    try {
      stats[static_cast<std::size_t>(r)] = a_n_test(g.data, g.roles, s.alpha).statistic;
    } catch (const DataError&) {
    }
  });
  std::vector<double> vals;
  for (double v : stats)
    if (!std::isnan(v)) vals.push_back(v);
  if (vals.empty()) throw DataError("all replications degenerate");
  const int df = s.p * s.q + df_shift;
  return ks_distance(std::move(vals), [df](double x) { return chi2_cdf(std::max(x, 0.0), df); });
}

// ---------------------------------------------------------------------------
// JSON

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& msg) {
  throw SpecError("scenario." + path + ": " + msg);
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) field_error(path + key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    field_error(path + key, "has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& path) {
  return j.contains(key) ? get_field<T>(j, key, path) : fallback;
}

}  // namespace

json to_json(const DistributionSpec& d) {
  if (d.kind == DistributionKind::std_normal) return {{"kind", "std_normal"}};
  json margins = json::array();
  for (Margin m : d.margins) margins.push_back(margin_name(m));
  return {{"kind", "clayton"}, {"theta", d.theta}, {"margins", margins}};
}

DistributionSpec distribution_from_json(const json& j) {
  const std::string path = "distribution.";
  if (!j.is_object()) field_error("distribution", "must be an object");
  DistributionSpec d;
  const auto kind = get_field<std::string>(j, "kind", path);
  if (kind == "std_normal") {
    d.kind = DistributionKind::std_normal;
    return d;
  }
  if (kind != "clayton") field_error(path + "kind", "unknown distribution '" + kind + "'");
  d.kind = DistributionKind::clayton;
  d.theta = get_or<double>(j, "theta", 1.0, path);
  if (j.contains("margins")) {
    const auto& m = j.at("margins");
    try {
      if (m.is_string()) {
        d.margins.push_back(parse_margin(m.get<std::string>()));
      } else if (m.is_array()) {
        for (const auto& e : m) d.margins.push_back(parse_margin(e.get<std::string>()));
      } else {
        field_error(path + "margins", "must be a string or an array of strings");
      }
    } catch (const SpecError& e) {
      if (std::string(e.what()).rfind("scenario.", 0) == 0) throw;
      field_error(path + "margins", e.what());
    } catch (const json::exception&) {
      field_error(path + "margins", "must be a string or an array of strings");
    }
  }
  return d;
}

json to_json(const MechanismSpec& m) {
  json j = {{"kind", mechanism_name(m.kind)}};
  if (m.has_prob()) j["prob"] = m.prob;
  if (m.kind == MechanismKind::mar_1_to_x) j["odds"] = m.odds;
  if (!m.controls.empty()) {
    json c = json::array();
    for (int v : m.controls) c.push_back(v + 1);
    j["controls"] = c;
  }
  if (m.kind == MechanismKind::mar_mean) {
    json splits = json::array();
    for (const auto& s : m.splits.empty() ? default_mean_splits() : m.splits) {
      json e = {{"p_high", s.p_high}, {"p_low", s.p_low}};
      if (s.control >= 0) e["control"] = s.control + 1;
      splits.push_back(e);
    }
    j["splits"] = splits;
  }
  return j;
}

MechanismSpec mechanism_from_json(const json& j) {
  const std::string path = "mechanism.";
  if (!j.is_object()) field_error("mechanism", "must be an object");
  MechanismSpec m;
  const auto kind = get_field<std::string>(j, "kind", path);
  try {
    m.kind = parse_mechanism(kind);
  } catch (const SpecError& e) {
    field_error(path + "kind", e.what());
  }
  if (m.has_prob()) m.prob = get_or<double>(j, "prob", 0.0, path);
  m.odds = get_or<double>(j, "odds", 9.0, path);
  for (int c : get_or<std::vector<int>>(j, "controls", {}, path)) m.controls.push_back(c - 1);
  if (j.contains("splits")) {
    if (!j.at("splits").is_array()) field_error(path + "splits", "must be an array");
    for (const auto& e : j.at("splits")) {
      MeanSplit s;
      s.p_high = get_field<double>(e, "p_high", path + "splits[].");
      s.p_low = get_field<double>(e, "p_low", path + "splits[].");
      s.control = get_or<int>(e, "control", 0, path + "splits[].") - 1;
      m.splits.push_back(s);
    }
  }
  return m;
}

json to_json(const Scenario& s) {
  return {{"label", s.label},
          {"distribution", to_json(s.distribution)},
          {"p", s.p},
          {"q", s.q},
          {"n", s.n},
          {"mechanism", to_json(s.mechanism)},
          {"tests", s.tests},
          {"replications", s.replications},
          {"alpha", s.alpha},
          {"master_seed", s.master_seed}};
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw SpecError("scenario: document must be a JSON object");
  Scenario s;
  const std::string path;
  s.p = get_or<int>(j, "p", s.p, path);
  s.q = get_or<int>(j, "q", s.q, path);
  s.label = get_or<std::string>(j, "label", std::to_string(s.p) + "X" + std::to_string(s.q) + "Y", path);
  s.n = get_or<long>(j, "n", s.n, path);
  if (!j.contains("distribution")) field_error("distribution", "missing");
  s.distribution = distribution_from_json(j.at("distribution"));
  if (!j.contains("mechanism")) field_error("mechanism", "missing");
  s.mechanism = mechanism_from_json(j.at("mechanism"));
  s.tests = get_or<std::vector<std::string>>(j, "tests", s.tests, path);
  for (const auto& t : s.tests) {
    if (t == "d2") continue;
    try {
      parse_method(t);
    } catch (const SpecError& e) {
      field_error("tests", e.what());
    }
  }
  s.replications = get_or<long>(j, "replications", s.replications, path);
  s.alpha = get_or<double>(j, "alpha", s.alpha, path);
  s.master_seed = get_or<std::uint64_t>(j, "master_seed", s.master_seed, path);
  for (const auto& [key, _] : j.items()) {
    static const std::vector<std::string> known{"label", "distribution", "p", "q", "n", "mechanism",
                                                "tests", "replications", "alpha", "master_seed",
                                                "sweep"};
    if (std::find(known.begin(), known.end(), key) == known.end()) field_error(key, "unknown field");
  }
  validate(s);
  return s;
}

ScenarioFile scenario_file_from_json(const json& j) {
  ScenarioFile f;
  f.base = scenario_from_json(j);
  if (j.contains("sweep")) {
    const auto& sw = j.at("sweep");
    if (!sw.is_object() || sw.size() != 1) {
      field_error("sweep", "must be an object with exactly one of 'miss_prob' or 'n'");
    }
    Sweep s;
    if (sw.contains("miss_prob")) {
      s.field = SweepField::miss_prob;
      s.values = get_field<std::vector<double>>(sw, "miss_prob", "sweep.");
    } else if (sw.contains("n")) {
      s.field = SweepField::n;
      s.values = get_field<std::vector<double>>(sw, "n", "sweep.");
    } else {
      field_error("sweep", "must contain 'miss_prob' or 'n'");
    }
    if (s.values.empty()) field_error("sweep", "must list at least one value");
    f.sweep = std::move(s);
  }
  return f;
}

nlohmann::ordered_json to_json(const TestResult& r) {
  nlohmann::ordered_json diag = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  return {{"method", method_name(r.method)},
          {"statistic", r.statistic},
          {"df", r.df},
          {"p_value", r.p_value},
          {"alpha", r.alpha},
          {"reject", r.reject},
          {"diagnostics", diag}};
}

TestResult test_result_from_json(const nlohmann::ordered_json& j) {
  TestResult r;
  r.method = parse_method(j.at("method").get<std::string>());
  r.statistic = j.at("statistic").get<double>();
  r.df = j.at("df").get<int>();
  r.p_value = j.at("p_value").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.reject = j.at("reject").get<bool>();
  for (const auto& [k, v] : j.at("diagnostics").items()) {
    r.diagnostics.emplace_back(k, v.is_null() ? std::nan("") : v.get<double>());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Results CSV

namespace {

constexpr const char* kResultsHeader =
    "label,distribution,n,mechanism,param,test,rate,ci_low,ci_high,degenerate_count,seed";

std::string num(double v) { return std::isnan(v) ? "NA" : format_double(v); }

double parse_num(const std::string& s, std::size_t line) {
  if (s == "NA") return std::nan("");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("results CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_results_csv(const std::vector<CellResult>& cells, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& c : cells) {
    const auto& s = c.scenario;
    for (const auto& t : c.tallies) {
      out << s.label << ',' << s.distribution.describe() << ',' << s.n << ','
          << s.mechanism.describe() << ',' << (s.mechanism.has_prob() ? num(s.mechanism.prob) : "NA")
          << ',' << method_name(t.method) << ',' << num(t.rate) << ',' << num(t.ci.low) << ','
          << num(t.ci.high) << ',' << t.degenerate << ',' << s.master_seed << '\n';
    }
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("results CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw DataError("results CSV has an unexpected header");
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 11) {
      throw DataError("results CSV line " + std::to_string(line_no) + ": expected 11 fields");
    }
    ResultRow r;
    r.label = f[0];
    r.distribution = f[1];
    r.n = static_cast<long>(parse_num(f[2], line_no));
    r.mechanism = f[3];
    const double param = parse_num(f[4], line_no);
    if (!std::isnan(param)) r.param = param;
    r.test = f[5];
    r.rate = parse_num(f[6], line_no);
    r.ci_low = parse_num(f[7], line_no);
    r.ci_high = parse_num(f[8], line_no);
    r.degenerate_count = static_cast<long>(parse_num(f[9], line_no));
    r.seed = std::stoull(f[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mcar
