// Command-line front end. Links only the C API.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcartest/mcartest.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kData = 3;

int exit_code(mcar_status s) {
  switch (s) {
    case MCAR_OK: return kOk;
    case MCAR_E_USAGE: return kUsage;
    default: return kData;
  }
}

int report(mcar_status s) {
  std::cerr << "error: " << mcar_last_error() << "\n";
  return exit_code(s);
}

struct DatasetDeleter {
  void operator()(mcar_dataset* d) const { mcar_dataset_free(d); }
};
using DatasetPtr = std::unique_ptr<mcar_dataset, DatasetDeleter>;

struct CString {
  char* p = nullptr;
  ~CString() { mcar_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- test -------------------------------------------------------------------

struct TestArgs {
  std::string input;
  std::vector<std::string> na_tokens;
  double alpha = 0.05;
  std::string tests = "an,d2";
  std::string roles;
  std::string out;
};

int cmd_test(const TestArgs& a) {
  std::vector<const char*> na;
  for (const auto& t : a.na_tokens) na.push_back(t.c_str());
  mcar_dataset* raw = nullptr;
  if (auto s = mcar_dataset_load_csv(a.input.c_str(), na.empty() ? nullptr : na.data(), na.size(),
                                     a.roles.empty() ? nullptr : a.roles.c_str(), &raw)) {
    return report(s);
  }
  DatasetPtr ds(raw);

  std::vector<mcar_method> methods;
  for (const auto& t : split(a.tests, ',')) {
    mcar_method m;
    if (auto s = mcar_method_parse(t.c_str(), &m)) return report(s);
    methods.push_back(m);
  }
  if (methods.empty()) {
    std::cerr << "error: --tests lists no tests\n";
    return kUsage;
  }

  std::vector<mcar_result> results;
  json all = json::array();
  for (auto m : methods) {
    mcar_result r{};
    CString js;
    if (auto s = mcar_run_test(ds.get(), m, a.alpha, &r, &js.p)) return report(s);
    results.push_back(r);
    all.push_back(json::parse(js.str()));
  }

  std::printf("n = %zu rows, %zu complete / %zu incomplete columns\n", mcar_dataset_rows(ds.get()),
              mcar_dataset_complete_count(ds.get()), mcar_dataset_incomplete_count(ds.get()));
  for (const auto& r : results) {
    std::printf("%-14s statistic = %-12.6g df = %-3d p-value = %-10.4g %s MCAR at alpha = %g\n",
                mcar_method_name(r.method), r.statistic, r.df, r.p_value,
                r.reject ? "reject" : "do not reject", r.alpha);
  }

  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << a.out << "'\n";
      return kData;
    }
    if (ends_with(a.out, ".json")) {
      out << all.dump(2) << "\n";
    } else {
      out << "method,statistic,df,p_value,alpha,reject\n";
      for (const auto& r : results) {
        char line[256];
        std::snprintf(line, sizeof line, "%s,%.17g,%d,%.17g,%.17g,%d\n", mcar_method_name(r.method),
                      r.statistic, r.df, r.p_value, r.alpha, r.reject);
        out << line;
      }
    }
  }
  return kOk;
}

// ---- scenario assembly for generate / simulate ---------------------------

struct ScenarioArgs {
  std::string scenario;
  std::string distribution = "std_normal";
  double theta = 1.0;
  std::string margins = "exp";
  std::string mechanism = "mcar";
  double prob = 0.12;
  double odds = 9.0;
  std::string controls;
  int p = 1;
  int q = 2;
  long n = 100;
  std::string label;
  std::string tests;
  long replications = 0;
  double alpha = 0.05;
  bool alpha_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string sweep_prob;
  std::string sweep_n;
};

json build_scenario(const ScenarioArgs& a) {
  json j;
  if (!a.scenario.empty()) {
    j = json::parse(read_file(a.scenario));
  } else {
    json dist = {{"kind", a.distribution}};
    if (a.distribution == "clayton") {
      dist["theta"] = a.theta;
      const auto m = split(a.margins, ',');
      if (m.size() == 1) {
        dist["margins"] = m.front();
      } else {
        dist["margins"] = m;
      }
    }
    json mech = {{"kind", a.mechanism}};
    if (a.mechanism != "mar_mean") mech["prob"] = a.prob;
    if (a.mechanism == "mar_1_to_x") mech["odds"] = a.odds;
    if (!a.controls.empty()) {
      std::vector<int> c;
      for (const auto& t : split(a.controls, ',')) c.push_back(std::stoi(t));
      mech["controls"] = c;
    }
    j = {{"distribution", dist}, {"mechanism", mech}, {"p", a.p}, {"q", a.q}, {"n", a.n}};
    if (!a.label.empty()) j["label"] = a.label;
    if (!a.sweep_prob.empty()) {
      std::vector<double> v;
      for (const auto& t : split(a.sweep_prob, ',')) v.push_back(std::stod(t));
      j["sweep"] = {{"miss_prob", v}};
    } else if (!a.sweep_n.empty()) {
      std::vector<double> v;
      for (const auto& t : split(a.sweep_n, ',')) v.push_back(std::stod(t));
      j["sweep"] = {{"n", v}};
    }
  }
  if (!a.tests.empty()) j["tests"] = split(a.tests, ',');
  if (a.replications > 0) j["replications"] = a.replications;
  if (a.alpha_set) j["alpha"] = a.alpha;
  if (a.seed_set) j["master_seed"] = a.seed;
  return j;
}

int cmd_generate(const ScenarioArgs& a, const std::string& out_path, const std::string& na_token) {
  json spec;
  try {
    spec = build_scenario(a);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  spec.erase("sweep");
  mcar_dataset* raw = nullptr;
  CString resolved;
  if (auto s = mcar_generate(spec.dump().c_str(), &raw, &resolved.p)) return report(s);
  DatasetPtr ds(raw);
  if (auto s = mcar_dataset_write_csv(ds.get(), out_path.c_str(), na_token.c_str())) {
    return report(s);
  }
  const std::string sidecar = out_path + ".json";
  std::ofstream side(sidecar, std::ios::binary);
  if (!side) {
    std::cerr << "error: cannot write '" << sidecar << "'\n";
    return kData;
  }
  side << resolved.str() << "\n";
  std::printf("wrote %s (%zu x %zu) and %s\n", out_path.c_str(), mcar_dataset_rows(ds.get()),
              mcar_dataset_cols(ds.get()), sidecar.c_str());
  return kOk;
}

void print_progress(size_t done, size_t total, void*) {
  std::fprintf(stderr, "\rcell %zu / %zu", done, total);
  if (done == total) std::fputc('\n', stderr);
}

int cmd_simulate(const ScenarioArgs& a, const std::string& out, unsigned workers, bool quiet) {
  json spec;
  try {
    spec = build_scenario(a);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  fs::path csv = out;
  if (!ends_with(out, ".csv")) {
    std::error_code ec;
    fs::create_directories(csv, ec);
    if (ec) {
      std::cerr << "error: cannot create directory '" << out << "': " << ec.message() << "\n";
      return kData;
    }
    csv /= "results.csv";
  }
  if (auto s = mcar_simulate(spec.dump().c_str(), workers, csv.string().c_str(),
                             quiet ? nullptr : print_progress, nullptr)) {
    return report(s);
  }
  std::printf("wrote %s\n", csv.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tests of missing completely at random for incomplete multivariate data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mcar_version()));

  TestArgs targs;
  auto* test = app.add_subcommand("test", "Run MCAR tests on a CSV file");
  test->add_option("--input,-i", targs.input, "CSV with a header row")->required();
  test->add_option("--na-token", targs.na_tokens, "Token marking a missing cell (repeatable)");
  test->add_option("--alpha", targs.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  test->add_option("--tests", targs.tests, "Comma list of an, dn, d2, d2_univariate, d2_general");
  test->add_option("--roles", targs.roles, "complete:incomplete columns, e.g. X1,X2:Y1,Y2");
  test->add_option("--out,-o", targs.out, "Write results as .csv or .json");

  ScenarioArgs sargs;
  std::string gen_out, gen_na = "NA", sim_out = "results";
  unsigned workers = 1;
  bool quiet = false;
  auto add_scenario_flags = [&](CLI::App* sub) {
    sub->add_option("--scenario", sargs.scenario, "Scenario JSON file");
    sub->add_option("--distribution", sargs.distribution, "std_normal or clayton");
    sub->add_option("--theta", sargs.theta, "Clayton parameter");
    sub->add_option("--margins", sargs.margins, "exp, chisq4 or uniform (comma list per column)");
    sub->add_option("--mechanism", sargs.mechanism, "mcar, mar_1_to_x, mar_rank or mar_mean");
    sub->add_option("--prob", sargs.prob, "Missingness probability");
    sub->add_option("--odds", sargs.odds, "Odds ratio for mar_1_to_x");
    sub->add_option("--controls", sargs.controls, "1-based control column per target");
    sub->add_option("--p", sargs.p, "Complete columns");
    sub->add_option("--q", sargs.q, "Incomplete columns");
    sub->add_option("--n", sargs.n, "Rows");
    sub->add_option("--label", sargs.label, "Design label, e.g. 1X2Y");
    sub->add_option("--seed", sargs.seed, "Master seed")->each([&](const std::string&) {
      sargs.seed_set = true;
    });
  };

  auto* gen = app.add_subcommand("generate", "Draw one synthetic dataset");
  add_scenario_flags(gen);
  gen->add_option("--out,-o", gen_out, "Output CSV")->required();
  gen->add_option("--na-token", gen_na, "Token written for missing cells");

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo rejection rates");
  add_scenario_flags(sim);
  sim->add_option("--tests", sargs.tests, "Comma list of test tags");
  sim->add_option("--replications", sargs.replications, "Replications per cell")
      ->check(CLI::PositiveNumber);
  sim->add_option("--alpha", sargs.alpha, "Significance level")->each([&](const std::string&) {
    sargs.alpha_set = true;
  });
  sim->add_option("--sweep-prob", sargs.sweep_prob, "Comma list of missingness probabilities");
  sim->add_option("--sweep-n", sargs.sweep_n, "Comma list of sample sizes");
  sim->add_option("--workers,-j", workers, "Worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--out,-o", sim_out, "Results CSV file or output directory");
  sim->add_flag("--quiet", quiet, "No progress output");

  std::string plot_in, plot_out, plot_x = "auto";
  double plot_alpha = 0.05;
  auto* plot = app.add_subcommand("plot", "Rejection-rate curves as SVG");
  plot->add_option("--input,-i", plot_in, "Results CSV")->required();
  plot->add_option("--out,-o", plot_out, "Output SVG")->required();
  plot->add_option("--x", plot_x, "x-axis field: param, n or auto");
  plot->add_option("--alpha", plot_alpha, "Reference line")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*test) return cmd_test(targs);
    if (*gen) return cmd_generate(sargs, gen_out, gen_na);
    if (*sim) return cmd_simulate(sargs, sim_out, workers, quiet);
    if (*plot) {
      if (auto s = mcar_plot(plot_in.c_str(), plot_out.c_str(), plot_x.c_str(), plot_alpha)) {
        return report(s);
      }
      std::printf("wrote %s\n", plot_out.c_str());
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
