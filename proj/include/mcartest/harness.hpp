#ifndef MCARTEST_HARNESS_HPP
#define MCARTEST_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mcartest/mcar_tests.hpp"
#include "mcartest/synthesis.hpp"

namespace mcar {

// One Monte-Carlo cell. `tests` holds tags: "an", "dn", "d2" (univariate
// closed form when q == 1, EM-based general test otherwise), "d2_general",
// "d2_univariate".
struct Scenario {
  std::string label = "1X2Y";
  DistributionSpec distribution;
  int p = 1;
  int q = 2;
  long n = 100;
  MechanismSpec mechanism;
  std::vector<std::string> tests{"an", "d2"};
  long replications = 2000;
  double alpha = 0.05;
  std::uint64_t master_seed = 20240101;

  std::vector<Method> methods() const;
};

void validate(const Scenario& s);

// Stable hash of the data-generating part of the scenario (label,
// distribution, dimensions, n, mechanism). Replication count, tests and alpha
// are excluded, so every test in a cell sees the same datasets.
std::uint64_t scenario_hash(const Scenario& s);

struct TestTally {
  Method method = Method::a_n;
  long rejections = 0;
  long valid = 0;
  long degenerate = 0;
  double rate = 0.0;
  Interval ci{0.0, 1.0};
};

struct CellResult {
  Scenario scenario;
  std::vector<TestTally> tallies;
  std::optional<double> ks_distance_vs_chi2;  // A_n vs χ²_pq, MCAR cells only
};

enum class SweepField { miss_prob, n };

struct Sweep {
  SweepField field = SweepField::miss_prob;
  std::vector<double> values;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

// Replication r of the cell uses the stream (master_seed, scenario_hash, r).
// Output is identical for any worker count.
CellResult run_cell(const Scenario& s, unsigned workers = 1);

std::vector<CellResult> run_grid(const Scenario& base, const Sweep& sweep, unsigned workers = 1,
                                 const Progress& progress = {});

// Sup distance between the empirical CDF of A_n over the replications and the
// χ² CDF with pq (+ df_shift) degrees of freedom. Requires an MCAR mechanism.
double null_distribution_check(const Scenario& s, unsigned workers = 1, int df_shift = 0);

// Raw per-replication draw used by run_cell: generated data after amputation.
Generated draw_replication(const Scenario& s, long replication);

// --- serialization -------------------------------------------------------

nlohmann::json to_json(const DistributionSpec& d);
nlohmann::json to_json(const MechanismSpec& m);
nlohmann::json to_json(const Scenario& s);
DistributionSpec distribution_from_json(const nlohmann::json& j);
MechanismSpec mechanism_from_json(const nlohmann::json& j);
Scenario scenario_from_json(const nlohmann::json& j);

// A scenario document optionally carries {"sweep": {"miss_prob": [...]}} or
// {"sweep": {"n": [...]}}; without one the grid is the single base cell.
struct ScenarioFile {
  Scenario base;
  std::optional<Sweep> sweep;
};
ScenarioFile scenario_file_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const TestResult& r);
TestResult test_result_from_json(const nlohmann::ordered_json& j);

// Results CSV: label,distribution,n,mechanism,param,test,rate,ci_low,ci_high,degenerate_count,seed
void write_results_csv(const std::vector<CellResult>& cells, std::ostream& out);

struct ResultRow {
  std::string label, distribution, mechanism, test;
  long n = 0;
  std::optional<double> param;
  double rate = 0.0, ci_low = 0.0, ci_high = 0.0;
  long degenerate_count = 0;
  std::uint64_t seed = 0;
};
std::vector<ResultRow> read_results_csv(std::istream& in);

}  // namespace mcar

#endif
