#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = MCAR_CLI_PATH;
const fs::path kData = MCAR_EXAMPLES_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "mcar_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const auto out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = "\"" + kCli + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string data(const char* name) { return "\"" + (kData / name).string() + "\""; }

}  // namespace

TEST_CASE("test subcommand on the hand fixture") {
  const auto json_out = scratch() / "hand.json";
  const auto r = run("test --input " + data("hand.csv") + " --tests an,dn,d2 --out \"" +
                     json_out.string() + "\"");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("A_n") != std::string::npos);
  CHECK(r.out.find("do not reject") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(json_out));
  REQUIRE(j.size() == 3);
  CHECK(j[0]["statistic"].get<double>() == doctest::Approx(2.25));
  CHECK(j[0]["df"] == 1);
  CHECK(j[0]["p_value"].get<double>() == doctest::Approx(0.13361440253771584));
  CHECK(j[1]["statistic"].get<double>() == doctest::Approx(1.5));
  CHECK(j[2]["method"] == "d2_univariate");
  CHECK(j[2]["statistic"].get<double>() == doctest::Approx(2.25));
}

TEST_CASE("csv output on a generated q=1 file gives equal statistics") {
  const auto csv = scratch() / "q1.csv", res = scratch() / "q1_res.csv";
  REQUIRE(run("generate --p 2 --q 1 --n 150 --mechanism mar_1_to_x --prob 0.2 --seed 9 --out \"" +
              csv.string() + "\"").code == 0);
  CHECK(fs::exists(csv.string() + ".json"));
  const auto r = run("test -i \"" + csv.string() + "\" --tests an,d2 -o \"" + res.string() + "\"");
  REQUIRE(r.code == 0);
  std::istringstream in(slurp(res));
  std::string header, a, b;
  std::getline(in, header);
  std::getline(in, a);
  std::getline(in, b);
  CHECK(header == "method,statistic,df,p_value,alpha,reject");
  auto stat = [](const std::string& line) {
    const auto p = line.find(',');
    return std::stod(line.substr(p + 1, line.find(',', p + 1) - p - 1));
  };
  CHECK(a.rfind("A_n,", 0) == 0);
  CHECK(b.rfind("d2_univariate,", 0) == 0);
  CHECK(std::abs(stat(a) - stat(b)) <= 1e-8 * stat(b));
}

TEST_CASE("exit codes") {
  CHECK(run("test --input " + data("complete.csv")).code == 3);
  const auto r = run("test --input " + data("complete.csv"));
  CHECK(r.err.find("no incomplete columns") != std::string::npos);
  CHECK(run("test --input " + data("bad_cell.csv")).code == 3);
  CHECK(run("test --input " + data("hand.csv") + " --tests bogus").code == 2);
  CHECK(run("test --input " + data("hand.csv") + " --alpha 3").code == 2);
  CHECK(run("test").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("simulate --mechanism mnar --replications 1 --quiet --out \"" +
            (scratch() / "x.csv").string() + "\"").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("custom NA tokens and roles") {
  const auto f = scratch() / "tok.csv";
  std::ofstream(f) << "a,b,c\n1,2,?\n2,1,4\n3,5,?\n4,3,1\n5,4,2\n";
  CHECK(run("test -i \"" + f.string() + "\"").code == 3);
  const auto r = run("test -i \"" + f.string() + "\" --na-token ? --roles a,b:c --tests an");
  CHECK(r.code == 0);
  CHECK(r.out.find("2 complete / 1 incomplete") != std::string::npos);
}

TEST_CASE("generate is deterministic and honours zero missingness") {
  const auto a = scratch() / "g1.csv", b = scratch() / "g2.csv", c = scratch() / "g0.csv";
  const std::string args = "generate --distribution clayton --margins exp --p 2 --q 3 --n 40 "
                           "--mechanism mar_rank --prob 0.2 --seed 11 --out ";
  REQUIRE(run(args + "\"" + a.string() + "\"").code == 0);
  REQUIRE(run(args + "\"" + b.string() + "\"").code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).find("NA") != std::string::npos);
  REQUIRE(run("generate --prob 0 --out \"" + c.string() + "\"").code == 0);
  CHECK(slurp(c).find("NA") == std::string::npos);
  const auto side = nlohmann::json::parse(slurp(a.string() + ".json"));
  CHECK(side.at("distribution").at("kind") == "clayton");
  CHECK(side.at("master_seed") == 11);
}

TEST_CASE("mar_mean defaults give the expected missing fractions") {
  const auto f = scratch() / "mm.csv";
  REQUIRE(run("generate --mechanism mar_mean --n 5000 --seed 4 --out \"" + f.string() + "\"").code == 0);
  std::istringstream in(slurp(f));
  std::string line;
  std::getline(in, line);
  long y1 = 0, y2 = 0, rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    y1 += line.substr(c1 + 1, c2 - c1 - 1) == "NA";
    y2 += line.substr(c2 + 1) == "NA";
  }
  CHECK(rows == 5000);
  CHECK(std::abs(y1 / 5000.0 - 0.09) < 0.02);
  CHECK(std::abs(y2 / 5000.0 - 0.0975) < 0.02);
}

TEST_CASE("simulate and plot") {
  const auto dir = scratch() / "grid";
  const auto r = run("simulate --scenario " + data("prob_grid.json") + " --quiet --out \"" +
                     dir.string() + "\"");
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "results.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 8);

  const auto one = scratch() / "one.csv";
  REQUIRE(run("simulate --replications 1 --quiet --out \"" + one.string() + "\"").code == 0);

  const auto svg = scratch() / "grid.svg";
  REQUIRE(run("plot -i \"" + (dir / "results.csv").string() + "\" -o \"" + svg.string() + "\"").code == 0);
  const std::string text = slurp(svg);
  CHECK(text.find("<svg") == 0);
  const auto single = run("plot -i \"" + one.string() + "\" -o \"" + (scratch() / "one.svg").string() + "\"");
  CHECK(single.code == 3);
  CHECK(single.err.find("nothing to plot") != std::string::npos);
}

TEST_CASE("worker count does not change simulate output") {
  const auto a = scratch() / "w1.csv", b = scratch() / "w8.csv";
  const std::string args = "simulate --p 2 --q 2 --n 60 --mechanism mar_1_to_x --prob 0.15 "
                           "--replications 80 --sweep-prob 0.1,0.2 --quiet ";
  REQUIRE(run(args + "--workers 1 --out \"" + a.string() + "\"").code == 0);
  REQUIRE(run(args + "--workers 8 --out \"" + b.string() + "\"").code == 0);
  CHECK(slurp(a) == slurp(b));
}
