#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mams/cli.hpp"

using namespace mams;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mams");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("mams_cli_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kTwoLevel = R"({"two_level": {"lambda_h": 2, "lambda_l": 0.2, "alpha_h": 0.5, "alpha_l": 0.1, "mu": 1}})";

std::string mm1(double lambda, double mu) {
  std::ostringstream s;
  s << R"({"arrival_chain": {"states": ["a"], "transitions": [{"from": "a", "to": "a", "mark": 1, "rate": )" << lambda
    << R"(}]}, "completion_chain": {"states": ["c"], "transitions": [{"from": "c", "to": "c", "mark": 1, "rate": )" << mu
    << "}]}}";
  return s.str();
}

}  // namespace

TEST_CASE("analyze reports relative values and the heavy-traffic constant") {
  const auto r = run({"analyze", temp_file("two_level.spec", kTwoLevel)});
  CHECK(r.code == 0);
  CHECK(r.out.find("Delta_A(H) = 2.5\n") != std::string::npos);
  CHECK(r.out.find("Delta_A(L) = -0.5\n") != std::string::npos);
  CHECK(r.out.find("Delta(H) = 2.5\n") != std::string::npos);
  CHECK(r.out.find("heavy-traffic constant = 2.5\n") != std::string::npos);
  CHECK(r.out.find("lambda = 0.5\n") != std::string::npos);
  CHECK(r.out.find("rho = 0.5\n") != std::string::npos);
}

TEST_CASE("analyze: M/M/1 bounds coincide") {
  const auto r = run({"analyze", temp_file("mm1.spec", mm1(0.5, 1.0))});
  CHECK(r.code == 0);
  CHECK(r.out.find("lower bound = 1\n") != std::string::npos);
  CHECK(r.out.find("upper bound = 1\n") != std::string::npos);
}

TEST_CASE("analyze: JSON output") {
  const auto r = run({"analyze", "--json", temp_file("two_level_json.spec", kTwoLevel)});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"heavy_traffic_const\": 2.5") != std::string::npos);
}

TEST_CASE("exit codes") {
  SUBCASE("unstable load") {
    const auto r = run({"analyze", temp_file("unstable.spec", mm1(1.2, 1.0))});
    CHECK(r.code == 2);
    CHECK(r.err.find("lambda = 1.2") != std::string::npos);
    CHECK(r.err.find("mu = 1") != std::string::npos);
  }
  SUBCASE("reducible chain") {
    const auto path = temp_file("reducible.spec", R"({
      "arrival_chain": {"states": ["a", "b"], "transitions": [{"from": "a", "to": "b", "mark": 1, "rate": 1}]},
      "completion_chain": {"states": ["c"], "transitions": [{"from": "c", "to": "c", "mark": 1, "rate": 3}]}})");
    CHECK(run({"analyze", path}).code == 2);
    CHECK(run({"validate", path}).code == 2);
  }
  SUBCASE("parse error") {
    const auto r = run({"analyze", temp_file("broken.spec", "{\n \"two_level\": \n")});
    CHECK(r.code == 1);
    CHECK(r.err.find("line") != std::string::npos);
  }
  SUBCASE("usage") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"analyze"}).code == 1);
    CHECK(run({"analyze", "--preset", "nope"}).code == 1);
    CHECK(run({"analyze", "/nonexistent/file.spec"}).code == 1);
    CHECK(run({"--help"}).code == 0);
  }
  SUBCASE("bad simulation config") {
    CHECK(run({"simulate", temp_file("cfg.spec", mm1(0.5, 1.0)), "--batches", "3", "--events", "1000"}).code == 1);
  }
}

TEST_CASE("simulate: verdict and reproducible CSV") {
  const auto spec = temp_file("fig4_alpha1.spec",
                              R"({"two_level": {"lambda_h": 2, "lambda_l": 0.2, "alpha_h": 5, "alpha_l": 1, "mu": 1}})");
  const auto csv1 = (std::filesystem::temp_directory_path() / "mams_cli_test_a.csv").string();
  const auto csv2 = (std::filesystem::temp_directory_path() / "mams_cli_test_b.csv").string();
  const auto r1 = run({"simulate", spec, "--seed", "5", "--events", "2000000", "--out", csv1});
  const auto r2 = run({"simulate", spec, "--seed", "5", "--events", "2000000", "--out", csv2});
  CHECK(r1.code == 0);
  CHECK(r1.out.find("verdict: inside") != std::string::npos);
  CHECK(r1.out == r2.out);
  CHECK(read_file(csv1) == read_file(csv2));
  CHECK(read_file(csv1).rfind(csv_header() + "\n", 0) == 0);

  const auto r3 = run({"simulate", spec, "--seed", "6", "--events", "2000000"});
  CHECK(r3.out != r1.out);
}

TEST_CASE("simulate: M/M/1") {
  const auto r = run({"simulate", temp_file("mm1_sim.spec", mm1(0.5, 1.0)), "--events", "2000000"});
  CHECK(r.code == 0);
  CHECK(r.out.find("verdict: inside") != std::string::npos);
}

TEST_CASE("sweep: analytic columns for the alpha preset") {
  const auto r = run({"sweep", "--preset", "fig4", "--analytic-only"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "param,lambda,mu,rho,lower,upper_fast,upper_slow,upper,heavy_traffic_const,sim_mean,sim_ci,error");
  int rows = 0;
  double previous_lower = 1e300;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.push_back("");
    REQUIRE(f.size() == 12);
    const double alpha = std::stod(f[0]);
    CHECK(std::stod(f[4]) == doctest::Approx(1 + 0.1 / alpha).epsilon(1e-11));
    CHECK(std::stod(f[5]) == doctest::Approx(1 + 0.15 / alpha).epsilon(1e-11));
    CHECK(std::stod(f[6]) == doctest::Approx(1.5 + 0.1 / alpha).epsilon(1e-11));
    CHECK(std::stod(f[4]) < previous_lower);
    previous_lower = std::stod(f[4]);
    CHECK(f[9].empty());
    CHECK(f[11].empty());
  }
  CHECK(rows == 8);
}

TEST_CASE("sweep: invalid points produce error rows and the sweep continues") {
  const auto r = run({"sweep", temp_file("sweep_bad.spec", mm1(0.5, 1.0)), "--param", "arrival.event_scale", "--values",
                      "1,2.5,0", "--analytic-only"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header, ok, unstable, zero;
  std::getline(lines, header);
  std::getline(lines, ok);
  std::getline(lines, unstable);
  std::getline(lines, zero);
  CHECK(ok.rfind("1,0.5,1,0.5,1,,,1,1,,,", 0) == 0);
  CHECK(unstable.find("unstable") != std::string::npos);
  CHECK(zero.rfind("0,", 0) == 0);
  CHECK(zero.size() > 12);
}

TEST_CASE("sweep: parallel output equals sequential output") {
  const auto spec = temp_file("sweep_par.spec", kTwoLevel);
  const std::vector<std::string> base = {"sweep",   spec,         "--param", "arrival.event_scale", "--values",
                                         "0.5,1,1.5", "--events", "200000"};
  auto with_jobs = [&](const char* jobs) {
    auto args = base;
    args.push_back("--jobs");
    args.push_back(jobs);
    return run(args);
  };
  const auto seq = with_jobs("1");
  const auto par = with_jobs("3");
  CHECK(seq.code == 0);
  CHECK(seq.out == par.out);
}

TEST_CASE("validate: clean spec passes everything") {
  const auto r = run({"validate", "--preset", "fig4"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS two-level closed forms") != std::string::npos);
}

TEST_CASE("validate: an unstable spec fails only the stability check") {
  const auto r = run({"validate", temp_file("unstable_validate.spec", mm1(1.5, 1.0))});
  CHECK(r.code == 2);
  CHECK(r.out.find("FAIL stability") != std::string::npos);
}
