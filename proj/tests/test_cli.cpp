// End-to-end tests that drive the installed command-line binary.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("gensec_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CmdResult run_cli(const std::string& args) {
  const fs::path out_path = work_dir() / "stdout.txt";
  const fs::path err_path = work_dir() / "stderr.txt";
  const std::string cmd = std::string(GENSEC_CLI_PATH) + " " + args + " > " + out_path.string() +
                          " 2> " + err_path.string();
  const int raw = std::system(cmd.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

std::string problem(const std::string& name) {
  return (fs::path(GENSEC_PROBLEM_DIR) / name).string();
}

}  // namespace

TEST_CASE("solve converges on the shipped smooth benchmark") {
  const fs::path trace = work_dir() / "trace.csv";
  const auto res = run_cli("solve " + problem("circle_line.json") +
                           " --x0 1,2.1 --x-1 0.9,2.0 --trace " + trace.string());
  CAPTURE(res.out, res.err);
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("status=Converged") != std::string::npos);

  // Last trace row carries the converged residual.
  std::istringstream lines(slurp(trace));
  std::string line, last;
  std::getline(lines, line);  // header
  while (std::getline(lines, line))
    if (!line.empty()) last = line;
  const auto c1 = last.find(',');
  const double residual = std::stod(last.substr(c1 + 1));
  CHECK(residual <= 1e-10);
}

TEST_CASE("solve exit codes distinguish budget exhaustion from input errors") {
  const auto starved =
      run_cli("solve " + problem("circle_line.json") + " --x0 1,2.1 --x-1 0.9,2.0 --max-iter 1");
  CHECK(starved.exit_code == 2);
  CHECK(starved.out.find("status=MaxIterations") != std::string::npos);

  const fs::path bad = work_dir() / "missing_dimension.json";
  std::ofstream(bad) << R"({
    "f": {"builtin": "circle_line"},
    "g": {"none": {}},
    "term": {"zero": {}},
    "set": {"whole": {}}
  })";
  const auto malformed = run_cli("solve " + bad.string() + " --x0 1,2 --x-1 0,0");
  CHECK(malformed.exit_code == 1);
  CHECK(malformed.err.find("dimension") != std::string::npos);

  const auto infeasible =
      run_cli("solve " + problem("lcp2.json") + " --x0 2,2 --x-1 0.2,0.2");
  CHECK(infeasible.exit_code == 1);
}

TEST_CASE("solve reruns produce byte-identical trace files") {
  const fs::path t1 = work_dir() / "rerun1.csv";
  const fs::path t2 = work_dir() / "rerun2.csv";
  const std::string flags = "solve " + problem("lcp2.json") + " --x0 0.3,0.3 --x-1 0.2,0.2 --seed 7";
  CHECK(run_cli(flags + " --trace " + t1.string()).exit_code == 0);
  CHECK(run_cli(flags + " --trace " + t2.string()).exit_code == 0);
  const std::string bytes = slurp(t1);
  CHECK(!bytes.empty());
  CHECK(bytes == slurp(t2));
}

TEST_CASE("bench writes matching csv and json reports deterministically") {
  const fs::path csv1 = work_dir() / "bench1.csv";
  const fs::path csv2 = work_dir() / "bench2.csv";
  const fs::path jsonpath = work_dir() / "bench.json";

  CHECK(run_cli("bench --out " + csv1.string()).exit_code == 0);
  CHECK(run_cli("bench --out " + csv2.string()).exit_code == 0);
  const std::string csv_bytes = slurp(csv1);
  CHECK(!csv_bytes.empty());
  CHECK(csv_bytes == slurp(csv2));

  CHECK(run_cli("bench --format json --out " + jsonpath.string()).exit_code == 0);
  const auto doc = nlohmann::json::parse(slurp(jsonpath));
  CHECK(doc["all_matched"].get<bool>());

  // Row counts agree between the two formats.
  std::istringstream lines(csv_bytes);
  std::string line;
  std::size_t csv_rows = 0;
  std::getline(lines, line);
  while (std::getline(lines, line))
    if (!line.empty()) ++csv_rows;
  CHECK(doc["rows"].size() == csv_rows);

  const auto unwritable = run_cli("bench --out /nonexistent_dir/report.csv");
  CHECK(unwritable.exit_code == 1);
}

TEST_CASE("GENSEC_SEED is the fallback for --seed") {
  const fs::path by_flag = work_dir() / "seed_flag.csv";
  const fs::path by_env = work_dir() / "seed_env.csv";
  CHECK(run_cli("bench --seed 99 --out " + by_flag.string()).exit_code == 0);
  const std::string cmd = "GENSEC_SEED=99 " + std::string(GENSEC_CLI_PATH) + " bench --out " +
                          by_env.string() + " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(slurp(by_flag) == slurp(by_env));
}

TEST_CASE("check validates certificates on the shipped problems") {
  const auto lcp = run_cli("check " + problem("lcp2.json") + " --x0 0.3,0.3 --x-1 0.2,0.2");
  CAPTURE(lcp.out, lcp.err);
  CHECK(lcp.exit_code == 0);
  CHECK(lcp.out.find("all checks passed") != std::string::npos);

  const auto curved = run_cli("check " + problem("circle_line.json") +
                              " --x0 1,2.1 --x-1 0.9,2.0 --require-deterioration");
  CAPTURE(curved.out, curved.err);
  CHECK(curved.exit_code == 0);
  CHECK(curved.out.find("deterioration=pass") != std::string::npos);
  CHECK(curved.out.find("tail_ratios=") != std::string::npos);
}

TEST_CASE("check refuses to run without the ground truth it needs") {
  const fs::path no_truth = work_dir() / "no_truth.json";
  std::ofstream(no_truth) << R"({
    "dimension": 2,
    "f": {"builtin": "circle_line"},
    "g": {"none": {}},
    "term": {"zero": {}},
    "set": {"whole": {}}
  })";
  const auto res = run_cli("check " + no_truth.string() + " --x0 1,2.1 --x-1 0.9,2.0");
  CHECK(res.exit_code == 1);
  CHECK(res.err.find("known_solution") != std::string::npos);

  const fs::path no_lipschitz = work_dir() / "no_lipschitz.json";
  std::ofstream(no_lipschitz) << R"({
    "dimension": 2,
    "f": {"builtin": "circle_line"},
    "g": {"none": {}},
    "term": {"zero": {}},
    "set": {"whole": {}},
    "known_solution": [0.0, 3.0]
  })";
  const auto res2 = run_cli("check " + no_lipschitz.string() +
                            " --x0 1,2.1 --x-1 0.9,2.0 --require-deterioration");
  CHECK(res2.exit_code == 1);
}

TEST_CASE("project reproduces the box example and rejects infeasible starts") {
  const std::string box = R"('{"box":{"lower":[0,0],"upper":[1,1]}}')";
  const auto res = run_cli("project --set " + box + " --v 2,0.5 --u 1,0.5 --w0 1,0.5 --theta 0.25");
  CAPTURE(res.out, res.err);
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("w_plus=1,0.5") != std::string::npos);

  const auto inside = run_cli("project --set " + box + " --v 0.5,0.5 --u 0,0 --w0 0,0");
  CHECK(inside.exit_code == 0);
  CHECK(inside.out.find("w_plus=0.5,0.5") != std::string::npos);
  CHECK(inside.out.find("inner_iterations=0") != std::string::npos);

  const auto bad_w0 = run_cli("project --set " + box + " --v 2,0.5 --u 1,0.5 --w0 2,2");
  CHECK(bad_w0.exit_code == 1);
}
