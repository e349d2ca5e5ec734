#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {
const fs::path configs = HOMOLAB_CONFIG_DIR;
const fs::path work = fs::temp_directory_path() / "homolab_cli_test";

int run(const std::string& args) {
  fs::create_directories(work);
  const std::string cmd = std::string(HOMOLAB_CLI) + " " + args + " > " + (work / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("cell shortcut writes a passing report") {
  const auto out = work / "cell_report.json";
  CHECK(run("cell --field " + (configs / "fields/laminate.json").string() + " --grid 64 --out " + out.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["kind"] == "cell");
  bool found = false;
  for (const auto& s : j["scalars"].items())
    if (s.key() == "a_hat(0,0,0,0)") {
      CHECK(std::fabs(s.value().get<double>() - std::sqrt(3.0)) <= 1e-6);
      found = true;
    }
  CHECK(found);
}

TEST_CASE("weyl shortcut writes the series as CSV") {
  const auto out = work / "series.csv";
  CHECK(run("weyl --surface " + (configs / "surfaces/circle.json").string() + " --field " +
            (configs / "fields/cos_y1.json").string() + " --eps 2^-3..2^-9 --out " + out.string()) == 0);
  std::ifstream is(out);
  std::string header;
  std::getline(is, header);
  CHECK(header == "eps,value_re,value_im,defect,est_quad_err");
  int rows = 0;
  for (std::string line; std::getline(is, line);) rows += !line.empty();
  CHECK(rows == 7);
}

TEST_CASE("config runs and reruns are byte-identical") {
  const auto a = work / "a.json", b = work / "b.json";
  CHECK(run("m-eps --config " + (configs / "m_eps_circle.json").string() + " --out " + a.string()) == 0);
  CHECK(run("m-eps --config " + (configs / "m_eps_circle.json").string() + " --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("acceptance failure exits with 1") {
  const auto cfg = work / "fail.json";
  std::ofstream(cfg) << R"J({"kind": "cell", "grid": 16,
    "fields": {"A": {"kind": "scalar", "d": 2, "modes": [{"k": [0, 0], "re": 2}]}},
    "checks": [{"quantity": "a_hat(0,0,0,0)", "value": 3, "tol": 1e-6}]})J";
  CHECK(run("cell --config " + cfg.string() + " --out " + (work / "fail_report.json").string()) == 1);
}

TEST_CASE("configuration errors exit with 2") {
  CHECK(run("weyl --surface " + (configs / "surfaces/circle.json").string() + " --field " +
            (configs / "fields/cos_y1.json").string() + " --eps 1/4,0.25 --out " + (work / "x.csv").string()) == 2);
  CHECK(run("cell --config /nonexistent.json") == 2);
  CHECK(run("bogus") == 2);
  const auto cfg = work / "bad.json";
  std::ofstream(cfg) << "{\"kind\": \"robin-rate\"}";
  CHECK(run("robin-rate --config " + cfg.string()) == 2);
}

TEST_CASE("numerical failure exits with 3") {
  // The quadrature node budget cannot cover this eps.
  const auto cfg = work / "budget.json";
  std::ofstream(cfg) << R"J({"kind": "weyl", "surface": {"type": "circle", "radius": 1000},
    "fields": {"f": {"kind": "scalar", "d": 2, "modes": [{"k": [1, 0], "re": 0.5}]}},
    "eps": [1e-5]})J";
  CHECK(run("weyl --config " + cfg.string() + " --out " + (work / "budget_report.json").string()) == 3);
}
