#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cellwear/metrics.hpp"
#include "cellwear/report.hpp"
#include "json.hpp"

using namespace cellwear;
namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* b = std::getenv("CELLWEAR_BIN");
  REQUIRE_MESSAGE(b != nullptr, "CELLWEAR_BIN not set");
  return b;
}

int sh(const std::string& args) {
  const std::string cmd = bin() + " " + args + " >cli_stdout.txt 2>cli_stderr.txt";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<fs::path> files_named(const fs::path& dir, const std::string& name) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().filename() == name) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void put(const fs::path& dir, const std::string& cell, const std::string& sc, double days, double thru,
         const std::string& variant = "long") {
  RunSummary s;
  s.cell = cell;
  s.scenario = sc;
  s.variant = variant;
  s.mode = "accelerated";
  s.termination = "eol";
  s.reached_eol = true;
  s.days = days;
  s.norm_thru_ah = thru;
  s.norm_thru_wh = 3.7 * thru;
  s.lli = make_breakdown(0.3, 0.2, 0.01, 0.05, 0.04);
  const fs::path d = dir / cell / (sc + "_" + variant);
  fs::create_directories(d);
  write_summary((d / "summary.json").string(), s);
}

}  // namespace

TEST_CASE("usage and config errors exit with 2") {
  CHECK(sh("") == 2);
  CHECK(sh("frobnicate") == 2);
  CHECK(sh("simulate --cells nmc111") == 2);
  CHECK(sh("simulate --cells nmc111 --scenarios \"\" --out cli_empty") == 2);
  CHECK(sh("simulate --cells nosuchcell --scenarios no_v2g --out cli_empty") == 2);
  CHECK(sh("simulate --cells nmc111 --scenarios no_v2g --mode turbo --out cli_empty") == 2);
}

TEST_CASE("grid writes one summary per run and is idempotent") {
  fs::remove_all("cli_grid");
  const std::string args =
      "simulate --cells nmc111 nmc622_25c nmc622_45c --scenarios no_v2g v2g_moderate --eol 0 --day-cap 2 "
      "--mode exhaustive --out ";
  REQUIRE(sh(args + "cli_grid/a") == 0);
  const auto sums = files_named("cli_grid/a", "summary.json");
  CHECK(sums.size() == 6);
  CHECK(files_named("cli_grid/a", "trajectory.csv").size() == 6);
  CHECK(fs::exists("cli_grid/a/nmc622_45c/v2g_moderate_long/summary.json"));
  const auto s = read_summary("cli_grid/a/nmc111/no_v2g_long/summary.json");
  CHECK(s.cell == "NMC111");
  CHECK(s.censored);
  CHECK(s.simulated_days == 2);

  const std::string traj = slurp("cli_grid/a/nmc111/no_v2g_long/trajectory.csv");
  CHECK(traj.rfind("day,capacity_frac,C_p,C_n,LLI,", 0) == 0);

  REQUIRE(sh(args + "cli_grid/b") == 0);
  REQUIRE(sh(args + "cli_grid/a") == 0);
  for (const auto& p : files_named("cli_grid/a", "summary.json")) {
    const auto q = fs::path("cli_grid/b") / fs::relative(p, "cli_grid/a");
    CHECK(slurp(p) == slurp(q));
  }
  for (const auto& p : files_named("cli_grid/a", "trajectory.csv")) {
    const auto q = fs::path("cli_grid/b") / fs::relative(p, "cli_grid/a");
    CHECK(slurp(p) == slurp(q));
  }
}

TEST_CASE("tvd needs V2G runs") {
  fs::remove_all("cli_base");
  put("cli_base", "NMC111", "no_v2g", 371, 390.3);
  CHECK(sh("tvd --results cli_base") == 1);
  CHECK(sh("tvd --results does_not_exist") != 0);
}

TEST_CASE("tvd on the lifetime table fixture") {
  fs::remove_all("cli_tvd");
  put("cli_tvd", "NMC111", "no_v2g", 371, 390.3);
  put("cli_tvd", "NMC111", "v2g_moderate", 221, 453.5);
  put("cli_tvd", "NMC622-25C", "no_v2g", 812, 854.2);
  put("cli_tvd", "NMC622-25C", "v2g_moderate", 584, 1198.3);
  put("cli_tvd", "NMC622-45C", "no_v2g", 380, 399.7);
  put("cli_tvd", "NMC622-45C", "v2g_moderate", 349, 716.1);
  // a short-drive V2G run has no short baseline and must stay unpaired
  put("cli_tvd", "NMC111", "v2g_moderate", 150, 500, "short");
  REQUIRE(sh("tvd --results cli_tvd --out cli_tvd_out") == 0);
  std::ifstream f("cli_tvd_out/tvd_report.json");
  REQUIRE(f);
  nlohmann::json j;
  f >> j;
  REQUIRE(j["pairs"].size() == 3);
  std::map<std::string, double> got;
  for (const auto& p : j["pairs"]) {
    CHECK(p["variant"] == "long");
    got[p["family"].get<std::string>()] = p["ah"]["tvd"].get<double>();
    CHECK(p["wh"]["tvd"].get<double>() == doctest::Approx(p["ah"]["tvd"].get<double>()));
  }
  CHECK(got["NMC111"] == doctest::Approx(0.40).epsilon(0.01));
  CHECK(got["NMC622-25C"] == doctest::Approx(1.43).epsilon(0.01));
  CHECK(got["NMC622-45C"] == doctest::Approx(9.70).epsilon(0.01));
  REQUIRE(j["unmatched"].size() == 1);
  const std::string csv = slurp("cli_tvd_out/trend.csv");
  CHECK(csv.rfind("family,scenario,variant,cal_fraction,tvd,log10_tvd\n", 0) == 0);

  // rerun gives identical reports
  const std::string first = slurp("cli_tvd_out/tvd_report.json");
  REQUIRE(sh("tvd --results cli_tvd --out cli_tvd_out") == 0);
  CHECK(slurp("cli_tvd_out/tvd_report.json") == first);
}

TEST_CASE("validate") {
  CHECK(sh("validate") == 0);
  const std::string out = slurp("cli_stdout.txt");
  CHECK(out.find("FAIL") == std::string::npos);
  CHECK(out.find("[pass]") != std::string::npos);
}

TEST_CASE("synth and fit argument errors") {
  CHECK(sh("fit --data no_such_dir --cell nmc111 --out cli_fit") == 2);
  fs::remove_all("cli_syn");
  CHECK(sh("synth --cell nosuch --out cli_syn") == 2);
}
