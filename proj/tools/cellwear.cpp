// cellwear: lifetime grid runs, parameter fitting and TvD reports.
#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "CLI11.hpp"
#include "cellwear/engine.hpp"
#include "cellwear/errors.hpp"
#include "cellwear/fit.hpp"
#include "cellwear/log.hpp"
#include "cellwear/metrics.hpp"
#include "cellwear/report.hpp"

namespace fs = std::filesystem;
using namespace cellwear;

namespace {

std::vector<std::string> split_list(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& s : in) {
    std::size_t a = 0;
    while (a <= s.size()) {
      const auto b = s.find(',', a);
      const std::string item = s.substr(a, b == std::string::npos ? std::string::npos : b - a);
      if (!item.empty()) out.push_back(item);
      if (b == std::string::npos) break;
      a = b + 1;
    }
  }
  return out;
}

std::string resolve_cell(const std::string& c) {
  if (fs::exists(c)) return c;
  const std::string bundled = data_path("cells/" + c + ".yaml");
  if (fs::exists(bundled)) return bundled;
  throw ConfigError("cell file not found: " + c);
}

template <class F>
void parallel_for(int n, int jobs, F&& body) {
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) body(i);
  };
  const int nt = std::max(1, std::min(jobs, n));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

struct SimulateArgs {
  std::vector<std::string> cells, scenarios, drives{"long"};
  std::string mode = "accelerated", out = "results";
  int jobs = 1;
  double tol_jump = kDefaultJumpTol;
  double eol = 0.70;
  int day_cap = 3000;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto cells = split_list(a.cells);
  auto scen_names = split_list(a.scenarios);
  auto drives = split_list(a.drives);
  if (cells.empty()) throw ConfigError("no cells given");
  if (scen_names.size() == 1 && scen_names[0] == "all")
    scen_names = {"no_v2g", "v2g_moderate", "v2g_early", "v2g_late"};
  if (scen_names.empty()) throw ConfigError("no scenarios given");
  if (drives.size() == 1 && drives[0] == "all") drives = {"long", "short"};
  if (drives.empty()) throw ConfigError("no drive variants given");
  if (!(a.tol_jump > 0)) throw ConfigError("--tol-jump must be positive");
  if (a.jobs < 1) throw ConfigError("--jobs must be at least 1");

  LifetimeOptions opt;
  opt.mode = parse_mode(a.mode);
  opt.tol_jump = a.tol_jump;
  opt.eol_frac = a.eol;
  opt.day_cap = a.day_cap;

  struct Job {
    std::string stem;
    const CellParameters* cell;
    Scenario sc;
    DriveVariant dv;
  };
  std::vector<CellParameters> params;
  std::vector<std::string> stems;
  for (const auto& c : cells) {
    const std::string path = resolve_cell(c);
    params.push_back(load_cell(path));
    stems.push_back(fs::path(path).stem().string());
  }
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (const auto& s : scen_names)
      for (const auto& d : drives) jobs.push_back({stems[i], &params[i], parse_scenario(s), parse_variant(d)});

  fs::create_directories(a.out);
  std::vector<RunSummary> sums(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), a.jobs, [&](int i) {
    const Job& j = jobs[i];
    const fs::path dir = fs::path(a.out) / j.stem / (to_string(j.sc) + "_" + to_string(j.dv));
    try {
      const DutySchedule sched = scenario_schedule(j.sc, j.dv, *j.cell);
      const LifetimeResult r = run_lifetime(*j.cell, sched, opt);
      fs::create_directories(dir);
      write_trajectory((dir / "trajectory.csv").string(), r);
      sums[i] = summarize(r);
      write_summary((dir / "summary.json").string(), sums[i]);
      if (r.failed) errors[i] = r.termination;
    } catch (const std::exception& e) {
      errors[i] = e.what();
      sums[i].cell = j.cell->name;
      sums[i].scenario = to_string(j.sc);
      sums[i].variant = to_string(j.dv);
      sums[i].failed = true;
      sums[i].termination = e.what();
    }
  });
  std::cout << format_table(sums);
  int failed = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!errors[i].empty()) {
      ++failed;
      std::cerr << fmt::format("run {} {}/{} failed: {}\n", jobs[i].stem, to_string(jobs[i].sc),
                               to_string(jobs[i].dv), errors[i]);
    }
  return failed ? 1 : 0;
}

struct FitArgs {
  std::string data, cell, out = "fit";
  int jobs = 1;
  int budget_per_dim = 100;
  bool no_verify = false;
};

int cmd_fit(const FitArgs& a) {
  const std::string cell_path = resolve_cell(a.cell);
  const CellParameters cell = load_cell(cell_path);
  const auto datasets = load_datasets(a.data);
  FitOptions opt;
  opt.jobs = a.jobs;
  opt.budget_per_dim = a.budget_per_dim;
  opt.verify = !a.no_verify;
  const FitReport rep = fit_pipeline(datasets, cell, opt);
  fs::create_directories(a.out);
  const std::string stem = fs::path(cell_path).stem().string();
  write_cell_file(cell_path, (fs::path(a.out) / (stem + "_fitted.yaml")).string(), rep.fitted);
  std::ofstream((fs::path(a.out) / "fit_report.json").string(), std::ios::binary | std::ios::trunc)
      << fit_report_json(rep);
  std::cout << fmt::format("stage1 |r| = {:.6g} ({} evals), stage2 |r| = {:.6g} ({} evals)\n",
                           rep.stage1.residual_norm, rep.stage1.evals, rep.stage2.residual_norm,
                           rep.stage2.evals);
  return 0;
}

struct SynthArgs {
  std::string cell, out = "datasets";
  unsigned seed = 7;
  double noise = 0.01;
};

int cmd_synth(const SynthArgs& a) {
  const CellParameters cell = load_cell(resolve_cell(a.cell));
  SyntheticSpec spec;
  spec.seed = a.seed;
  spec.noise = a.noise;
  fs::create_directories(a.out);
  for (const auto& d : make_synthetic_datasets(cell, spec))
    write_dataset((fs::path(a.out) / (d.name + ".csv")).string(), d);
  return 0;
}

int cmd_tvd(const std::string& results, std::string out) {
  if (!fs::is_directory(results)) throw ConfigError("not a directory: " + results);
  if (out.empty()) out = results;
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(results))
    if (e.is_regular_file() && e.path().filename() == "summary.json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  std::map<std::pair<std::string, std::string>, RunSummary> base;
  std::vector<RunSummary> v2g;
  for (const auto& f : files) {
    RunSummary s = read_summary(f);
    if (s.scenario == "no_v2g") base[{s.cell, s.variant}] = s;
    else v2g.push_back(s);
  }
  if (v2g.empty()) {
    std::cerr << "no V2G runs found in " << results << "\n";
    return 1;
  }
  std::vector<TvDPair> pairs;
  std::vector<std::string> unmatched;
  std::vector<TrendPoint> pts;
  for (const auto& s : v2g) {
    const auto it = base.find({s.cell, s.variant});
    const std::string key = s.cell + " " + s.scenario + "/" + s.variant;
    if (it == base.end()) {
      unmatched.push_back(key + ": no baseline");
      continue;
    }
    try {
      TvDPair p{it->second, s, tvd(it->second, s, false), tvd(it->second, s, true)};
      pts.push_back({s.cell, s.scenario, s.variant, s.lli.cal_fraction(), p.ah});
      pairs.push_back(std::move(p));
    } catch (const ComparisonError& e) {
      unmatched.push_back(key + ": " + e.what());
    }
  }
  const TrendReport trend = trend_report(pts);
  fs::create_directories(out);
  write_tvd_report((fs::path(out) / "tvd_report.json").string(), pairs, trend, unmatched);
  write_trend_csv((fs::path(out) / "trend.csv").string(), trend);
  for (const auto& p : pairs) {
    const std::string v = p.ah.kind == TvDKind::Finite ? fmt::format("{:.3f}", p.ah.value) : to_string(p.ah.kind);
    std::cout << fmt::format("{:<12} {:<13} {:<6} gain {:+.3f} loss {:+.3f} TvD {}\n", p.v2g.cell,
                             p.v2g.scenario, p.v2g.variant, p.ah.gain_frac, p.ah.loss_frac, v);
  }
  if (!trend.warning.empty()) std::cerr << "warning: " << trend.warning << "\n";
  else std::cout << fmt::format("trend: slope {:.3f}, spearman {:.3f}\n", trend.slope, trend.spearman);
  for (const auto& u : unmatched) std::cerr << "unmatched: " << u << "\n";
  return pairs.empty() ? 1 : 0;
}

int cmd_validate() {
  int bad = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << fmt::format("[{}] {}{}\n", ok ? "pass" : "FAIL", name, detail.empty() ? "" : "  (" + detail + ")");
    if (!ok) ++bad;
  };
  for (const char* stem : {"nmc111", "nmc622_25c", "nmc622_45c"}) {
    const CellParameters c = load_cell(data_path(std::string("cells/") + stem + ".yaml"));
    CellState s = fresh_state(c);
    const double cap = capacity(s, c);
    check(std::string(stem) + ": fresh capacity at C_nom", std::abs(cap / c.C_nom - 1) < 0.01,
          fmt::format("{:.4f} Ah", cap));
    CellParameters off = c;
    off.mechanisms = MechanismSwitches::none();
    CellModel m(off);
    const DutySchedule d = scenario_schedule(Scenario::ModerateV2G, DriveVariant::Long, c);
    const double n0 = s.n_Li;
    const DayLog L = simulate_day(s, d, m, 1);
    check(std::string(stem) + ": lithium conserved with mechanisms off",
          std::abs(s.n_Li - n0) / n0 < 1e-10, fmt::format("{:.2e}", std::abs(s.n_Li - n0) / n0));
    check(std::string(stem) + ": schedule throughput positive", L.ah_throughput > 0);
  }
  for (const char* v : {"long", "short"}) {
    const auto p = bundled_profile(parse_variant(v));
    check(std::string("drive profile ") + v + " discharges net", p->net_c_hours() > 0);
  }
  const TvDResult t111 = tvd(371, 390.3, 221, 453.5);
  const TvDResult t25 = tvd(812, 854.2, 584, 1198.3);
  const TvDResult t45 = tvd(380, 399.7, 349, 716.1);
  check("TvD table fixture", std::abs(t111.value - 0.40) < 0.004 && std::abs(t25.value - 1.43) < 0.0143 &&
                                 std::abs(t45.value - 9.70) < 0.097,
        fmt::format("{:.3f} {:.3f} {:.3f}", t111.value, t25.value, t45.value));
  bool closure = true;
  try {
    make_breakdown(0.299, 0.232, 0.006, 0.044, 0.017);
  } catch (const AttributionError&) {
    closure = false;
  }
  check("LLI breakdown sum fixture", closure);
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cellwear: battery degradation lifetime simulator"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "run the cell x scenario x drive grid");
  sim->add_option("--cells", sa.cells, "cell files or bundled names (nmc111, nmc622_25c, nmc622_45c)")->required();
  sim->add_option("--scenarios", sa.scenarios, "no_v2g, v2g_moderate, v2g_early, v2g_late or all")->required();
  sim->add_option("--drive", sa.drives, "long, short or all");
  sim->add_option("--mode", sa.mode, "accelerated or exhaustive");
  sim->add_option("--out", sa.out, "output directory");
  sim->add_option("--jobs", sa.jobs, "parallel runs");
  sim->add_option("--tol-jump", sa.tol_jump, "jump tolerance, fraction of C_nom");
  sim->add_option("--eol", sa.eol, "EOL capacity fraction");
  sim->add_option("--day-cap", sa.day_cap, "day cap");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "two-stage fit of degradation constants");
  fit->add_option("--data", fa.data, "directory of dataset csv files")->required();
  fit->add_option("--cell", fa.cell, "starting cell file")->required();
  fit->add_option("--out", fa.out, "output directory");
  fit->add_option("--jobs", fa.jobs, "parallel dataset simulations");
  fit->add_option("--budget-per-dim", fa.budget_per_dim, "evaluations per free parameter");
  fit->add_flag("--no-verify", fa.no_verify, "skip the exhaustive verification runs");

  SynthArgs ya;
  auto* syn = app.add_subcommand("synth", "write synthetic aging datasets for a cell");
  syn->add_option("--cell", ya.cell, "cell file")->required();
  syn->add_option("--out", ya.out, "output directory");
  syn->add_option("--seed", ya.seed, "noise seed");
  syn->add_option("--noise", ya.noise, "relative observation noise");

  std::string results, tvd_out;
  auto* tv = app.add_subcommand("tvd", "TvD report from simulate outputs");
  tv->add_option("--results", results, "directory containing summary.json files")->required();
  tv->add_option("--out", tvd_out, "output directory (default: results directory)");

  app.add_subcommand("validate", "invariant checks on the bundled fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    logger();
    if (sim->parsed()) return cmd_simulate(sa);
    if (fit->parsed()) return cmd_fit(fa);
    if (syn->parsed()) return cmd_synth(ya);
    if (tv->parsed()) return cmd_tvd(results, tvd_out);
    return cmd_validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
