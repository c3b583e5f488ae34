#include "cellwear/fit.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

#include "cellwear/errors.hpp"
#include "cellwear/log.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace cellwear {

// ---- datasets ----

void AgingDataset::validate(const std::string& where) const {
  if (obs.size() < 2) throw ConfigError(where + ": needs at least two observations");
  if (condition.kind == ConditionKind::Calendar && !(condition.soc >= 0 && condition.soc <= 1))
    throw ConfigError(where + ": calendar SOC must lie in [0, 1]");
  if (condition.kind == ConditionKind::Cycling && condition.protocol != "cc50" &&
      condition.protocol != "drive100")
    throw ConfigError(where + ": unknown cycling protocol '" + condition.protocol + "'");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& o = obs[i];
    if (i > 0 && !(o.day > obs[i - 1].day)) throw ConfigError(where + ": observation times must increase");
    if (o.day < 0) throw ConfigError(where + ": negative observation time");
    if (!(o.C_p > 0 && o.C_n > 0)) throw ConfigError(where + ": electrode capacities must be positive");
    if (!(o.lli >= 0 && o.lli <= 1)) throw ConfigError(where + ": LLI must lie in [0, 1]");
  }
}

AgingDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path);
  AgingDataset d;
  d.name = fs::path(path).stem().string();
  std::string line, cond = "";
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(first + 1, colon - first - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      std::string val = line.substr(colon + 1);
      val.erase(0, val.find_first_not_of(' '));
      val.erase(val.find_last_not_of(" \r") + 1);
      if (key == "family") d.family = val;
      else if (key == "name") d.name = val;
      else if (key == "condition") cond = val;
      else if (key == "protocol") d.condition.protocol = val;
      else if (key == "soc") {
        try {
          d.condition.soc = std::stod(val);
        } catch (const std::exception&) {
          throw SchemaError(path, lineno, "bad soc");
        }
      }
      continue;
    }
    if (!have_header) {
      std::string h = line;
      h.erase(std::remove_if(h.begin(), h.end(), [](char c) { return c == ' ' || c == '\r'; }), h.end());
      if (h.rfind("cum_ah", 0) == 0)
        throw SchemaError(path, lineno, "cum_ah axis is not supported, use time_days");
      if (h != "time_days,C_p_ah,C_n_ah,LLI_frac")
        throw SchemaError(path, lineno, "expected header 'time_days,C_p_ah,C_n_ah,LLI_frac'");
      have_header = true;
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Observation o;
    if (!(ls >> o.day >> o.C_p >> o.C_n >> o.lli)) throw SchemaError(path, lineno, "expected four numbers");
    if (!d.obs.empty() && !(o.day > d.obs.back().day))
      throw SchemaError(path, lineno, "time must increase strictly");
    d.obs.push_back(o);
  }
  if (cond == "calendar") d.condition.kind = ConditionKind::Calendar;
  else if (cond == "cycling") d.condition.kind = ConditionKind::Cycling;
  else throw SchemaError(path, 0, "missing or unknown '# condition:' header");
  d.validate(path);
  return d;
}

void write_dataset(const std::string& path, const AgingDataset& d) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path);
  f << "# family: " << d.family << "\n# name: " << d.name << "\n";
  if (d.condition.kind == ConditionKind::Calendar)
    f << "# condition: calendar\n# soc: " << fmt::format("{}", d.condition.soc) << "\n";
  else
    f << "# condition: cycling\n# protocol: " << d.condition.protocol << "\n";
  f << "time_days,C_p_ah,C_n_ah,LLI_frac\n";
  for (const auto& o : d.obs) f << fmt::format("{},{:.9g},{:.9g},{:.9g}\n", o.day, o.C_p, o.C_n, o.lli);
}

std::vector<AgingDataset> load_datasets(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  std::vector<AgingDataset> out;
  for (const auto& f : files) out.push_back(load_dataset(f));
  return out;
}

// ---- condition simulation ----

DutySchedule condition_schedule(const AgingCondition& c, const CellParameters& cell) {
  if (c.kind == ConditionKind::Calendar) {
    DutySchedule d = rest_schedule(cell);
    d.label = "dataset:calendar";
    return d;
  }
  DutySchedule d;
  d.label = "dataset:" + c.protocol;
  double t = 0;
  auto add = [&](Segment s) {
    s.start = t;
    t += s.duration;
    d.segments.push_back(std::move(s));
  };
  if (c.protocol == "cc50") {
    for (int i = 0; i < 8; ++i) {
      Segment dis;
      dis.kind = SegmentKind::DischargeCC;
      dis.c_rate = 0.5;
      dis.duration = 1.5 * 3600;
      dis.stop_soc = 0.25;
      add(dis);
      Segment ch;
      ch.kind = SegmentKind::ChargeCC;
      ch.c_rate = (i % 4 == 3) ? 1.3 : 0.5;
      ch.duration = 1.5 * 3600;
      ch.target_soc = 0.75;
      ch.v_max = cell.V_max;
      add(ch);
    }
  } else if (c.protocol == "drive100") {
    for (int i = 0; i < 3; ++i) {
      Segment dr;
      dr.kind = SegmentKind::Drive;
      dr.duration = 4.5 * 3600;
      dr.loop_profile = true;
      dr.stop_soc = 0.02;
      dr.profile = bundled_profile(DriveVariant::Long);
      add(dr);
      Segment ch;
      ch.kind = SegmentKind::ChargeCC;
      ch.c_rate = 0.5;
      ch.duration = 3.5 * 3600;
      ch.target_soc = 1.0;
      ch.v_max = cell.V_max;
      add(ch);
    }
  } else {
    throw ConfigError("unknown cycling protocol '" + c.protocol + "'");
  }
  d.check_tiling();
  return d;
}

CellState condition_initial_state(const AgingCondition& c, const CellParameters& cell) {
  CellState s = fresh_state(cell);
  if (c.kind == ConditionKind::Calendar) relax_to_soc(s, cell, c.soc);
  else if (c.protocol == "cc50") relax_to_soc(s, cell, 0.75);
  return s;
}

std::vector<Observation> simulate_dataset(const CellParameters& cell, const AgingDataset& d,
                                          Mode mode) {
  const DutySchedule sched = condition_schedule(d.condition, cell);
  const CellState s0 = condition_initial_state(d.condition, cell);
  LifetimeOptions o;
  o.mode = mode;
  o.eol_frac = 0.0;
  o.horizon_days = static_cast<int>(std::ceil(d.duration()));
  o.day_cap = o.horizon_days + 1;
  o.tol_jump = 1e9;  // always the largest jump, keeps the objective smooth in P
  const LifetimeResult r = run_lifetime(cell, sched, o, &s0);
  if (r.failed) throw SolverError(d.name + ": " + r.termination);
  std::vector<Observation> out;
  for (const auto& ob : d.obs) {
    const auto it = std::lower_bound(r.logs.begin(), r.logs.end(), ob.day,
                                     [](const DayLog& L, double t) { return L.day < t; });
    Observation z;
    z.day = ob.day;
    auto take = [&](const DayLog& L) {
      z.C_p = L.C_p;
      z.C_n = L.C_n;
      z.lli = (r.n_Li_bol - L.n_Li) / r.n_Li_bol;
    };
    if (it == r.logs.end()) {
      take(r.logs.back());
    } else if (it == r.logs.begin() || it->day == ob.day) {
      take(*it);
    } else {
      const DayLog& a = *(it - 1);
      const DayLog& b = *it;
      const double f = (ob.day - a.day) / double(b.day - a.day);
      z.C_p = a.C_p + f * (b.C_p - a.C_p);
      z.C_n = a.C_n + f * (b.C_n - a.C_n);
      z.lli = ((r.n_Li_bol - a.n_Li) + f * (a.n_Li - b.n_Li)) / r.n_Li_bol;
    }
    out.push_back(z);
  }
  return out;
}

// ---- parameters ----

std::string to_string(FitParam p) {
  switch (p) {
    case FitParam::k_SEI: return "k_SEI";
    case FitParam::D_SEI: return "D_SEI";
    case FitParam::i0_diss: return "i0_diss";
    case FitParam::k0_pl: return "k0_pl";
    case FitParam::beta_pos: return "beta_pos";
    case FitParam::beta_neg: return "beta_neg";
    case FitParam::m_crack: return "m_crack";
  }
  return "?";
}

double get_param(const CellParameters& c, FitParam p) {
  switch (p) {
    case FitParam::k_SEI: return c.sei.k_SEI;
    case FitParam::D_SEI: return c.sei.D_SEI;
    case FitParam::i0_diss: return c.dissolution.i_0_diss;
    case FitParam::k0_pl: return c.plating.k_0_pl;
    case FitParam::beta_pos: return c.crack.beta_pos;
    case FitParam::beta_neg: return c.crack.beta_neg;
    case FitParam::m_crack: return c.crack.m_crack;
  }
  return 0;
}

void set_param(CellParameters& c, FitParam p, double v) {
  switch (p) {
    case FitParam::k_SEI: c.sei.k_SEI = v; break;
    case FitParam::D_SEI: c.sei.D_SEI = v; break;
    case FitParam::i0_diss: c.dissolution.i_0_diss = v; break;
    case FitParam::k0_pl: c.plating.k_0_pl = v; break;
    case FitParam::beta_pos: c.crack.beta_pos = v; break;
    case FitParam::beta_neg: c.crack.beta_neg = v; break;
    case FitParam::m_crack: c.crack.m_crack = v; break;
  }
}

double ParamSpec::to_internal(double v) const { return log ? std::log10(v) : v; }
double ParamSpec::from_internal(double z) const { return log ? std::pow(10.0, z) : z; }

ParamSpec default_spec(FitParam p) {
  switch (p) {
    case FitParam::k_SEI: return {p, true, 1e-18, 1e-14};
    case FitParam::D_SEI: return {p, true, 1e-21, 1e-17};
    case FitParam::i0_diss: return {p, true, 1e-6, 1e-2};
    case FitParam::k0_pl: return {p, true, 1e-11, 1e-7};
    case FitParam::beta_pos: return {p, false, 1e-9, 1e-5};
    case FitParam::beta_neg: return {p, false, 1e-9, 1e-5};
    case FitParam::m_crack: return {p, false, 1.0, 3.0};
  }
  return {p, true, 1, 10};
}

void FitProblem::validate() const {
  if (datasets.empty()) throw ConfigError("fit problem without datasets");
  if (free.empty()) throw ConfigError("fit problem without free parameters");
  for (const auto& s : free) {
    if (!(std::isfinite(s.lower) && std::isfinite(s.upper) && s.lower < s.upper))
      throw ConfigError("bounds of " + to_string(s.id) + " must be finite with lower < upper");
    if (s.log && !(s.lower > 0)) throw ConfigError("log-scaled " + to_string(s.id) + " needs positive bounds");
  }
  for (double w : this->w)
    if (!(w > 0)) throw ConfigError("weights must be positive");
}

Eigen::VectorXd residuals(const std::vector<double>& P, const FitProblem& prob, bool* failed) {
  if (P.size() != prob.free.size()) throw std::invalid_argument("residuals: parameter count mismatch");
  CellParameters cell = prob.base;
  for (std::size_t i = 0; i < P.size(); ++i) set_param(cell, prob.free[i].id, P[i]);
  const double sw[3] = {std::sqrt(prob.w[0]), std::sqrt(prob.w[1]), std::sqrt(prob.w[2])};

  std::size_t n = 0;
  for (const auto& d : prob.datasets) n += 3 * d.obs.size();
  Eigen::VectorXd r(n);
  if (failed) *failed = false;

  auto one = [&](const AgingDataset& d) -> std::optional<std::vector<Observation>> {
    try {
      return simulate_dataset(cell, d, prob.mode);
    } catch (const std::exception& e) {
      CW_LOG_WARN("{} failed at candidate parameters: {}", d.name, e.what());
      return std::nullopt;
    }
  };
  std::vector<std::optional<std::vector<Observation>>> sims(prob.datasets.size());
  if (prob.jobs > 1) {
    std::vector<std::future<std::optional<std::vector<Observation>>>> fut;
    for (const auto& d : prob.datasets) fut.push_back(std::async(std::launch::async, one, std::cref(d)));
    for (std::size_t i = 0; i < fut.size(); ++i) sims[i] = fut[i].get();
  } else {
    for (std::size_t i = 0; i < prob.datasets.size(); ++i) sims[i] = one(prob.datasets[i]);
  }

  std::size_t k = 0;
  for (std::size_t i = 0; i < prob.datasets.size(); ++i) {
    const auto& d = prob.datasets[i];
    if (!sims[i]) {
      if (failed) *failed = true;
      for (std::size_t j = 0; j < 3 * d.obs.size(); ++j) r[k++] = kPenaltyResidual;
      continue;
    }
    for (std::size_t j = 0; j < d.obs.size(); ++j) {
      const auto& o = d.obs[j];
      const auto& s = (*sims[i])[j];
      r[k++] = sw[0] * (o.C_p - s.C_p) / cell.C_nom;
      r[k++] = sw[1] * (o.C_n - s.C_n) / cell.C_nom;
      r[k++] = sw[2] * (o.lli - s.lli);
    }
  }
  return r;
}

// ---- pipeline ----

double calendar_cp_fade(const AgingDataset& d) {
  const double n = double(d.obs.size());
  double mt = 0, mc = 0;
  for (const auto& o : d.obs) {
    mt += o.day / n;
    mc += o.C_p / n;
  }
  double stc = 0, stt = 0;
  for (const auto& o : d.obs) {
    stc += (o.day - mt) * (o.C_p - mc);
    stt += (o.day - mt) * (o.day - mt);
  }
  if (stt == 0) return 0;
  const double slope = stc / stt;
  const double c0 = mc - slope * mt;
  return -slope * (d.obs.back().day - d.obs.front().day) / c0;
}

namespace {

ParamSpec spec_for(FitParam p, const FitOptions& opt) {
  for (const auto& s : opt.bounds)
    if (s.id == p) return s;
  return default_spec(p);
}

StageReport run_stage(const std::string& name, FitProblem& prob, const FitOptions& opt) {
  prob.validate();
  const int n = static_cast<int>(prob.free.size());
  Eigen::VectorXd lo(n), hi(n), x0(n);
  StageReport rep;
  rep.stage = name;
  for (int i = 0; i < n; ++i) {
    const auto& s = prob.free[i];
    lo[i] = s.to_internal(s.lower);
    hi[i] = s.to_internal(s.upper);
    x0[i] = 0.5 * (lo[i] + hi[i]);
    for (const auto& [id, v] : opt.x0)
      if (id == s.id) x0[i] = std::clamp(s.to_internal(v), lo[i], hi[i]);
    rep.names.push_back(to_string(s.id));
    rep.x0.push_back(s.from_internal(x0[i]));
  }
  auto physical = [&](const Eigen::VectorXd& z) {
    std::vector<double> P(n);
    for (int i = 0; i < n; ++i) P[i] = prob.free[i].from_internal(z[i]);
    return P;
  };
  int n_failed = 0, n_total = 0;
  ResidualFn fn = [&](const Eigen::VectorXd& z) {
    bool failed = false;
    Eigen::VectorXd r = residuals(physical(z), prob, &failed);
    ++n_total;
    if (failed) ++n_failed;
    return r;
  };
  DfoOptions dopt;
  dopt.max_evals = opt.budget_per_dim * n;
  const DfoResult res = solve_dfo_ls(fn, x0, lo, hi, dopt);
  if (n_failed == n_total) throw SolverError(name + ": every candidate simulation failed");
  rep.value = physical(res.x);
  rep.residual_norm = res.norm;
  rep.evals = res.evals;
  rep.max_evals = res.max_evals;
  rep.exit = res.exit;
  rep.trace = res.trace;
  for (int i = 0; i < n; ++i) set_param(prob.base, prob.free[i].id, rep.value[i]);
  if (opt.verify) {
    FitProblem ex = prob;
    ex.mode = Mode::Exhaustive;
    std::vector<double> P = rep.value;
    rep.verify_norm = residuals(P, ex).norm();
  }
  CW_LOG_INFO("{}: |r| = {:.6g} after {} evaluations ({})", name, rep.residual_norm, rep.evals, rep.exit);
  return rep;
}

}  // namespace

FitReport fit_pipeline(const std::vector<AgingDataset>& datasets, const CellParameters& start,
                       const FitOptions& opt) {
  std::vector<AgingDataset> cal, cyc;
  for (const auto& d : datasets) {
    d.validate(d.name);
    (d.condition.kind == ConditionKind::Calendar ? cal : cyc).push_back(d);
  }
  if (cal.empty()) throw ConfigError("stage1 requires calendar data");
  if (cyc.empty()) throw ConfigError("stage2 requires cycling data");

  FitReport rep;
  CellParameters cell = start;
  for (const auto& d : cal) rep.calendar_cp_fade = std::max(rep.calendar_cp_fade, calendar_cp_fade(d));
  rep.diss_included = rep.calendar_cp_fade > opt.diss_threshold;

  FitProblem p1;
  p1.datasets = cal;
  p1.stage = FitStage::Calendar;
  p1.jobs = opt.jobs;
  p1.free = {spec_for(FitParam::k_SEI, opt), spec_for(FitParam::D_SEI, opt)};
  if (rep.diss_included) p1.free.push_back(spec_for(FitParam::i0_diss, opt));
  else cell.dissolution.i_0_diss = 0.0;
  p1.base = cell;
  try {
    rep.stage1 = run_stage("stage1", p1, opt);
  } catch (const std::exception& e) {
    throw SolverError(std::string("stage1 failed, stage2 not run: ") + e.what());
  }
  cell = p1.base;

  FitProblem p2;
  p2.datasets = cyc;
  p2.stage = FitStage::Cycling;
  p2.jobs = opt.jobs;
  p2.free = {spec_for(FitParam::k0_pl, opt), spec_for(FitParam::beta_pos, opt),
             spec_for(FitParam::beta_neg, opt), spec_for(FitParam::m_crack, opt)};
  p2.base = cell;
  try {
    rep.stage2 = run_stage("stage2", p2, opt);
  } catch (const std::exception& e) {
    throw SolverError(std::string("stage2 failed: ") + e.what());
  }
  for (auto id : {FitParam::k_SEI, FitParam::D_SEI, FitParam::i0_diss})
    if (get_param(p2.base, id) != get_param(cell, id))
      throw BookkeepingError("stage2 modified a calendar parameter");
  rep.fitted = p2.base;
  return rep;
}

std::string fit_report_json(const FitReport& r) {
  using nlohmann::ordered_json;
  auto stage = [](const StageReport& s) {
    ordered_json j;
    j["stage"] = s.stage;
    ordered_json params = ordered_json::object();
    for (std::size_t i = 0; i < s.names.size(); ++i) {
      params[s.names[i]] = {{"start", s.x0[i]}, {"fitted", s.value[i]}};
    }
    j["parameters"] = params;
    j["residual_norm"] = s.residual_norm;
    j["verify_residual_norm"] = s.verify_norm;
    j["verify_delta"] = s.verify_norm - s.residual_norm;
    j["evaluations"] = s.evals;
    j["max_evals"] = s.max_evals;
    j["exit"] = s.exit;
    return j;
  };
  ordered_json j;
  j["cell"] = r.fitted.name;
  j["calendar_cp_fade"] = r.calendar_cp_fade;
  j["i0_diss_fitted"] = r.diss_included;
  j["stage1"] = stage(r.stage1);
  j["stage2"] = stage(r.stage2);
  ordered_json fitted;
  for (auto id : {FitParam::k_SEI, FitParam::D_SEI, FitParam::i0_diss, FitParam::k0_pl,
                  FitParam::beta_pos, FitParam::beta_neg, FitParam::m_crack})
    fitted[to_string(id)] = get_param(r.fitted, id);
  j["fitted"] = fitted;
  return j.dump(2) + "\n";
}

void write_cell_file(const std::string& src_yaml, const std::string& out, const CellParameters& p) {
  YAML::Node n;
  try {
    n = YAML::LoadFile(src_yaml);
  } catch (const YAML::Exception& e) {
    throw ConfigError(src_yaml + ": " + e.what());
  }
  const fs::path base = fs::absolute(fs::path(src_yaml)).parent_path();
  for (const char* side : {"negative", "positive"}) {
    fs::path t = n[side]["ocp_table"].as<std::string>();
    if (t.is_relative()) n[side]["ocp_table"] = fs::weakly_canonical(base / t).string();
  }
  n["sei"]["k_sei_m_per_s"] = p.sei.k_SEI;
  n["sei"]["D_sei_m2_per_s"] = p.sei.D_SEI;
  n["dissolution"]["i_0_diss_A_per_m2"] = p.dissolution.i_0_diss;
  n["plating"]["k_0_pl_m_per_s"] = p.plating.k_0_pl;
  n["crack"]["beta_neg_per_s"] = p.crack.beta_neg;
  n["crack"]["beta_pos_per_s"] = p.crack.beta_pos;
  n["crack"]["m_crack"] = p.crack.m_crack;
  YAML::Emitter em;
  em.SetDoublePrecision(10);
  em << n;
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + out);
  f << "# " << p.name << " cell family, degradation constants refitted.\n" << em.c_str() << "\n";
}

std::vector<AgingDataset> make_synthetic_datasets(const CellParameters& truth, const SyntheticSpec& spec) {
  std::vector<AgingDataset> out;
  auto make = [&](std::string name, AgingCondition c, double days, double every) {
    AgingDataset d;
    d.family = truth.name;
    d.name = std::move(name);
    d.condition = std::move(c);
    for (double t = 0; t <= days + 1e-9; t += every) d.obs.push_back({t, 1, 1, 0});
    d.obs = simulate_dataset(truth, d, spec.mode);
    out.push_back(std::move(d));
  };
  make("cal_soc100", {ConditionKind::Calendar, 1.0, ""}, spec.calendar_days, spec.rpt_every);
  make("cal_soc050", {ConditionKind::Calendar, 0.5, ""}, spec.calendar_days, spec.rpt_every);
  make("cyc_cc50", {ConditionKind::Cycling, 0.5, "cc50"}, spec.cycling_days, spec.cycling_rpt_every);
  make("cyc_drive100", {ConditionKind::Cycling, 1.0, "drive100"}, spec.cycling_days, spec.cycling_rpt_every);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> N(0.0, 1.0);
  for (auto& d : out)
    for (auto& o : d.obs) {
      o.C_p *= 1.0 + spec.noise * N(rng);
      o.C_n *= 1.0 + spec.noise * N(rng);
      o.lli = std::clamp(o.lli * (1.0 + spec.noise * N(rng)), 0.0, 1.0);
    }
  return out;
}

}  // namespace cellwear
