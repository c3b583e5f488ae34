#include "cellwear/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include "cellwear/errors.hpp"
#include "json.hpp"

namespace cellwear {

using nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path);
  return f;
}

}  // namespace

void write_trajectory(const std::string& path, const LifetimeResult& r) {
  auto f = open_out(path);
  f << "day,capacity_frac,C_p,C_n,LLI,LLI_SEI,LLI_plating,LLI_diss,LLI_crack,cum_Ah_norm,SOC_min,"
       "SOC_avg,SOC_max\n";
  const double nb = r.n_Li_bol;
  for (const auto& L : r.logs) {
    f << fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.6g},{:.6g},{:.6g}\n",
                     L.day, L.capacity / r.C_nom, L.C_p, L.C_n, (nb - L.n_Li) / nb, L.ledger.sei / nb,
                     L.ledger.plating / nb, L.ledger.diss / nb, L.ledger.crack / nb, L.cum_ah / r.C_nom,
                     L.soc_min, L.soc_mean, L.soc_max);
  }
}

void write_summary(const std::string& path, const RunSummary& s) {
  ordered_json j;
  j["cell"] = s.cell;
  j["scenario"] = s.scenario;
  j["variant"] = s.variant;
  j["mode"] = s.mode;
  j["termination"] = s.termination;
  j["reached_eol"] = s.reached_eol;
  j["censored"] = s.censored;
  j["failed"] = s.failed;
  j["simulated_days"] = s.simulated_days;
  j["C_nom_Ah"] = s.C_nom;
  j["days"] = s.days;
  j["norm_throughput_Ah_per_Ah"] = s.norm_thru_ah;
  j["norm_throughput_Wh_per_Ah"] = s.norm_thru_wh;
  j["Cp_retention_pct"] = 100 * s.cp_retention;
  j["Cn_retention_pct"] = 100 * s.cn_retention;
  j["LLI_pct"] = 100 * s.lli.lli_total;
  j["LLI_SEI_pct"] = 100 * s.lli.lli_sei;
  j["LLI_SEI_diss_pct"] = 100 * s.lli.lli_cal();
  j["LLI_plating_pct"] = 100 * s.lli.lli_plating;
  j["LLI_diss_pct"] = 100 * s.lli.lli_diss;
  j["LLI_crack_pct"] = 100 * s.lli.lli_crack;
  j["cal_fraction"] = s.lli.cal_fraction();
  auto f = open_out(path);
  f << j.dump(2) << "\n";
}

RunSummary read_summary(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  ordered_json j;
  try {
    f >> j;
    RunSummary s;
    s.cell = j.at("cell").get<std::string>();
    s.scenario = j.at("scenario").get<std::string>();
    s.variant = j.at("variant").get<std::string>();
    s.mode = j.value("mode", "accelerated");
    s.termination = j.value("termination", "");
    s.reached_eol = j.at("reached_eol").get<bool>();
    s.censored = j.value("censored", false);
    s.failed = j.value("failed", false);
    s.simulated_days = j.value("simulated_days", 0);
    s.C_nom = j.value("C_nom_Ah", 0.0);
    s.days = j.at("days").get<double>();
    s.norm_thru_ah = j.at("norm_throughput_Ah_per_Ah").get<double>();
    s.norm_thru_wh = j.value("norm_throughput_Wh_per_Ah", 0.0);
    s.cp_retention = j.value("Cp_retention_pct", 0.0) / 100;
    s.cn_retention = j.value("Cn_retention_pct", 0.0) / 100;
    s.lli.lli_total = j.value("LLI_pct", 0.0) / 100;
    s.lli.lli_sei = j.value("LLI_SEI_pct", 0.0) / 100;
    s.lli.lli_plating = j.value("LLI_plating_pct", 0.0) / 100;
    s.lli.lli_diss = j.value("LLI_diss_pct", 0.0) / 100;
    s.lli.lli_crack = j.value("LLI_crack_pct", 0.0) / 100;
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

ordered_json tvd_json(const TvDResult& t) {
  ordered_json j;
  j["gain_frac"] = t.gain_frac;
  j["loss_frac"] = t.loss_frac;
  j["kind"] = to_string(t.kind);
  if (t.kind == TvDKind::Infinite) j["tvd"] = nullptr;
  else j["tvd"] = t.value;
  return j;
}

}  // namespace

void write_tvd_report(const std::string& path, const std::vector<TvDPair>& pairs,
                      const TrendReport& trend, const std::vector<std::string>& unmatched) {
  ordered_json j;
  j["pairs"] = ordered_json::array();
  for (const auto& p : pairs) {
    ordered_json e;
    e["family"] = p.v2g.cell;
    e["scenario"] = p.v2g.scenario;
    e["variant"] = p.v2g.variant;
    e["base_days"] = p.base.days;
    e["v2g_days"] = p.v2g.days;
    e["base_norm_throughput"] = p.base.norm_thru_ah;
    e["v2g_norm_throughput"] = p.v2g.norm_thru_ah;
    e["cal_fraction"] = p.v2g.lli.cal_fraction();
    e["ah"] = tvd_json(p.ah);
    e["wh"] = tvd_json(p.wh);
    if (p.ah.kind == TvDKind::Finite && p.ah.value > 0)
      e["wh_vs_ah_rel_diff"] = std::abs(p.wh.value - p.ah.value) / p.ah.value;
    j["pairs"].push_back(e);
  }
  ordered_json t;
  t["n_fitted"] = trend.fitted.size();
  t["n_excluded"] = trend.excluded.size();
  t["slope_defined"] = trend.slope_defined;
  t["slope"] = trend.slope;
  t["intercept"] = trend.intercept;
  if (std::isfinite(trend.spearman)) t["spearman"] = trend.spearman;
  else t["spearman"] = nullptr;
  t["monotone"] = trend.monotone;
  t["warning"] = trend.warning;
  j["trend"] = t;
  j["unmatched"] = unmatched;
  auto f = open_out(path);
  f << j.dump(2) << "\n";
}

void write_trend_csv(const std::string& path, const TrendReport& trend) {
  auto f = open_out(path);
  f << "family,scenario,variant,cal_fraction,tvd,log10_tvd\n";
  for (const auto& p : trend.points) {
    std::string tv, lg;
    switch (p.tvd.kind) {
      case TvDKind::Zero: tv = "0"; lg = "-inf"; break;
      case TvDKind::Infinite: tv = "inf"; lg = "inf"; break;
      case TvDKind::Finite:
        tv = fmt::format("{:.6g}", p.tvd.value);
        lg = p.tvd.value > 0 ? fmt::format("{:.6g}", std::log10(p.tvd.value)) : "-inf";
        break;
    }
    f << fmt::format("{},{},{},{:.6g},{},{}\n", p.family, p.scenario, p.variant, p.cal_fraction, tv, lg);
  }
}

std::string format_table(const std::vector<RunSummary>& runs) {
  std::string out = fmt::format("{:<12} {:<13} {:<6} {:>8} {:>10} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}  {}\n",
                                "cell", "scenario", "drive", "days", "norm.thru", "Cp%", "Cn%", "LLI%",
                                "SEI%", "pl%", "diss%", "crack%", "status");
  for (const auto& s : runs) {
    const std::string status = s.failed ? "FAILED" : s.censored ? "censored" : s.termination;
    out += fmt::format("{:<12} {:<13} {:<6} {:>8.1f} {:>10.1f} {:>6.1f} {:>6.1f} {:>6.1f} {:>6.1f} {:>6.1f} {:>6.1f} {:>6.1f}  {}\n",
                       s.cell, s.scenario, s.variant, s.days, s.norm_thru_ah, 100 * s.cp_retention,
                       100 * s.cn_retention, 100 * s.lli.lli_total, 100 * s.lli.lli_sei,
                       100 * s.lli.lli_plating, 100 * s.lli.lli_diss, 100 * s.lli.lli_crack, status);
  }
  return out;
}

}  // namespace cellwear
