#pragma once
#include <optional>
#include <string>
#include <vector>

#include "cellwear/engine.hpp"

namespace cellwear {

/// (n_bol - n_k) / n_bol. Throws BookkeepingError if clearly negative.
double lli_total(double n_li_bol, double n_li_k);

struct LLIBreakdown {
  double lli_total = 0;
  double lli_sei = 0, lli_plating = 0, lli_diss = 0, lli_crack = 0;

  double lli_cal() const { return lli_sei + lli_diss; }
  double lli_lam() const { return lli_diss + lli_crack; }
  double cal_fraction() const { return lli_total > 0 ? lli_cal() / lli_total : 0.0; }
  double sum() const { return lli_sei + lli_plating + lli_diss + lli_crack; }
};

inline constexpr double kClosureTol = 1e-4;

/// Build a breakdown from components and check closure and signs.
LLIBreakdown make_breakdown(double total, double sei, double plating, double diss, double crack,
                            double tol = kClosureTol);

/// Breakdown at EOL of a finished run.
LLIBreakdown breakdown(const LifetimeResult& r, double tol = kClosureTol);

/// Breakdown of a single log entry (cumulative ledger at that day).
LLIBreakdown breakdown(const DayLog& log, double n_li_bol, double tol = kClosureTol);

double normalized_throughput(double ah, double c_nom);

enum class TvDKind { Zero, Finite, Infinite };
std::string to_string(TvDKind k);

struct TvDResult {
  double gain_frac = 0;
  double loss_frac = 0;
  TvDKind kind = TvDKind::Finite;
  double value = 0;  // 0 for Zero, +inf for Infinite
};

TvDResult tvd(double base_days, double base_thru, double v2g_days, double v2g_thru);

/// EOL view of a run, also what summary.json holds.
struct RunSummary {
  std::string cell, scenario, variant, mode, termination;
  double C_nom = 0;
  bool reached_eol = false, censored = false, failed = false;
  int simulated_days = 0;
  double days = 0;           // EOL day (last day if censored)
  double norm_thru_ah = 0;   // Ah/Ah
  double norm_thru_wh = 0;   // Wh/Ah
  double cp_retention = 0, cn_retention = 0;  // fractions of BOL
  LLIBreakdown lli;
};

RunSummary summarize(const LifetimeResult& r);

/// Pair a baseline with a V2G run. Throws ComparisonError on mismatched
/// family or variant, censored or failed inputs, or a non-baseline first argument.
TvDResult tvd(const RunSummary& base, const RunSummary& v2g, bool use_wh = false);

struct TrendPoint {
  std::string family, scenario, variant;
  double cal_fraction = 0;
  TvDResult tvd;
};

struct TrendReport {
  std::vector<TrendPoint> points;    // all points
  std::vector<int> fitted;           // indices with a finite positive TvD
  std::vector<int> excluded;         // Zero / Infinite points
  bool slope_defined = false;
  double slope = 0, intercept = 0;   // log10 TvD = intercept + slope * cal_fraction
  double spearman = 0;
  bool monotone = false;             // spearman > 0.8
  std::string warning;
};

TrendReport trend_report(const std::vector<TrendPoint>& points);

/// Spearman rank correlation with average ranks for ties. NaN if undefined.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace cellwear
