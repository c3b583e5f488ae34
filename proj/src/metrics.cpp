#include "cellwear/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cellwear/errors.hpp"

namespace cellwear {

double lli_total(double n_li_bol, double n_li_k) {
  if (!(n_li_bol > 0)) throw BookkeepingError("lli_total: n_Li at BOL must be positive");
  const double v = (n_li_bol - n_li_k) / n_li_bol;
  if (v < -1e-9) throw BookkeepingError("lli_total: lithium inventory grew above BOL");
  return std::max(v, 0.0);
}

LLIBreakdown make_breakdown(double total, double sei, double plating, double diss, double crack,
                            double tol) {
  LLIBreakdown b{total, sei, plating, diss, crack};
  for (double c : {sei, plating, diss, crack})
    if (c < -tol) throw AttributionError("negative LLI component");
  if (std::abs(b.sum() - total) > tol)
    throw AttributionError("LLI components do not close: total " + std::to_string(total) +
                           ", sum " + std::to_string(b.sum()));
  return b;
}

LLIBreakdown breakdown(const LifetimeResult& r, double tol) {
  if (r.censored || !r.reached_eol) throw AttributionError("run has no EOL, breakdown undefined");
  const double nb = r.n_Li_bol;
  const auto& L = r.eol_ledger;
  return make_breakdown(lli_total(nb, r.eol_n_Li), L.sei / nb, L.plating / nb, L.diss / nb,
                        L.crack / nb, tol);
}

LLIBreakdown breakdown(const DayLog& log, double nb, double tol) {
  const auto& L = log.ledger;
  return make_breakdown(lli_total(nb, log.n_Li), L.sei / nb, L.plating / nb, L.diss / nb,
                        L.crack / nb, tol);
}

double normalized_throughput(double ah, double c_nom) {
  if (!(c_nom > 0)) throw std::invalid_argument("normalized_throughput: C_nom must be positive");
  return ah / c_nom;
}

std::string to_string(TvDKind k) {
  switch (k) {
    case TvDKind::Zero: return "zero";
    case TvDKind::Finite: return "finite";
    case TvDKind::Infinite: return "infinite";
  }
  return "?";
}

TvDResult tvd(double base_days, double base_thru, double v2g_days, double v2g_thru) {
  if (!(base_days > 0) || !(base_thru > 0)) throw ComparisonError("baseline days and throughput must be positive");
  TvDResult t;
  t.gain_frac = (v2g_thru - base_thru) / base_thru;
  t.loss_frac = (base_days - v2g_days) / base_days;
  if (t.gain_frac < 0) {
    t.kind = TvDKind::Zero;
    t.value = 0;
  } else if (t.loss_frac < 0 || (t.loss_frac == 0 && t.gain_frac > 0)) {
    t.kind = TvDKind::Infinite;
    t.value = std::numeric_limits<double>::infinity();
  } else {
    t.kind = TvDKind::Finite;
    t.value = t.loss_frac == 0 ? 0.0 : t.gain_frac / t.loss_frac;
  }
  return t;
}

RunSummary summarize(const LifetimeResult& r) {
  RunSummary s;
  s.cell = r.cell;
  s.scenario = r.scenario;
  s.variant = r.variant;
  s.mode = to_string(r.mode);
  s.termination = r.termination;
  s.C_nom = r.C_nom;
  s.reached_eol = r.reached_eol;
  s.censored = r.censored;
  s.failed = r.failed;
  s.simulated_days = r.simulated_days;
  if (r.reached_eol) {
    s.days = r.eol_day;
    s.norm_thru_ah = normalized_throughput(r.eol_throughput_ah, r.C_nom);
    s.norm_thru_wh = normalized_throughput(r.eol_throughput_wh, r.C_nom);
    s.cp_retention = r.eol_C_p / r.C_p0;
    s.cn_retention = r.eol_C_n / r.C_n0;
    s.lli = breakdown(r);
  } else if (!r.logs.empty()) {
    const auto& L = r.logs.back();
    s.days = L.day;
    s.norm_thru_ah = normalized_throughput(L.cum_ah, r.C_nom);
    s.norm_thru_wh = normalized_throughput(L.cum_wh, r.C_nom);
    s.cp_retention = L.C_p / r.C_p0;
    s.cn_retention = L.C_n / r.C_n0;
    s.lli = breakdown(L, r.n_Li_bol);
  }
  return s;
}

TvDResult tvd(const RunSummary& base, const RunSummary& v2g, bool use_wh) {
  if (base.cell != v2g.cell) throw ComparisonError("cannot compare " + base.cell + " with " + v2g.cell);
  if (base.variant != v2g.variant)
    throw ComparisonError("cannot compare drive variants " + base.variant + " and " + v2g.variant);
  if (base.scenario != "no_v2g") throw ComparisonError("baseline must be the no_v2g scenario");
  if (v2g.scenario == "no_v2g") throw ComparisonError("second run must be a V2G scenario");
  for (const auto* s : {&base, &v2g})
    if (s->censored || s->failed || !s->reached_eol)
      throw ComparisonError(s->cell + " " + s->scenario + "/" + s->variant + " did not reach EOL");
  return use_wh ? tvd(base.days, base.norm_thru_wh, v2g.days, v2g.norm_thru_wh)
                : tvd(base.days, base.norm_thru_ah, v2g.days, v2g.norm_thru_ah);
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (double(i) + double(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = double(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return pearson(ranks(a), ranks(b));
}

TrendReport trend_report(const std::vector<TrendPoint>& points) {
  TrendReport t;
  t.points = points;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.tvd.kind == TvDKind::Finite && p.tvd.value > 0) {
      t.fitted.push_back(int(i));
      xs.push_back(p.cal_fraction);
      ys.push_back(std::log10(p.tvd.value));
    } else {
      t.excluded.push_back(int(i));
    }
  }
  if (xs.size() < 2) {
    t.warning = "empty trend: fewer than two finite TvD values";
    t.spearman = std::numeric_limits<double>::quiet_NaN();
    return t;
  }
  const double n = double(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx > 1e-14 * n * std::max(1.0, mx * mx)) {
    t.slope_defined = true;
    t.slope = sxy / sxx;
    t.intercept = my - t.slope * mx;
  } else {
    t.warning = "slope undefined: all cal_fraction values are equal";
  }
  t.spearman = spearman(xs, ys);
  t.monotone = std::isfinite(t.spearman) && t.spearman > 0.8;
  return t;
}

}  // namespace cellwear
