#include "cellwear/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "cellwear/errors.hpp"
#include "cellwear/log.hpp"

namespace cellwear {

namespace {

struct DayRunner {
  CellState& s;
  const CellModel& model;
  const CellParameters& P;
  DayLog& log;
  DayTrace* trace;
  ESOH window;
  double t_abs = 0;
  double soc_prev = 0;
  double soc_area = 0;

  StepInfo advance(double I, double dt) {
    StepInfo info = model.step(s, I, dt);
    log.ah_throughput += std::abs(I) * dt / 3600.0;
    log.wh_throughput += std::abs(I * info.V) * dt / 3600.0;
    const double soc_new = soc(s, P, window);
    soc_area += 0.5 * (soc_prev + soc_new) * dt;
    log.soc_min = std::min(log.soc_min, soc_new);
    log.soc_max = std::max(log.soc_max, soc_new);
    soc_prev = soc_new;
    t_abs += dt;
    if (trace) {
      trace->t.push_back(t_abs);
      trace->soc.push_back(soc_new);
      trace->V.push_back(info.V);
      trace->I.push_back(I);
    }
    return info;
  }

  void rest_until(double& t, double dur) {
    while (t < dur - 1e-9) {
      const double dt = std::min(P.numerics.dt_rest, dur - t);
      advance(0.0, dt);
      t += dt;
    }
  }

  void drive(const Segment& seg) {
    const CurrentProfile& prof = *seg.profile;
    const double pd = prof.duration();
    double t = 0;
    while (t < seg.duration - 1e-9) {
      double tp = t;
      if (seg.loop_profile) tp = std::fmod(t, pd);
      if (tp >= pd - 1e-9) break;
      const std::size_t k = prof.index_at(tp);
      const double boundary = k + 1 < prof.t.size() ? prof.t[k + 1] : pd;
      const double dt = std::min({P.numerics.dt_drive, boundary - tp, seg.duration - t});
      const double I = prof.c_rate[k] * P.C_nom;
      const StepInfo info = advance(I, dt);
      t += dt;
      if (I > 0 && info.V < P.V_min) {
        ++log.window_violations;
        break;
      }
      if (seg.stop_soc >= 0 && soc_prev <= seg.stop_soc) break;
    }
    rest_until(t, seg.duration);
  }

  void charge(const Segment& seg, bool cv_only) {
    enum { CC, CV, Done } phase = cv_only ? CV : CC;
    const double I_cc = -seg.c_rate * P.C_nom;
    const double I_floor = cv_only ? -P.C_nom : I_cc;
    double t = 0;
    while (t < seg.duration - 1e-9) {
      const double dt = std::min(P.numerics.dt_rest, seg.duration - t);
      if (phase != Done && soc_prev >= seg.target_soc) phase = Done;
      if (phase == CC) {
        const StepInfo info = advance(I_cc, dt);
        if (info.V > seg.v_max) phase = CV;
      } else if (phase == CV) {
        const double I = model.current_for_voltage(s, seg.v_max, I_floor, 0.0);
        if (-I < seg.cutoff_c_rate * P.C_nom) {
          phase = Done;
          advance(0.0, dt);
        } else {
          advance(I, dt);
        }
      } else {
        advance(0.0, dt);
      }
      t += dt;
    }
  }

  void discharge(const Segment& seg) {
    const double I = seg.c_rate * P.C_nom;
    double t = 0;
    while (t < seg.duration - 1e-9) {
      const double dt = std::min(P.numerics.dt_rest, seg.duration - t);
      const StepInfo info = advance(I, dt);
      t += dt;
      if (info.V < P.V_min) {
        ++log.window_violations;
        break;
      }
      if (seg.stop_soc >= 0 && soc_prev <= seg.stop_soc) break;
    }
    rest_until(t, seg.duration);
  }
};

const char* kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::Drive: return "drive";
    case SegmentKind::Rest: return "rest";
    case SegmentKind::ChargeCC: return "charge-cc";
    case SegmentKind::ChargeCV: return "charge-cv";
    case SegmentKind::DischargeCC: return "discharge-cc";
  }
  return "?";
}

void fill_esoh(DayLog& L, const ESOH& e) {
  L.C_p = e.C_p;
  L.C_n = e.C_n;
  L.lli = e.lli;
  L.capacity = e.capacity;
}

}  // namespace

DayLog simulate_day(CellState& s, const DutySchedule& sched, const CellModel& model, int day_index,
                    DayTrace* trace) {
  const auto& P = model.params();
  DayLog log;
  log.day = day_index;
  log.simulated = true;
  log.soc_min = std::numeric_limits<double>::infinity();
  log.soc_max = -std::numeric_limits<double>::infinity();
  const LliLedger led0 = s.ledger;

  DayRunner run{s, model, P, log, trace, esoh(s, P)};
  run.soc_prev = soc(s, P, run.window);
  log.soc_min = log.soc_max = run.soc_prev;
  if (trace) {
    trace->t.push_back(0.0);
    trace->soc.push_back(run.soc_prev);
    trace->V.push_back(model.voltage(s, 0.0));
    trace->I.push_back(0.0);
  }
  for (const auto& seg : sched.segments) {
    run.window = esoh(s, P);
    try {
      switch (seg.kind) {
        case SegmentKind::Drive: run.drive(seg); break;
        case SegmentKind::Rest: {
          double t = 0;
          run.rest_until(t, seg.duration);
          break;
        }
        case SegmentKind::ChargeCC: run.charge(seg, false); break;
        case SegmentKind::ChargeCV: run.charge(seg, true); break;
        case SegmentKind::DischargeCC: run.discharge(seg); break;
      }
    } catch (const std::exception& e) {
      throw SolverError("day " + std::to_string(day_index) + ", " + kind_name(seg.kind) +
                        " segment at t=" + std::to_string(run.t_abs) + " s: " + e.what());
    }
  }
  log.soc_mean = run.soc_area / std::max(run.t_abs, 1e-12);
  log.lli_increment = s.ledger - led0;
  log.ledger = s.ledger;
  log.n_Li = s.n_Li;
  fill_esoh(log, esoh(s, P));
  return log;
}

SlowState SlowState::of(const CellState& s) {
  SlowState o;
  o.delta_SEI = s.delta_SEI;
  o.delta_pl = s.delta_pl;
  o.eps_neg = s.neg.eps_s;
  o.eps_pos = s.pos.eps_s;
  o.eps_diss_loss = s.eps_diss_loss;
  o.eps_crack_loss_neg = s.eps_crack_loss_neg;
  o.eps_crack_loss_pos = s.eps_crack_loss_pos;
  o.n_Li = s.n_Li;
  o.ledger = s.ledger;
  return o;
}

SlowState SlowState::operator-(const SlowState& b) const {
  SlowState o;
  o.delta_SEI = delta_SEI - b.delta_SEI;
  o.delta_pl = delta_pl - b.delta_pl;
  o.eps_neg = eps_neg - b.eps_neg;
  o.eps_pos = eps_pos - b.eps_pos;
  o.eps_diss_loss = eps_diss_loss - b.eps_diss_loss;
  o.eps_crack_loss_neg = eps_crack_loss_neg - b.eps_crack_loss_neg;
  o.eps_crack_loss_pos = eps_crack_loss_pos - b.eps_crack_loss_pos;
  o.n_Li = n_Li - b.n_Li;
  o.ledger = ledger - b.ledger;
  return o;
}

SlowState SlowState::scaled(double k) const {
  SlowState o;
  o.delta_SEI = k * delta_SEI;
  o.delta_pl = k * delta_pl;
  o.eps_neg = k * eps_neg;
  o.eps_pos = k * eps_pos;
  o.eps_diss_loss = k * eps_diss_loss;
  o.eps_crack_loss_neg = k * eps_crack_loss_neg;
  o.eps_crack_loss_pos = k * eps_crack_loss_pos;
  o.n_Li = k * n_Li;
  o.ledger = k * ledger;
  return o;
}

int choose_jump(const std::vector<DayLog>& logs, double tol, double C_nom, int max_jump) {
  if (logs.size() < 2) return 1;
  const auto& a = logs[logs.size() - 2];
  const auto& b = logs.back();
  const double days = std::max(1, b.day - a.day);
  const double rate = std::abs(b.capacity - a.capacity) / days;
  if (rate <= 0.0) return max_jump;
  const double k = std::floor(tol * C_nom / rate * (1.0 + 1e-12));
  return static_cast<int>(std::clamp(k, 1.0, double(max_jump)));
}

CellState extrapolate(const CellState& s, const SlowState& d, double dk, const CellParameters& p,
                      double end_soc) {
  if (!(dk >= 0)) throw std::invalid_argument("extrapolate: negative jump");
  CellState o = s;
  if (dk == 0) return o;
  o.delta_SEI += dk * d.delta_SEI;
  o.delta_pl += dk * d.delta_pl;
  o.neg.eps_s += dk * d.eps_neg;
  o.pos.eps_s += dk * d.eps_pos;
  o.eps_diss_loss += dk * d.eps_diss_loss;
  o.eps_crack_loss_neg += dk * d.eps_crack_loss_neg;
  o.eps_crack_loss_pos += dk * d.eps_crack_loss_pos;
  o.n_Li += dk * d.n_Li;
  o.ledger += dk * d.ledger;
  const auto& L = o.ledger;
  if (!(o.neg.eps_s > 0 && o.pos.eps_s > 0 && o.n_Li > 0))
    throw BookkeepingError("extrapolation drives a state through zero");
  if (L.sei < 0 || L.plating < 0 || L.diss < 0 || L.crack < 0 || o.delta_SEI < s.delta_SEI ||
      o.delta_pl < s.delta_pl || o.neg.eps_s > s.neg.eps_s || o.pos.eps_s > s.pos.eps_s)
    throw BookkeepingError("extrapolation reverses a monotone state");
  try {
    relax_to_soc(o, p, end_soc);
  } catch (const std::exception& e) {
    throw BookkeepingError(std::string("extrapolated state infeasible: ") + e.what());
  }
  return o;
}

std::string to_string(Mode m) { return m == Mode::Exhaustive ? "exhaustive" : "accelerated"; }

Mode parse_mode(const std::string& s) {
  if (s == "exhaustive") return Mode::Exhaustive;
  if (s == "accelerated") return Mode::Accelerated;
  throw ConfigError("unknown mode '" + s + "'");
}

double LifetimeResult::capacity_frac_at(double day) const {
  if (logs.empty()) return 0;
  if (day <= logs.front().day) return logs.front().capacity / C_nom;
  for (std::size_t i = 1; i < logs.size(); ++i) {
    if (logs[i].day >= day) {
      const auto& a = logs[i - 1];
      const auto& b = logs[i];
      const double f = (day - a.day) / double(b.day - a.day);
      return (a.capacity + f * (b.capacity - a.capacity)) / C_nom;
    }
  }
  return logs.back().capacity / C_nom;
}

namespace {

bool same_direction(const SlowState& base, const SlowState& eff) {
  auto ok = [](double b, double e) { return b == 0.0 ? e == 0.0 : (b > 0) == (e > 0) || e == 0.0; };
  return ok(base.delta_SEI, eff.delta_SEI) && ok(base.delta_pl, eff.delta_pl) &&
         ok(base.eps_neg, eff.eps_neg) && ok(base.eps_pos, eff.eps_pos) &&
         ok(base.ledger.sei, eff.ledger.sei) && ok(base.ledger.plating, eff.ledger.plating) &&
         ok(base.ledger.diss, eff.ledger.diss) && ok(base.ledger.crack, eff.ledger.crack) &&
         ok(base.eps_diss_loss, eff.eps_diss_loss) &&
         ok(base.eps_crack_loss_neg, eff.eps_crack_loss_neg) &&
         ok(base.eps_crack_loss_pos, eff.eps_crack_loss_pos);
}

// Returns true once capacity has crossed the EOL threshold.
bool check_eol(LifetimeResult& R, double eol_frac) {
  const auto& b = R.logs.back();
  if (b.capacity / R.C_nom >= eol_frac) return false;
  R.reached_eol = true;
  R.termination = "eol";
  if (R.logs.size() == 1) {
    R.eol_day = 0;
    R.eol_C_p = b.C_p;
    R.eol_C_n = b.C_n;
    R.eol_ledger = b.ledger;
    R.eol_n_Li = b.n_Li;
    return true;
  }
  const auto& a = R.logs[R.logs.size() - 2];
  const double target = eol_frac * R.C_nom;
  const double f = (a.capacity - target) / (a.capacity - b.capacity);
  auto lerp = [f](double x, double y) { return x + f * (y - x); };
  R.eol_day = lerp(a.day, b.day);
  R.eol_throughput_ah = lerp(a.cum_ah, b.cum_ah);
  R.eol_throughput_wh = lerp(a.cum_wh, b.cum_wh);
  R.eol_C_p = lerp(a.C_p, b.C_p);
  R.eol_C_n = lerp(a.C_n, b.C_n);
  R.eol_n_Li = lerp(a.n_Li, b.n_Li);
  R.eol_ledger = {lerp(a.ledger.sei, b.ledger.sei), lerp(a.ledger.plating, b.ledger.plating),
                  lerp(a.ledger.diss, b.ledger.diss), lerp(a.ledger.crack, b.ledger.crack)};
  return true;
}

}  // namespace

LifetimeResult run_lifetime(const CellParameters& cell, const DutySchedule& sched,
                            const LifetimeOptions& opt, const CellState* initial) {
  CellModel model(cell);
  CellState s = initial ? *initial : fresh_state(cell);
  LifetimeResult R;
  R.cell = cell.name;
  R.scenario = to_string(sched.scenario);
  R.variant = to_string(sched.variant);
  if (sched.label == "rest" || sched.label.rfind("dataset", 0) == 0) R.scenario = sched.label;
  R.mode = opt.mode;
  R.C_nom = cell.C_nom;
  R.n_Li_bol = s.n_Li_bol;
  R.theta = sched.theta;

  {
    DayLog L0;
    L0.day = 0;
    L0.simulated = false;
    L0.ledger = s.ledger;
    L0.n_Li = s.n_Li;
    const ESOH e = esoh(s, cell);
    fill_esoh(L0, e);
    L0.soc_min = L0.soc_max = L0.soc_mean = soc(s, cell, e);
    R.C_p0 = e.C_p;
    R.C_n0 = e.C_n;
    R.logs.push_back(L0);
  }
  if (check_eol(R, opt.eol_frac)) return R;

  bool have_prev = false;
  SlowState prev_slope;
  int prev_day = 0;
  int day = 0;
  double cum_ah = 0, cum_wh = 0;

  try {
    while (true) {
      if (opt.horizon_days > 0 && day >= opt.horizon_days) {
        R.termination = "horizon";
        break;
      }
      if (day >= opt.day_cap) {
        R.censored = true;
        R.termination = "day_cap";
        break;
      }
      const SlowState s0 = SlowState::of(s);
      DayLog L = simulate_day(s, sched, model, day + 1);
      ++day;
      ++R.simulated_days;
      cum_ah += L.ah_throughput;
      cum_wh += L.wh_throughput;
      L.cum_ah = cum_ah;
      L.cum_wh = cum_wh;
      R.logs.push_back(L);
      if (check_eol(R, opt.eol_frac)) break;
      if (opt.mode != Mode::Accelerated) continue;

      const SlowState slope = SlowState::of(s) - s0;
      int dk = choose_jump(R.logs, opt.tol_jump, cell.C_nom, opt.max_jump);
      dk = std::min(dk, opt.day_cap - day);
      if (opt.horizon_days > 0) dk = std::min(dk, opt.horizon_days - day);

      SlowState eff = slope;
      if (have_prev && dk > 0) {
        // second-order (Adams-Bashforth) rate extrapolation over the jump
        const double h = double(day - prev_day);
        const SlowState cand = slope + (slope - prev_slope).scaled(0.5 * (dk + 1) / h);
        if (same_direction(slope, cand)) eff = cand;
      }
      prev_slope = slope;
      prev_day = day;
      have_prev = true;
      if (dk <= 0) continue;

      const double end_soc = soc(s, cell);
      CellState next;
      while (dk > 0) {
        try {
          next = extrapolate(s, eff, dk, cell, end_soc);
          break;
        } catch (const BookkeepingError& e) {
          CW_LOG_DEBUG("jump of {} days rejected: {}", dk, e.what());
          dk /= 2;
        }
      }
      if (dk == 0) continue;

      const SlowState base = SlowState::of(s);
      bool eol = false;
      for (int i = 1; i <= dk; ++i) {
        DayLog X;
        X.day = day + i;
        X.simulated = false;
        X.ah_throughput = L.ah_throughput;
        X.wh_throughput = L.wh_throughput;
        X.lli_increment = eff.ledger;
        X.ledger = base.ledger;
        X.ledger += double(i) * eff.ledger;
        X.n_Li = base.n_Li + i * eff.n_Li;
        X.soc_min = L.soc_min;
        X.soc_max = L.soc_max;
        X.soc_mean = L.soc_mean;
        cum_ah += L.ah_throughput;
        cum_wh += L.wh_throughput;
        X.cum_ah = cum_ah;
        X.cum_wh = cum_wh;
        fill_esoh(X, esoh(cell, cell.electrode_capacity(cell.neg, base.eps_neg + i * eff.eps_neg),
                          cell.electrode_capacity(cell.pos, base.eps_pos + i * eff.eps_pos), X.n_Li,
                          s.n_Li_bol));
        R.logs.push_back(X);
        if (check_eol(R, opt.eol_frac)) {
          eol = true;
          break;
        }
      }
      day += dk;
      s = next;
      if (eol) break;
    }
  } catch (const std::exception& e) {
    R.failed = true;
    R.termination = std::string("failure: ") + e.what();
    CW_LOG_WARN("{} {}: {}", R.cell, sched.label, R.termination);
  }
  return R;
}

std::shared_ptr<const CurrentProfile> bundled_profile(DriveVariant v) {
  static const auto long_p =
      std::make_shared<const CurrentProfile>(load_drive_profile(data_path("drive/long.dat")));
  static const auto short_p =
      std::make_shared<const CurrentProfile>(load_drive_profile(data_path("drive/short.dat")));
  return v == DriveVariant::Long ? long_p : short_p;
}

double calibrate_theta(Scenario scenario, DriveVariant variant,
                       std::shared_ptr<const CurrentProfile> profile, const CellParameters& cell,
                       double tol) {
  CellModel model(cell);
  const CellState fresh = fresh_state(cell);
  auto soc_ave = [&](double theta) {
    const DutySchedule d = build_schedule(scenario, variant, profile, cell, theta);
    CellState s = fresh;
    return simulate_day(s, d, model, 1).soc_mean;
  };
  const double target = target_soc_ave(scenario);
  double lo = 0.0, hi = 1.0;
  const double f_lo = soc_ave(lo), f_hi = soc_ave(hi);
  if (f_lo <= target) {
    CW_LOG_WARN("{} {}: SOC_ave {:.4f} at earliest placement is below target {:.2f}", cell.name,
                to_string(scenario), f_lo, target);
    return 0.0;
  }
  if (f_hi >= target) {
    CW_LOG_WARN("{} {}: SOC_ave {:.4f} at latest placement is above target {:.2f}", cell.name,
                to_string(scenario), f_hi, target);
    return 1.0;
  }
  while (hi - lo > tol) {
    const double m = 0.5 * (lo + hi);
    (soc_ave(m) > target ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

DutySchedule scenario_schedule(Scenario scenario, DriveVariant variant, const CellParameters& cell) {
  static std::mutex mu;
  static std::map<std::string, double> cache;
  const std::string key = cell.name + "|" + std::to_string(cell.C_nom) + "|" + to_string(scenario);
  double theta;
  {
    std::unique_lock lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) {
      theta = it->second;
    } else {
      lk.unlock();
      theta = calibrate_theta(scenario, DriveVariant::Long, bundled_profile(DriveVariant::Long), cell);
      lk.lock();
      cache[key] = theta;
    }
  }
  return build_schedule(scenario, variant, bundled_profile(variant), cell, theta);
}

}  // namespace cellwear
