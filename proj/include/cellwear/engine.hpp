#pragma once
#include <memory>
#include <string>
#include <vector>

#include "cellwear/cell_model.hpp"
#include "cellwear/duty.hpp"
#include "cellwear/state.hpp"

namespace cellwear {

struct DayLog {
  int day = 0;
  bool simulated = false;
  double ah_throughput = 0;  // Ah this day
  double wh_throughput = 0;
  LliLedger lli_increment;   // mol this day
  LliLedger ledger;          // cumulative, mol
  double n_Li = 0;           // mol, end of day
  double C_p = 0, C_n = 0;   // Ah, end of day
  double lli = 0;            // fraction of BOL lithium
  double capacity = 0;       // Ah
  double soc_min = 0, soc_max = 0, soc_mean = 0;
  int window_violations = 0;
  double cum_ah = 0, cum_wh = 0;
};

/// Optional per-step recording of a simulated day.
struct DayTrace {
  std::vector<double> t, soc, V, I;
};

/// Integrate one schedule period. Mechanisms act on every step.
DayLog simulate_day(CellState& s, const DutySchedule& sched, const CellModel& model, int day_index,
                    DayTrace* trace = nullptr);

/// Slow states that the accelerated mode extrapolates between representative days.
struct SlowState {
  double delta_SEI = 0, delta_pl = 0;
  double eps_neg = 0, eps_pos = 0;
  double eps_diss_loss = 0, eps_crack_loss_neg = 0, eps_crack_loss_pos = 0;
  double n_Li = 0;
  LliLedger ledger;

  static SlowState of(const CellState& s);
  SlowState operator-(const SlowState& o) const;
  SlowState operator+(const SlowState& o) const { return *this - o.scaled(-1.0); }
  SlowState scaled(double k) const;
};

/// Largest jump [days] whose linear capacity prediction stays within
/// tol_capacity_frac of C_nom, clamped to [1, max_jump]. Uses the last two logs.
int choose_jump(const std::vector<DayLog>& logs, double tol_capacity_frac, double C_nom,
                int max_jump = 20);

/// Advance slow states by slope * dk days and reset profiles to rest at end_soc.
/// Throws BookkeepingError if the jump would break a state invariant.
CellState extrapolate(const CellState& s, const SlowState& slope_per_day, double dk,
                      const CellParameters& p, double end_soc);

enum class Mode { Exhaustive, Accelerated };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

inline constexpr double kDefaultJumpTol = 0.02;

struct LifetimeOptions {
  Mode mode = Mode::Accelerated;
  double eol_frac = 0.70;
  int day_cap = 3000;
  double tol_jump = kDefaultJumpTol;
  int max_jump = 20;
  /// Stop after this many days even if EOL is not reached (fitting horizons).
  int horizon_days = 0;
};

struct LifetimeResult {
  std::string cell;
  std::string scenario;
  std::string variant;
  Mode mode = Mode::Accelerated;
  double C_nom = 0;
  double n_Li_bol = 0;
  double C_p0 = 0, C_n0 = 0;  // BOL electrode capacities
  double theta = 0;
  std::vector<DayLog> logs;  // day 0 (BOL) first
  int simulated_days = 0;

  bool reached_eol = false;
  bool censored = false;
  bool failed = false;
  std::string termination;  // "eol", "day_cap", "horizon" or failure text

  // values at EOL, interpolated linearly between bracketing logs
  double eol_day = 0;
  double eol_throughput_ah = 0;
  double eol_throughput_wh = 0;
  double eol_C_p = 0, eol_C_n = 0;
  LliLedger eol_ledger;
  double eol_n_Li = 0;

  /// Interpolated capacity fraction at a fractional day.
  double capacity_frac_at(double day) const;
};

LifetimeResult run_lifetime(const CellParameters& cell, const DutySchedule& sched,
                            const LifetimeOptions& opt, const CellState* initial = nullptr);

/// Bisect the charge placement so that the fresh-cell day hits the
/// scenario's SOC_ave anchor.
double calibrate_theta(Scenario scenario, DriveVariant variant,
                       std::shared_ptr<const CurrentProfile> profile, const CellParameters& cell,
                       double tol = 1e-4);

/// Bundled drive profile for a variant.
std::shared_ptr<const CurrentProfile> bundled_profile(DriveVariant v);

/// Schedule as used for the lifetime grid. The short variant reuses the
/// long-variant placement.
DutySchedule scenario_schedule(Scenario scenario, DriveVariant variant, const CellParameters& cell);

}  // namespace cellwear
