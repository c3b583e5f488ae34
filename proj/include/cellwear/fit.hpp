#pragma once
#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cellwear/dfo.hpp"
#include "cellwear/engine.hpp"

namespace cellwear {

enum class ConditionKind { Calendar, Cycling };

/// Cycling protocols known to the dataset simulator.
///   cc50     : C/2 cycling between SOC 0.25 and 0.75, every 4th charge at 1.3C
///   drive100 : CC-CV charge at C/2 to SOC 1, looped drive profile down to empty
struct AgingCondition {
  ConditionKind kind = ConditionKind::Calendar;
  double soc = 1.0;          // calendar storage SOC
  std::string protocol;      // cycling protocol
};

struct Observation {
  double day = 0;
  double C_p = 0, C_n = 0;  // Ah
  double lli = 0;           // fraction
};

struct AgingDataset {
  std::string family;
  std::string name;
  AgingCondition condition;
  std::vector<Observation> obs;

  void validate(const std::string& where = "dataset") const;
  double duration() const { return obs.empty() ? 0.0 : obs.back().day; }
};

AgingDataset load_dataset(const std::string& path);
void write_dataset(const std::string& path, const AgingDataset& d);
/// All *.csv datasets in a directory, sorted by file name.
std::vector<AgingDataset> load_datasets(const std::string& dir);

DutySchedule condition_schedule(const AgingCondition& c, const CellParameters& cell);
CellState condition_initial_state(const AgingCondition& c, const CellParameters& cell);

/// Simulated eSOH at each observation day of the dataset.
std::vector<Observation> simulate_dataset(const CellParameters& cell, const AgingDataset& d,
                                          Mode mode = Mode::Accelerated);

enum class FitParam { k_SEI, D_SEI, i0_diss, k0_pl, beta_pos, beta_neg, m_crack };
std::string to_string(FitParam p);
double get_param(const CellParameters& c, FitParam p);
void set_param(CellParameters& c, FitParam p, double v);

/// A free parameter. Bounds are physical; log parameters are optimised in log10.
struct ParamSpec {
  FitParam id;
  bool log = true;
  double lower = 0, upper = 0;

  double to_internal(double v) const;
  double from_internal(double z) const;
};

/// Default bounds and scaling per parameter class.
ParamSpec default_spec(FitParam p);

enum class FitStage { Calendar, Cycling };

struct FitProblem {
  std::vector<AgingDataset> datasets;
  FitStage stage = FitStage::Calendar;
  std::vector<ParamSpec> free;
  std::array<double, 3> w{1.0, 1.0, 0.25};
  CellParameters base;  // fixed values for everything not free
  Mode mode = Mode::Accelerated;
  int jobs = 1;

  void validate() const;
};

inline constexpr double kPenaltyResidual = 10.0;

/// Weighted residuals sqrt(w_c)(zeta_obs - zeta_sim) for physical values P
/// (ordered as problem.free). C_p and C_n are divided by C_nom. A failed
/// simulation yields a constant penalty block.
Eigen::VectorXd residuals(const std::vector<double>& P, const FitProblem& problem,
                          bool* failed = nullptr);

struct StageReport {
  std::string stage;
  std::vector<std::string> names;
  std::vector<double> x0, value;
  double residual_norm = 0;
  double verify_norm = 0;  // same point in exhaustive mode
  int evals = 0;
  bool max_evals = false;
  std::string exit;
  std::vector<DfoTraceEntry> trace;
};

struct FitOptions {
  /// Starting values by parameter; missing entries use the geometric midpoint of the bounds.
  std::vector<std::pair<FitParam, double>> x0;
  std::vector<ParamSpec> bounds;  // overrides of default_spec
  double diss_threshold = 0.03;   // calendar C_p fade that switches i0_diss on
  int budget_per_dim = 100;
  bool verify = true;
  int jobs = 1;
};

struct FitReport {
  CellParameters fitted;
  bool diss_included = false;
  double calendar_cp_fade = 0;
  StageReport stage1, stage2;
};

/// Relative C_p fade over a calendar dataset from a least-squares line.
double calendar_cp_fade(const AgingDataset& d);

FitReport fit_pipeline(const std::vector<AgingDataset>& datasets, const CellParameters& start,
                       const FitOptions& opt = {});

/// Fit report as deterministic JSON text.
std::string fit_report_json(const FitReport& r);

/// Copy a cell file, replacing the degradation constants with those in p.
void write_cell_file(const std::string& src_yaml, const std::string& out, const CellParameters& p);

struct SyntheticSpec {
  double calendar_days = 720;
  double cycling_days = 180;
  double rpt_every = 30;          // calendar
  double cycling_rpt_every = 15;
  double noise = 0.01;  // relative, Gaussian
  unsigned seed = 7;
  Mode mode = Mode::Exhaustive;
};

/// Calendar (SOC 1, SOC 0.5) and cycling (cc50, drive100) datasets from a
/// known parameter set.
std::vector<AgingDataset> make_synthetic_datasets(const CellParameters& truth,
                                                  const SyntheticSpec& spec = {});

}  // namespace cellwear
