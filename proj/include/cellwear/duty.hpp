#pragma once
#include <memory>
#include <string>
#include <vector>

#include "cellwear/params.hpp"

namespace cellwear {

/// Piecewise-constant C-rate trace; c_rate[i] holds on [t[i], t[i+1]).
/// Discharge is positive.
struct CurrentProfile {
  std::vector<double> t;
  std::vector<double> c_rate;
  double distance_mi = 0;
  std::string name;

  double duration() const { return t.empty() ? 0.0 : t.back() - t.front(); }
  /// Net charge removed over the profile, in C_nom hours.
  double net_c_hours() const;
  double abs_c_hours() const;
  std::size_t index_at(double time) const;
};

CurrentProfile load_drive_profile(const std::string& path);

enum class Scenario { NoV2G, ModerateV2G, EarlyChargeV2G, LateChargeV2G };
enum class DriveVariant { Long, Short };

std::string to_string(Scenario s);
std::string to_string(DriveVariant v);
Scenario parse_scenario(const std::string& s);
DriveVariant parse_variant(const std::string& s);
bool is_v2g(Scenario s);
/// Fresh-cell SOC_ave anchor for each scenario.
double target_soc_ave(Scenario s);

enum class SegmentKind { Drive, Rest, ChargeCC, ChargeCV, DischargeCC };

struct Segment {
  SegmentKind kind = SegmentKind::Rest;
  double start = 0;     // s
  double duration = 0;  // s
  double c_rate = 0;    // magnitude, 1/h
  double target_soc = 1.0;     // charge stops here
  double stop_soc = -1.0;      // discharge/drive stops here (disabled if < 0)
  double v_max = 4.2;
  double cutoff_c_rate = 0.02; // CV termination
  bool grid = false;           // discharge delivered to the grid
  bool loop_profile = false;   // repeat the drive trace until stop_soc
  std::shared_ptr<const CurrentProfile> profile;

  double end() const { return start + duration; }
};

struct DutySchedule {
  std::string label;
  Scenario scenario = Scenario::NoV2G;
  DriveVariant variant = DriveVariant::Long;
  std::vector<Segment> segments;
  double period = 86400.0;
  double theta = 1.0;  // charge placement fraction

  /// Throws ScheduleError unless segments tile [0, period) exactly.
  void check_tiling() const;
  int count(SegmentKind k) const;
};

/// Day origin is the start of the morning drive; the afternoon drive starts 9 h later.
inline constexpr double kAfternoonDrive = 9.0 * 3600.0;
inline constexpr double kWorkChargeC = 0.25;
inline constexpr double kHomeChargeC = 0.125;
inline constexpr double kGridC = 0.25;
inline constexpr double kGridSeconds = 3600.0;

/// Build the 24 h schedule with both charges placed by theta: 0 starts each
/// charge right after the preceding discharge, 1 ends it at the next drive.
DutySchedule build_schedule(Scenario scenario, DriveVariant variant,
                            std::shared_ptr<const CurrentProfile> profile,
                            const CellParameters& cell, double theta);

/// Rest-only schedule (calendar aging).
DutySchedule rest_schedule(const CellParameters& cell);

/// Time-weighted mean of a piecewise-linear trace.
double soc_average(const std::vector<double>& t, const std::vector<double>& soc);

}  // namespace cellwear
