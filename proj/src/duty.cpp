#include "cellwear/duty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cellwear/errors.hpp"

namespace cellwear {

double CurrentProfile::net_c_hours() const {
  double q = 0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) q += c_rate[i] * (t[i + 1] - t[i]);
  return q / 3600.0;
}

double CurrentProfile::abs_c_hours() const {
  double q = 0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) q += std::abs(c_rate[i]) * (t[i + 1] - t[i]);
  return q / 3600.0;
}

std::size_t CurrentProfile::index_at(double time) const {
  auto it = std::upper_bound(t.begin(), t.end(), time);
  if (it == t.begin()) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(it - t.begin()) - 1, t.size() - 1);
}

CurrentProfile load_drive_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open drive profile " + path);
  CurrentProfile p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(first + 1, colon - first - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      std::string val = line.substr(colon + 1);
      val.erase(0, val.find_first_not_of(' '));
      if (key == "distance_mi") {
        try {
          p.distance_mi = std::stod(val);
        } catch (const std::exception&) {
          throw SchemaError(path, lineno, "bad distance_mi");
        }
      } else if (key == "name") {
        p.name = val;
      }
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) throw SchemaError(path, lineno, "expected 'time_s c_rate'");
    if (!std::isfinite(a) || !std::isfinite(b)) throw SchemaError(path, lineno, "non-finite value");
    if (!p.t.empty() && !(a > p.t.back()))
      throw SchemaError(path, lineno, "time must increase strictly");
    if (p.t.empty() && a != 0.0) throw SchemaError(path, lineno, "time must start at 0");
    p.t.push_back(a);
    p.c_rate.push_back(b);
  }
  if (p.t.size() < 2) throw SchemaError(path, lineno, "profile needs at least two samples");
  if (p.net_c_hours() < 0) throw SchemaError(path, lineno, "drive profile is net charging");
  return p;
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::NoV2G: return "no_v2g";
    case Scenario::ModerateV2G: return "v2g_moderate";
    case Scenario::EarlyChargeV2G: return "v2g_early";
    case Scenario::LateChargeV2G: return "v2g_late";
  }
  return "?";
}

std::string to_string(DriveVariant v) { return v == DriveVariant::Long ? "long" : "short"; }

Scenario parse_scenario(const std::string& s) {
  for (auto sc : {Scenario::NoV2G, Scenario::ModerateV2G, Scenario::EarlyChargeV2G,
                  Scenario::LateChargeV2G})
    if (to_string(sc) == s) return sc;
  throw ConfigError("unknown scenario '" + s + "'");
}

DriveVariant parse_variant(const std::string& s) {
  if (s == "long") return DriveVariant::Long;
  if (s == "short") return DriveVariant::Short;
  throw ConfigError("unknown drive variant '" + s + "'");
}

bool is_v2g(Scenario s) { return s != Scenario::NoV2G; }

double target_soc_ave(Scenario s) {
  switch (s) {
    case Scenario::NoV2G: return 0.79;
    case Scenario::ModerateV2G: return 0.79;
    case Scenario::EarlyChargeV2G: return 0.88;
    case Scenario::LateChargeV2G: return 0.61;
  }
  return 0.79;
}

void DutySchedule::check_tiling() const {
  if (segments.empty()) throw ScheduleError("empty schedule");
  double t = 0;
  for (const auto& s : segments) {
    if (std::abs(s.start - t) > 1e-6) throw ScheduleError("gap or overlap in schedule");
    if (!(s.duration > 0)) throw ScheduleError("segment with non-positive duration");
    t = s.end();
  }
  if (std::abs(t - period) > 1e-6) throw ScheduleError("schedule does not cover the period");
}

int DutySchedule::count(SegmentKind k) const {
  return static_cast<int>(std::count_if(segments.begin(), segments.end(),
                                        [k](const Segment& s) { return s.kind == k; }));
}

namespace {

void push(std::vector<Segment>& v, Segment s) {
  if (s.duration > 1e-9) v.push_back(std::move(s));
}

Segment rest(double start, double end) {
  Segment s;
  s.kind = SegmentKind::Rest;
  s.start = start;
  s.duration = end - start;
  return s;
}

}  // namespace

DutySchedule build_schedule(Scenario scenario, DriveVariant variant,
                            std::shared_ptr<const CurrentProfile> profile,
                            const CellParameters& cell, double theta) {
  if (!profile) throw ScheduleError("missing drive profile");
  if (!(theta >= 0 && theta <= 1)) throw ScheduleError("charge placement outside [0, 1]");
  DutySchedule d;
  d.scenario = scenario;
  d.variant = variant;
  d.theta = theta;
  d.label = to_string(scenario) + "/" + to_string(variant);

  const double drive = profile->duration();
  const bool v2g = is_v2g(scenario);
  const double grid = v2g ? kGridSeconds : 0.0;
  // Ah deficit after each drive (+ grid) leg, in C_nom hours
  const double deficit = profile->net_c_hours() + (v2g ? kGridC * kGridSeconds / 3600.0 : 0.0);
  const double cv_allowance = 0.5 * 3600.0;

  const double legs[2][3] = {{0.0, kAfternoonDrive, kWorkChargeC},
                             {kAfternoonDrive, d.period, kHomeChargeC}};
  for (const auto& leg : legs) {
    const double t0 = leg[0], next = leg[1], rate = leg[2];
    Segment dr;
    dr.kind = SegmentKind::Drive;
    dr.start = t0;
    dr.duration = drive;
    dr.profile = profile;
    push(d.segments, dr);
    double t = t0 + drive;
    if (v2g) {
      Segment g;
      g.kind = SegmentKind::DischargeCC;
      g.start = t;
      g.duration = grid;
      g.c_rate = kGridC;
      g.grid = true;
      push(d.segments, g);
      t += grid;
    }
    const double need = deficit / rate * 3600.0 + cv_allowance;
    const double slack = (next - t) - need;
    if (slack < 0) throw ScheduleError("charge window too short to restore SOC 1");
    const double cs = t + theta * slack;
    push(d.segments, rest(t, cs));
    Segment ch;
    ch.kind = SegmentKind::ChargeCC;
    ch.start = cs;
    ch.duration = next - cs;
    ch.c_rate = rate;
    ch.target_soc = 1.0;
    ch.v_max = cell.V_max;
    ch.cutoff_c_rate = 0.02;
    push(d.segments, ch);
  }
  d.check_tiling();
  return d;
}

DutySchedule rest_schedule(const CellParameters&) {
  DutySchedule d;
  d.label = "rest";
  d.segments.push_back(rest(0.0, d.period));
  return d;
}

double soc_average(const std::vector<double>& t, const std::vector<double>& soc) {
  if (t.size() != soc.size() || t.empty()) throw std::invalid_argument("soc_average: bad trace");
  if (t.size() == 1) return soc[0];
  double area = 0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) area += 0.5 * (soc[i] + soc[i + 1]) * (t[i + 1] - t[i]);
  return area / (t.back() - t.front());
}

}  // namespace cellwear
