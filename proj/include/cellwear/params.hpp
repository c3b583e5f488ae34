#pragma once
#include <string>

#include "cellwear/ocp.hpp"

namespace cellwear {

inline constexpr double kFaraday = 96485.33212;  // C/mol
inline constexpr double kGas = 8.314462618;      // J/(mol K)

struct ElectrodeParameters {
  double c_s_max = 0;         // mol/m^3
  double D_s = 0;             // m^2/s
  double R_p = 0;             // m
  double l = 0;               // m
  double eps_s0 = 0;          // active material ratio at BOL
  double k_0 = 0;             // A m^-2 (m^3/mol)^1.5
  double alpha = 0.5;
  OCPCurve ocp;
  double E = 0;               // Pa
  double nu = 0;
  double Omega = 0;           // m^3/mol
  double sigma_critical = 0;  // Pa
  double sto_0 = 0;           // stoichiometry at SOC 0
  double sto_100 = 0;         // stoichiometry at SOC 1

  void validate(const std::string& tag) const;
};

struct SEIParameters {
  double k_SEI = 0;       // m/s
  double D_SEI = 0;       // m^2/s
  double alpha_SEI = 0.5;
  double U_SEI = 0.4;     // V
  double kappa_SEI = 0;   // S/m
  double Omega_SEI = 0;   // m^3/mol
  double c_EC_bulk = 0;   // mol/m^3
  double delta_SEI0 = 0;  // m
};

struct PlatingParameters {
  double k_0_pl = 0;    // m/s
  double kappa_pl = 0;  // S/m
  double Omega_pl = 0;  // m^3/mol
  double gamma = 0.2;   // electrolyte correction per unit C-rate
};

struct DissolutionParameters {
  double i_0_diss = 0;    // A/m^2
  double E_eq_diss = 4.0; // V
  double Omega_diss = 0;  // m^3/mol, active volume lost per mol of dissolution charge
};

struct CrackParameters {
  double beta_neg = 0;  // 1/s
  double beta_pos = 0;  // 1/s
  double m_crack = 1;
};

/// Per-mechanism switches. All on for normal runs.
struct MechanismSwitches {
  bool sei = true;
  bool plating = true;
  bool dissolution = true;
  bool cracking = true;

  static MechanismSwitches none() { return {false, false, false, false}; }
  bool any() const { return sei || plating || dissolution || cracking; }
};

struct NumericsParameters {
  int n_shells = 20;
  double dt_drive = 1.0;  // s
  double dt_rest = 10.0;  // s, also used for CC/CV segments
};

struct CellParameters {
  std::string name;
  double C_nom = 0;  // Ah
  double A = 0;      // m^2
  ElectrodeParameters neg, pos;
  double c_e = 1000;  // mol/m^3
  double T = 298.15;  // K
  double R_ohmic0 = 0;
  double V_min = 3.0, V_max = 4.2;
  SEIParameters sei;
  PlatingParameters plating;
  DissolutionParameters dissolution;
  CrackParameters crack;
  MechanismSwitches mechanisms;
  NumericsParameters numerics;

  void validate() const;

  /// Theoretical electrode capacity [Ah] at active ratio eps.
  double electrode_capacity(const ElectrodeParameters& e, double eps) const;
};

/// Load a YAML cell file. OCP paths resolve relative to the file's directory.
CellParameters load_cell(const std::string& path);

/// Path of a bundled data file (data/ tree of the source checkout).
std::string data_path(const std::string& rel);

}  // namespace cellwear
