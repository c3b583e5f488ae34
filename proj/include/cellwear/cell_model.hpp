#pragma once
#include "cellwear/params.hpp"
#include "cellwear/spm.hpp"
#include "cellwear/state.hpp"

namespace cellwear {

/// Coupled interface solution at a frozen state and terminal current.
struct InterfaceSolution {
  double j_tot_neg = 0;  // A/m^2
  double j_int_neg = 0;
  double j_sei = 0;      // <= 0
  double j_pl = 0;       // <= 0
  double eta_neg = 0;
  double phi_neg = 0;    // solid potential vs electrolyte
  double j_pos = 0;
  double eta_pos = 0;
  double phi_pos = 0;
  double R_film = 0;     // Ohm
  double V = 0;          // terminal voltage
};

struct StepInfo {
  double I = 0;
  double V = 0;
  double phi_pos = 0;
  double sigma_neg = 0, sigma_pos = 0;
  double j_sei = 0, j_pl = 0;
};

/// SPM with the four side mechanisms. Holds the radial grids; one instance
/// per simulation thread.
class CellModel {
 public:
  explicit CellModel(CellParameters p);

  const CellParameters& params() const { return p_; }

  /// Solve the negative interface (intercalation + SEI + plating) for
  /// phi_s,neg by a bracketed root find, and the positive explicitly.
  InterfaceSolution interface(const CellState& s, double I) const;
  double voltage(const CellState& s, double I) const { return interface(s, I).V; }

  /// Advance by dt at terminal current I (discharge positive). Kinetics and
  /// side reactions use the start-of-step state, diffusion is implicit.
  StepInfo step(CellState& s, double I, double dt) const;

  /// Current that holds the terminal voltage at v_target, searched in [I_lo, I_hi].
  double current_for_voltage(const CellState& s, double v_target, double I_lo, double I_hi) const;

 private:
  CellParameters p_;
  SphereGrid gn_, gp_;
};

/// Free-function form of the terminal voltage.
double terminal_voltage(const CellState& s, const CellParameters& p, double I);

}  // namespace cellwear
