#pragma once
#include <string>
#include <vector>

#include "cellwear/params.hpp"
#include "cellwear/state.hpp"

namespace cellwear {

/// Finite-volume sphere with shells of equal volume (uniform in r^3).
/// Implicit Euler in time, zero flux at the centre, imposed molar flux at
/// the surface (positive = lithium leaving the particle).
class SphereGrid {
 public:
  SphereGrid(int n_shells, double radius);

  int size() const { return n_; }
  double radius() const { return R_; }

  /// Advance c in place. Returns the extrapolated surface concentration.
  double step(std::vector<double>& c, double D, double flux, double dt) const;
  double surface(const std::vector<double>& c, double D, double flux) const;
  double average(const std::vector<double>& c) const;

  /// Node radii (volume centroids), for plotting and tests.
  const std::vector<double>& nodes() const { return rc_; }

 private:
  int n_;
  double R_;
  std::vector<double> rc_;     // node radius per shell
  std::vector<double> trans_;  // face area / node spacing, per internal face
  double vol_;                 // shell volume
  double surf_area_;
  mutable std::vector<double> a_, b_, cc_, d_;
};

/// One implicit diffusion step; throws SaturationError if any sample leaves
/// [0, c_s_max].
ElectrodeState diffusion_step(const ElectrodeState& elec, const ElectrodeParameters& p,
                              double surface_flux, double dt, int n_shells = 20,
                              const std::string& tag = "electrode");

void check_bounds(const ElectrodeState& e, double c_max, const std::string& tag);

/// i_0 = k_0 c_e^a c_ss^a (c_max - c_ss)^(1-a)  [A/m^2]
double exchange_current(double c_ss, double c_e, const ElectrodeParameters& p);

/// Inverse symmetric Butler-Volmer.
double overpotential(double j_int, double i_0, double T);

double specific_area(const ElectrodeParameters& p, double eps);

/// Electrode-specific state of health and the stoichiometry window it implies.
struct ESOH {
  double C_n = 0, C_p = 0;  // Ah
  double Q_Li = 0;          // cyclable lithium expressed in Ah
  double x0 = 0, x100 = 0, y0 = 0, y100 = 0;
  double capacity = 0;  // Ah between V_min and V_max
  double lli = 0;       // fraction of BOL lithium lost
};

ESOH esoh(const CellParameters& p, double C_n, double C_p, double n_Li, double n_Li_bol);
ESOH esoh(const CellState& s, const CellParameters& p);
double capacity(const CellState& s, const CellParameters& p);

/// Lithium held by one electrode [mol].
double electrode_lithium(const ElectrodeState& e, const ElectrodeParameters& p, double area);
double cell_lithium(const CellState& s, const CellParameters& p);

/// SOC from the average negative stoichiometry through the given window.
double soc(const CellState& s, const CellParameters& p, const ESOH& window);
double soc(const CellState& s, const CellParameters& p);

/// Fresh cell, relaxed at SOC 1.
CellState fresh_state(const CellParameters& p);

/// Replace both profiles by uniform ones holding the given lithium amounts.
void set_uniform(CellState& s, const CellParameters& p, double n_neg, double n_pos);

/// Relaxed uniform state at the given SOC, same lithium inventory.
void relax_to_soc(CellState& s, const CellParameters& p, double target_soc);

}  // namespace cellwear
