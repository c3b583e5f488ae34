#pragma once
#include "cellwear/params.hpp"
#include "cellwear/state.hpp"

namespace cellwear {

// Sign convention for current densities: anodic (lithium leaving the solid)
// is positive, so SEI and plating currents are <= 0.

/// Kinetic (Tafel) SEI current at a given solvent surface concentration.
double sei_kinetic(const SEIParameters& sei, double c_EC, double eta_sei, double T);

/// Mixed kinetic/solvent-diffusion SEI current density [A/m^2], <= 0.
double sei_flux(double delta_SEI, const SEIParameters& sei, double phi_s_neg, double V_R, double T);

struct SEIIncrement {
  double d_delta = 0;  // m
  double d_n = 0;      // mol
};
SEIIncrement sei_integrate(double j_SEI, const SEIParameters& sei, double a_s, double l, double A,
                           double dt);

/// Effective electrolyte concentration seen by plating at a given C-rate
/// (discharge positive).
double plating_ce_eff(double c_e, double gamma, double c_rate);

/// Plating current density [A/m^2], zero unless eta_pl < 0.
double plating_flux(const PlatingParameters& pl, double eta_pl, double c_e_eff, double T);

/// Dissolution current density [A/m^2] >= 0, gated on phi_s_pos > E_eq_diss.
double dissolution_current(double phi_s_pos, const DissolutionParameters& d, double T);

/// d(eps_s+)/dt from dissolution [1/s], <= 0.
double dissolution_rate(double phi_s_pos, const DissolutionParameters& d, double a_s, double T);

/// Hydrostatic stress at the particle surface [Pa]; positive when c_ss < c_avg.
double surface_hydrostatic_stress(const ElectrodeState& e, const ElectrodeParameters& p);

/// d(eps_s)/dt from fatigue cracking [1/s], <= 0.
double crack_lam_rate(double sigma_h_surf, double beta, double m_crack, double sigma_critical);

/// Film resistance [Ohm] of the negative electrode.
double film_resistance(double delta_SEI, double delta_pl, const SEIParameters& sei,
                       const PlatingParameters& pl, double a_s, double l, double A);

/// Lithium trapped by loss of active material [mol]; dC in Ah, negative for loss.
double lli_lam_increment(double x, double y, double dC_n, double dC_p);

}  // namespace cellwear
