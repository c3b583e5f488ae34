#include "cellwear/mechanisms.hpp"

#include <cmath>

namespace cellwear {

double sei_kinetic(const SEIParameters& sei, double c_EC, double eta_sei, double T) {
  return -kFaraday * c_EC * sei.k_SEI * std::exp(-sei.alpha_SEI * kFaraday * eta_sei / (kGas * T));
}

double sei_flux(double delta_SEI, const SEIParameters& sei, double phi_s_neg, double V_R, double T) {
  const double eta = phi_s_neg - sei.U_SEI - V_R;
  const double jk = sei_kinetic(sei, sei.c_EC_bulk, eta, T);
  // solvent starvation through the film: 1/|j| = 1/|j_kin| + delta/(F D c)
  const double starve = std::abs(jk) * delta_SEI / (kFaraday * sei.D_SEI * sei.c_EC_bulk);
  return jk / (1.0 + starve);
}

SEIIncrement sei_integrate(double j_SEI, const SEIParameters& sei, double a_s, double l, double A,
                           double dt) {
  const double q = std::abs(j_SEI) * dt / kFaraday;  // mol of electrons per m^2
  return {0.5 * q * sei.Omega_SEI, q * a_s * l * A};
}

double plating_ce_eff(double c_e, double gamma, double c_rate) {
  return c_e * std::max(0.0, 1.0 + gamma * c_rate);
}

double plating_flux(const PlatingParameters& pl, double eta_pl, double c_e_eff, double T) {
  if (eta_pl >= 0.0) return 0.0;
  return -kFaraday * pl.k_0_pl * c_e_eff * std::exp(-0.5 * kFaraday * eta_pl / (kGas * T));
}

double dissolution_current(double phi_s_pos, const DissolutionParameters& d, double T) {
  const double eta = phi_s_pos - d.E_eq_diss;
  if (d.i_0_diss <= 0.0 || eta <= 0.0) return 0.0;
  return d.i_0_diss * std::exp(0.5 * kFaraday * eta / (kGas * T));
}

double dissolution_rate(double phi_s_pos, const DissolutionParameters& d, double a_s, double T) {
  return -a_s * dissolution_current(phi_s_pos, d, T) * d.Omega_diss / kFaraday;
}

double surface_hydrostatic_stress(const ElectrodeState& e, const ElectrodeParameters& p) {
  return 2.0 * p.Omega * p.E / (9.0 * (1.0 - p.nu)) * (e.c_avg - e.c_ss);
}

double crack_lam_rate(double sigma_h_surf, double beta, double m_crack, double sigma_critical) {
  if (beta == 0.0 || sigma_h_surf == 0.0) return 0.0;
  return -beta * std::pow(std::abs(sigma_h_surf) / sigma_critical, m_crack);
}

double film_resistance(double delta_SEI, double delta_pl, const SEIParameters& sei,
                       const PlatingParameters& pl, double a_s, double l, double A) {
  return (delta_SEI / sei.kappa_SEI + delta_pl / pl.kappa_pl) / (a_s * l * A);
}

double lli_lam_increment(double x, double y, double dC_n, double dC_p) {
  return -3600.0 / kFaraday * (x * dC_n + y * dC_p);
}

}  // namespace cellwear
