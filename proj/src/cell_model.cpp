#include "cellwear/cell_model.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "cellwear/errors.hpp"
#include "cellwear/mechanisms.hpp"

namespace cellwear {

CellModel::CellModel(CellParameters p)
    : p_(std::move(p)),
      gn_(p_.numerics.n_shells, p_.neg.R_p),
      gp_(p_.numerics.n_shells, p_.pos.R_p) {}

InterfaceSolution CellModel::interface(const CellState& s, double I) const {
  const auto& P = p_;
  InterfaceSolution r;
  const double an = specific_area(P.neg, s.neg.eps_s) * P.neg.l * P.A;
  const double ap = specific_area(P.pos, s.pos.eps_s) * P.pos.l * P.A;
  r.j_tot_neg = I / an;
  r.j_pos = -I / ap;
  r.R_film = film_resistance(s.delta_SEI, s.delta_pl, P.sei, P.plating,
                             specific_area(P.neg, s.neg.eps_s), P.neg.l, P.A);
  const double v_film = I * r.R_film;

  const double Un = P.neg.ocp(s.neg.c_ss / P.neg.c_s_max);
  const double i0n = exchange_current(s.neg.c_ss, P.c_e, P.neg);
  const bool sei_on = P.mechanisms.sei;
  const bool pl_on = P.mechanisms.plating;
  const double ce_pl = plating_ce_eff(P.c_e, P.plating.gamma, I / P.C_nom);

  auto side = [&](double phi, double& jsei, double& jpl) {
    jsei = sei_on ? sei_flux(s.delta_SEI, P.sei, phi, v_film, P.T) : 0.0;
    jpl = pl_on ? plating_flux(P.plating, phi - v_film, ce_pl, P.T) : 0.0;
  };
  auto resid = [&](double phi) {
    double jsei, jpl;
    side(phi, jsei, jpl);
    return Un + overpotential(r.j_tot_neg - jsei - jpl, i0n, P.T) - phi;
  };

  const double phi0 = Un + overpotential(r.j_tot_neg, i0n, P.T);
  double phi = phi0;
  if (sei_on || pl_on) {
    double f0 = resid(phi0);
    if (f0 > 0.0) {
      double step = 1e-3, hi = phi0 + step, fhi = resid(hi);
      double lo = phi0, flo = f0;
      while (fhi > 0.0) {
        lo = hi;
        flo = fhi;
        step *= 2.0;
        hi = phi0 + step;
        fhi = resid(hi);
        if (step > 10.0) throw SolverError("negative interface solve failed to bracket");
      }
      if (fhi == 0.0) {
        phi = hi;
      } else {
        std::uintmax_t it = 80;
        auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13 * (1.0 + std::abs(a)); };
        auto br = boost::math::tools::toms748_solve(resid, lo, hi, flo, fhi, tol, it);
        phi = br.second;
      }
    }
  }
  side(phi, r.j_sei, r.j_pl);
  r.j_int_neg = r.j_tot_neg - r.j_sei - r.j_pl;
  r.eta_neg = overpotential(r.j_int_neg, i0n, P.T);
  r.phi_neg = Un + r.eta_neg;
  if (pl_on && r.j_pl == 0.0 && r.phi_neg < v_film) {
    // plating switches on with a finite current, so the root sits on the
    // onset: potential pinned there, plating takes the remainder
    r.phi_neg = v_film;
    r.eta_neg = v_film - Un;
    r.j_sei = sei_on ? sei_flux(s.delta_SEI, P.sei, v_film, v_film, P.T) : 0.0;
    r.j_int_neg = 2.0 * i0n * std::sinh(kFaraday * r.eta_neg / (2.0 * kGas * P.T));
    r.j_pl = std::min(0.0, r.j_tot_neg - r.j_sei - r.j_int_neg);
    r.j_int_neg = r.j_tot_neg - r.j_sei - r.j_pl;
  }

  const double Up = P.pos.ocp(s.pos.c_ss / P.pos.c_s_max);
  r.eta_pos = overpotential(r.j_pos, exchange_current(s.pos.c_ss, P.c_e, P.pos), P.T);
  r.phi_pos = Up + r.eta_pos;
  r.V = r.phi_pos - r.phi_neg - I * (P.R_ohmic0 + r.R_film);
  return r;
}

StepInfo CellModel::step(CellState& s, double I, double dt) const {
  const auto& P = p_;
  const InterfaceSolution r = interface(s, I);
  StepInfo info;
  info.I = I;
  info.V = r.V;
  info.phi_pos = r.phi_pos;
  info.j_sei = r.j_sei;
  info.j_pl = r.j_pl;

  const double a_n = specific_area(P.neg, s.neg.eps_s);
  const double a_p = specific_area(P.pos, s.pos.eps_s);

  double deps_n = 0, deps_crack_p = 0, deps_diss = 0;
  if (P.mechanisms.cracking && I != 0.0) {
    info.sigma_neg = surface_hydrostatic_stress(s.neg, P.neg);
    info.sigma_pos = surface_hydrostatic_stress(s.pos, P.pos);
    deps_n = crack_lam_rate(info.sigma_neg, P.crack.beta_neg, P.crack.m_crack,
                            P.neg.sigma_critical) * dt;
    deps_crack_p = crack_lam_rate(info.sigma_pos, P.crack.beta_pos, P.crack.m_crack,
                                  P.pos.sigma_critical) * dt;
  }
  if (P.mechanisms.dissolution)
    deps_diss = dissolution_rate(r.phi_pos, P.dissolution, a_p, P.T) * dt;

  // diffusion with the interface fluxes
  s.neg.c_ss = gn_.step(s.neg.c_s, P.neg.D_s, r.j_int_neg / kFaraday, dt);
  s.neg.c_avg = gn_.average(s.neg.c_s);
  s.pos.c_ss = gp_.step(s.pos.c_s, P.pos.D_s, r.j_pos / kFaraday, dt);
  s.pos.c_avg = gp_.average(s.pos.c_s);
  check_bounds(s.neg, P.neg.c_s_max, "negative");
  check_bounds(s.pos, P.pos.c_s_max, "positive");

  if (r.j_sei != 0.0) {
    const auto inc = sei_integrate(r.j_sei, P.sei, a_n, P.neg.l, P.A, dt);
    s.delta_SEI += inc.d_delta;
    s.ledger.sei += inc.d_n;
  }
  if (r.j_pl != 0.0) {
    const double q = -r.j_pl * dt / kFaraday;
    s.delta_pl += q * P.plating.Omega_pl;
    s.ledger.plating += q * a_n * P.neg.l * P.A;
  }
  // active material loss traps the lithium it holds
  if (deps_n != 0.0) {
    deps_n = std::max(deps_n, -0.5 * s.neg.eps_s);
    s.ledger.crack += -deps_n * P.neg.l * P.A * s.neg.c_avg;
    s.neg.eps_s += deps_n;
    s.eps_crack_loss_neg -= deps_n;
  }
  if (deps_crack_p != 0.0 || deps_diss != 0.0) {
    const double total = std::max(deps_crack_p + deps_diss, -0.5 * s.pos.eps_s);
    const double k = (deps_crack_p + deps_diss) != 0.0 ? total / (deps_crack_p + deps_diss) : 0.0;
    deps_crack_p *= k;
    deps_diss *= k;
    const double held = P.pos.l * P.A * s.pos.c_avg;
    s.ledger.crack += -deps_crack_p * held;
    s.ledger.diss += -deps_diss * held;
    s.pos.eps_s += deps_crack_p + deps_diss;
    s.eps_crack_loss_pos -= deps_crack_p;
    s.eps_diss_loss -= deps_diss;
  }
  s.n_Li = cell_lithium(s, P);
  return info;
}

double CellModel::current_for_voltage(const CellState& s, double v_target, double I_lo,
                                      double I_hi) const {
  auto f = [&](double I) { return voltage(s, I) - v_target; };
  double flo = f(I_lo), fhi = f(I_hi);
  if (flo <= 0.0) return I_lo;
  if (fhi >= 0.0) return I_hi;
  std::uintmax_t it = 60;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-10 * (1.0 + std::abs(a)); };
  auto br = boost::math::tools::toms748_solve(f, I_lo, I_hi, flo, fhi, tol, it);
  return 0.5 * (br.first + br.second);
}

double terminal_voltage(const CellState& s, const CellParameters& p, double I) {
  return CellModel(p).voltage(s, I);
}

}  // namespace cellwear
