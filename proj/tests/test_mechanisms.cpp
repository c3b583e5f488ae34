#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cellwear/cell_model.hpp"
#include "cellwear/engine.hpp"
#include "cellwear/mechanisms.hpp"

using namespace cellwear;

namespace {

CellParameters cell(const std::string& stem = "nmc622_25c") {
  return load_cell(data_path("cells/" + stem + ".yaml"));
}

// plain bisection on the negative-electrode potential
double bisect_phi(const CellParameters& P, const CellState& s, double I) {
  const double an = specific_area(P.neg, s.neg.eps_s);
  const double jtot = I / (an * P.neg.l * P.A);
  const double Rf = film_resistance(s.delta_SEI, s.delta_pl, P.sei, P.plating, an, P.neg.l, P.A);
  const double vf = I * Rf;
  const double Un = P.neg.ocp(s.neg.c_ss / P.neg.c_s_max);
  const double i0 = exchange_current(s.neg.c_ss, P.c_e, P.neg);
  const double ce = plating_ce_eff(P.c_e, P.plating.gamma, I / P.C_nom);
  auto g = [&](double phi) {
    const double js = sei_flux(s.delta_SEI, P.sei, phi, vf, P.T);
    const double jp = plating_flux(P.plating, phi - vf, ce, P.T);
    return Un + overpotential(jtot - js - jp, i0, P.T) - phi;
  };
  double a = -2.0, b = 3.0;
  REQUIRE(g(a) > 0);
  REQUIRE(g(b) < 0);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    (g(m) > 0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("sei flux limits") {
  const auto p = cell();
  const double phi = 0.1, T = p.T;
  const double jk = sei_kinetic(p.sei, p.sei.c_EC_bulk, phi - p.sei.U_SEI, T);
  CHECK(jk < 0);
  CHECK(sei_flux(1e-15, p.sei, phi, 0.0, T) == doctest::Approx(jk).epsilon(1e-6));
  const double thick = 1e-3;
  CHECK(sei_flux(thick, p.sei, phi, 0.0, T) ==
        doctest::Approx(-kFaraday * p.sei.D_SEI * p.sei.c_EC_bulk / thick).epsilon(1e-6));
  // mixed control never exceeds either limit
  for (double d : {1e-9, 1e-8, 1e-7, 1e-6}) {
    const double j = sei_flux(d, p.sei, phi, 0.0, T);
    CHECK(std::abs(j) <= std::abs(jk));
    CHECK(std::abs(j) <= kFaraday * p.sei.D_SEI * p.sei.c_EC_bulk / d);
  }
  // cathodic overpotential drives faster growth
  CHECK(std::abs(sei_kinetic(p.sei, p.sei.c_EC_bulk, -0.4, T)) >
        std::abs(sei_kinetic(p.sei, p.sei.c_EC_bulk, -0.2, T)));
}

TEST_CASE("sei solvent concentration is self-consistent") {
  const auto p = cell();
  const double delta = 4e-8, eta = -0.3, T = p.T;
  const double j = sei_flux(delta, p.sei, eta + p.sei.U_SEI, 0.0, T);
  // flux through the film with c_surf found by bisection on the kinetic law
  double a = 0, b = p.sei.c_EC_bulk;
  for (int i = 0; i < 200; ++i) {
    const double c = 0.5 * (a + b);
    const double jkin = -sei_kinetic(p.sei, c, eta, T);
    const double jdiff = kFaraday * p.sei.D_SEI * (p.sei.c_EC_bulk - c) / delta;
    (jkin < jdiff ? a : b) = c;
  }
  const double c = 0.5 * (a + b);
  CHECK(j == doctest::Approx(sei_kinetic(p.sei, c, eta, T)).epsilon(1e-9));
}

TEST_CASE("interface solve matches bisection") {
  for (const char* stem : {"nmc111", "nmc622_25c", "nmc622_45c"}) {
    auto p = cell(stem);
    p.plating.k_0_pl *= 100;  // make plating visible on charge
    const CellModel m(p);
    CellState s = fresh_state(p);
    s.delta_SEI = 3e-8;
    for (double soc_v : {0.2, 0.9}) {
      relax_to_soc(s, p, soc_v);
      for (double c : {-2.0, -0.5, 0.0, 1.0}) {
        const double I = c * p.C_nom;
        const auto r = m.interface(s, I);
        CAPTURE(stem);
        CAPTURE(soc_v);
        CAPTURE(c);
        CHECK(r.phi_neg == doctest::Approx(bisect_phi(p, s, I)).epsilon(1e-9));
        CHECK(r.j_int_neg + r.j_sei + r.j_pl == doctest::Approx(r.j_tot_neg));
        CHECK(r.j_sei <= 0);
        CHECK(r.j_pl <= 0);
      }
    }
  }
}

TEST_CASE("sei_integrate is linear") {
  const auto p = cell();
  const auto a = sei_integrate(-1e-5, p.sei, 1e5, 5e-5, 0.1, 10.0);
  const auto b = sei_integrate(-2e-5, p.sei, 1e5, 5e-5, 0.1, 10.0);
  const auto c = sei_integrate(-1e-5, p.sei, 1e5, 5e-5, 0.1, 20.0);
  CHECK(b.d_delta == doctest::Approx(2 * a.d_delta));
  CHECK(c.d_n == doctest::Approx(2 * a.d_n));
  const double q = 1e-5 * 10.0 / kFaraday;
  CHECK(a.d_delta == doctest::Approx(0.5 * q * p.sei.Omega_SEI));
  CHECK(a.d_n == doctest::Approx(q * 1e5 * 5e-5 * 0.1));
}

TEST_CASE("plating gate") {
  const auto p = cell();
  CHECK(plating_flux(p.plating, 0.0, 1000, p.T) == 0.0);
  CHECK(plating_flux(p.plating, 0.05, 1000, p.T) == 0.0);
  const double j = plating_flux(p.plating, -0.01, 1000, p.T);
  CHECK(j < 0);
  CHECK(plating_flux(p.plating, -0.02, 1000, p.T) < j);
  CHECK(plating_ce_eff(1000, 0.2, -1.0) == doctest::Approx(800));
  CHECK(plating_ce_eff(1000, 0.2, -10.0) == 0.0);
}

TEST_CASE("dissolution gate") {
  DissolutionParameters d;
  d.i_0_diss = 1e-4;
  d.Omega_diss = 1e-8;
  CHECK(dissolution_current(3.9, d, 298.15) == 0.0);
  CHECK(dissolution_current(4.0, d, 298.15) == 0.0);
  CHECK(dissolution_current(4.1, d, 298.15) > d.i_0_diss);
  CHECK(dissolution_rate(4.1, d, 1e6, 298.15) < 0);
  d.i_0_diss = 0;
  CHECK(dissolution_current(4.3, d, 298.15) == 0.0);
  CHECK(dissolution_rate(4.3, d, 1e6, 298.15) == 0.0);
}

TEST_CASE("surface stress sign and magnitude") {
  const auto p = cell();
  const CellModel m(p);
  CellState s = fresh_state(p);
  relax_to_soc(s, p, 0.9);
  double peak = 0;
  for (int k = 0; k < 1800; ++k) {
    m.step(s, p.C_nom, 1.0);
    // delithiating graphite: surface poorer than the bulk -> tension
    const double sn = surface_hydrostatic_stress(s.neg, p.neg);
    CHECK(sn > 0);
    peak = std::max(peak, sn);
  }
  CHECK(peak < 60e6);
  CHECK(surface_hydrostatic_stress(s.pos, p.pos) < 0);
}

TEST_CASE("crack rate") {
  CHECK(crack_lam_rate(0.0, 1e-7, 1.5, 60e6) == 0.0);
  CHECK(crack_lam_rate(60e6, 0.0, 1.5, 60e6) == 0.0);
  CHECK(crack_lam_rate(60e6, 2e-7, 1.7, 60e6) == doctest::Approx(-2e-7));
  CHECK(crack_lam_rate(-60e6, 2e-7, 1.7, 60e6) == doctest::Approx(-2e-7));
  CHECK(crack_lam_rate(30e6, 2e-7, 2.0, 60e6) == doctest::Approx(-0.5e-7));
}

TEST_CASE("film resistance") {
  const auto p = cell();
  CHECK(film_resistance(0, 0, p.sei, p.plating, 1e5, 5e-5, 0.1) == 0.0);
  const double r1 = film_resistance(1e-8, 0, p.sei, p.plating, 1e5, 5e-5, 0.1);
  CHECK(film_resistance(2e-8, 0, p.sei, p.plating, 1e5, 5e-5, 0.1) == doctest::Approx(2 * r1));
  CHECK(film_resistance(1e-8, 0, p.sei, p.plating, 2e5, 5e-5, 0.1) == doctest::Approx(0.5 * r1));
  CHECK(film_resistance(0, 1e-8, p.sei, p.plating, 1e5, 5e-5, 0.1) < r1);
}

TEST_CASE("lithium trapped by active material loss") {
  // 1 Ah of negative host lost at x = 0.5 traps 0.5 Ah of lithium
  CHECK(lli_lam_increment(0.5, 0.3, -1.0, 0.0) == doctest::Approx(0.5 * 3600 / kFaraday));
  CHECK(lli_lam_increment(0.5, 0.3, 0.0, -2.0) == doctest::Approx(0.6 * 3600 / kFaraday));
  CHECK(lli_lam_increment(0.5, 0.3, 0.0, 0.0) == 0.0);
}

TEST_CASE("sei thickness approaches square-root growth") {
  auto p = cell();
  p.sei.D_SEI /= 100;
  p.mechanisms = MechanismSwitches::none();
  p.mechanisms.sei = true;
  const CellModel m(p);
  CellState s = fresh_state(p);
  std::vector<double> t, d;
  const int days = 730;
  for (int day = 1; day <= days; ++day) {
    for (int h = 0; h < 24; ++h) m.step(s, 0.0, 3600.0);
    t.push_back(day);
    d.push_back(s.delta_SEI);
  }
  // least-squares slope of log d vs log t over the final half
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = days / 2; i < days; ++i) {
    const double x = std::log(t[i]), y = std::log(d[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CAPTURE(slope);
  CHECK(slope >= 0.45);
  CHECK(slope <= 0.6);
  // early growth is closer to linear
  const double d0 = p.sei.delta_SEI0;
  const double early = std::log((d[9] - d0) / (d[0] - d0)) / std::log(t[9] / t[0]);
  CHECK(early > slope);
}

TEST_CASE("calendar runs accrue no crack or plating") {
  for (const char* stem : {"nmc111", "nmc622_45c"}) {
    auto p = cell(stem);
    p.dissolution.i_0_diss = 0;
    LifetimeOptions o;
    o.mode = Mode::Exhaustive;
    o.horizon_days = 5;
    o.eol_frac = 0;
    const auto r = run_lifetime(p, rest_schedule(p), o);
    REQUIRE_FALSE(r.failed);
    for (const auto& L : r.logs) {
      CHECK(L.ledger.crack == 0.0);
      CHECK(L.ledger.plating == 0.0);
      CHECK(L.ledger.diss == 0.0);
    }
    CHECK(r.logs.back().ledger.sei > 0);
  }
}

TEST_CASE("ledger monotone under cycling") {
  const auto p = cell("nmc622_45c");
  LifetimeOptions o;
  o.mode = Mode::Exhaustive;
  o.horizon_days = 4;
  o.eol_frac = 0;
  const auto r = run_lifetime(p, scenario_schedule(Scenario::ModerateV2G, DriveVariant::Long, p), o);
  REQUIRE_FALSE(r.failed);
  for (std::size_t i = 1; i < r.logs.size(); ++i) {
    const auto &a = r.logs[i - 1].ledger, &b = r.logs[i].ledger;
    CHECK(b.sei >= a.sei);
    CHECK(b.plating >= a.plating);
    CHECK(b.diss >= a.diss);
    CHECK(b.crack >= a.crack);
    CHECK(r.logs[i].C_n <= r.logs[i - 1].C_n);
    CHECK(r.logs[i].C_p <= r.logs[i - 1].C_p);
  }
  CHECK(r.logs.back().ledger.diss > 0);
  CHECK(r.logs.back().ledger.crack > 0);
}
