#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "cellwear/cell_model.hpp"
#include "cellwear/engine.hpp"
#include "cellwear/errors.hpp"
#include "cellwear/spm.hpp"

using namespace cellwear;

namespace {

CellParameters cell(const std::string& stem = "nmc622_25c") {
  return load_cell(data_path("cells/" + stem + ".yaml"));
}

// molar surface flux for a cell current I on one electrode
double molar_flux(const CellParameters& p, const ElectrodeParameters& e, double I) {
  return I / (kFaraday * specific_area(e, e.eps_s0) * e.l * p.A);
}

// open-circuit window by dense scan, independent of the bisection in esoh()
double scanned_capacity(const CellParameters& p, double C_n, double C_p, double Q) {
  const int n = 400000;
  double x_lo = NAN, x_hi = NAN;
  for (int i = 0; i <= n; ++i) {
    const double x = double(i) / n;
    const double y = (Q - x * C_n) / C_p;
    if (y < 0 || y > 1) continue;
    const double v = p.pos.ocp(y) - p.neg.ocp(x);
    if (std::isnan(x_lo) && v >= p.V_min) x_lo = x;
    if (v <= p.V_max) x_hi = x;
  }
  return C_n * (x_hi - x_lo);
}

}  // namespace

TEST_CASE("ocp tables are monotone and span the window") {
  const auto p = cell();
  CHECK(p.neg.ocp.strictly_decreasing());
  CHECK(p.pos.ocp.strictly_decreasing());
  CHECK(p.pos.ocp(p.pos.sto_100) - p.neg.ocp(p.neg.sto_100) == doctest::Approx(p.V_max).epsilon(0.01));
  CHECK(p.pos.ocp(p.pos.sto_0) - p.neg.ocp(p.neg.sto_0) == doctest::Approx(p.V_min).epsilon(0.01));
  const OCPCurve c({0.0, 0.5, 1.0}, {1.0, 0.5, 0.2});
  CHECK(c(0.25) == doctest::Approx(0.75));
  CHECK(c(0.75) == doctest::Approx(0.35));
  CHECK(c.slope(0.75) == doctest::Approx(-0.6));
  CHECK(c(1.5) == doctest::Approx(-0.1));
}

TEST_CASE("sphere step balances the surface flux") {
  SphereGrid g(20, 5e-6);
  std::vector<double> c(20, 1000.0);
  const double flux = 2e-5, dt = 3.0, R = 5e-6;
  for (int k = 0; k < 50; ++k) {
    const double before = g.average(c);
    g.step(c, 1e-14, flux, dt);
    CHECK(g.average(c) - before == doctest::Approx(-3.0 * flux * dt / R).epsilon(1e-9));
  }
  // centre stays above the surface while lithium leaves
  CHECK(c.front() > c.back());
}

TEST_CASE("zero flux leaves a uniform profile unchanged") {
  SphereGrid g(20, 1e-5);
  std::vector<double> c(20, 12345.0);
  const double cs = g.step(c, 1e-14, 0.0, 10.0);
  for (double v : c) CHECK(v == doctest::Approx(12345.0).epsilon(1e-14));
  CHECK(cs == doctest::Approx(12345.0));
}

TEST_CASE("equal-volume shells") {
  SphereGrid g(10, 1.0);
  const auto& r = g.nodes();
  REQUIRE(r.size() == 10);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
  CHECK(r.back() < 1.0);
  CHECK(std::pow(r[0], 3) == doctest::Approx(0.05));
}

TEST_CASE("diffusion refinement at 1C") {
  const auto p = cell();
  for (const auto* e : {&p.neg, &p.pos}) {
    const double flux = molar_flux(p, *e, p.C_nom) * (e == &p.neg ? 1.0 : -1.0);
    const double c0 = 0.5 * e->c_s_max;
    auto run = [&](int n, double dt) {
      SphereGrid g(n, e->R_p);
      std::vector<double> c(n, c0);
      double cs = c0;
      const int steps = int(std::lround(1200.0 / dt));
      for (int k = 0; k < steps; ++k) cs = g.step(c, e->D_s, flux, dt);
      return std::make_tuple(g.nodes(), c, cs);
    };
    auto [r1, c1, s1] = run(20, 1.0);
    auto [r2, c2, s2] = run(40, 0.5);
    CAPTURE(e->R_p);
    CHECK(std::abs(s2 - s1) / s1 < 1e-3);
    // fine shells nest two to one inside the coarse ones
    double worst = 0;
    for (std::size_t i = 0; i < r1.size(); ++i)
      worst = std::max(worst, std::abs(0.5 * (c2[2 * i] + c2[2 * i + 1]) - c1[i]) / c1[i]);
    CHECK(worst < 1e-3);
    CHECK(r2.size() == 2 * r1.size());
  }
}

TEST_CASE("diffusion_step guards its bounds") {
  const auto p = cell();
  ElectrodeState e;
  e.eps_s = p.neg.eps_s0;
  e.c_s.assign(20, 0.999 * p.neg.c_s_max);
  e.c_avg = e.c_ss = e.c_s.back();
  CHECK_THROWS_AS(diffusion_step(e, p.neg, -1e-3, 10.0), SaturationError);
  e.c_s.assign(20, 1.0);
  CHECK_THROWS_AS(diffusion_step(e, p.neg, 1e-3, 10.0), SaturationError);
  CHECK_THROWS_AS(diffusion_step(e, p.neg, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(diffusion_step(e, p.neg, 0.0, 1.0, 19), std::invalid_argument);
}

TEST_CASE("exchange current") {
  const auto p = cell();
  CHECK(exchange_current(0.0, p.c_e, p.neg) == 0.0);
  CHECK(exchange_current(p.neg.c_s_max, p.c_e, p.neg) == 0.0);
  const double mid = exchange_current(0.5 * p.neg.c_s_max, p.c_e, p.neg);
  CHECK(mid == doctest::Approx(p.neg.k_0 * std::sqrt(p.c_e) * 0.5 * p.neg.c_s_max));
  for (double f : {0.1, 0.3, 0.45, 0.55, 0.9})
    CHECK(exchange_current(f * p.neg.c_s_max, p.c_e, p.neg) < mid);
}

TEST_CASE("inverse Butler-Volmer") {
  const double T = 298.15, i0 = 2.0;
  CHECK(overpotential(0.0, 0.0, T) == 0.0);
  CHECK_THROWS_AS(overpotential(1.0, 0.0, T), KineticStarvation);
  for (double j : {0.1, 1.0, 10.0, 100.0}) CHECK(overpotential(-j, i0, T) == doctest::Approx(-overpotential(j, i0, T)));
  // small signal: eta = RT j / (F i0)
  const double j = 0.01 * i0;
  CHECK(overpotential(j, i0, T) == doctest::Approx(kGas * T * j / (kFaraday * i0)).epsilon(0.01));
  // forward check: i0 (e^{F eta/2RT} - e^{-F eta/2RT}) recovers j
  const double eta = overpotential(37.0, i0, T);
  const double f = kFaraday / (2 * kGas * T);
  CHECK(i0 * (std::exp(f * eta) - std::exp(-f * eta)) == doctest::Approx(37.0));
}

TEST_CASE("terminal voltage") {
  const auto p = cell();
  CellState s = fresh_state(p);
  const CellModel m(p);
  CHECK(m.voltage(s, 0.0) == doctest::Approx(p.V_max).epsilon(0.01));
  relax_to_soc(s, p, 0.5);
  const double ocv = p.pos.ocp(s.pos.c_ss / p.pos.c_s_max) - p.neg.ocp(s.neg.c_ss / p.neg.c_s_max);
  CHECK(terminal_voltage(s, p, 0.0) == doctest::Approx(ocv).epsilon(1e-6));
  double prev = m.voltage(s, -2 * p.C_nom);
  for (double c = -1.5; c <= 2.0; c += 0.5) {
    const double v = m.voltage(s, c * p.C_nom);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(m.voltage(s, p.C_nom) < ocv);
  CHECK(m.voltage(s, -p.C_nom) > ocv);
}

TEST_CASE("soc endpoints and round trip") {
  const auto p = cell();
  CellState s = fresh_state(p);
  CHECK(soc(s, p) == doctest::Approx(1.0).epsilon(1e-6));
  relax_to_soc(s, p, 0.0);
  CHECK(soc(s, p) == doctest::Approx(0.0).epsilon(1e-6));
  relax_to_soc(s, p, 0.3);
  auto q = p;
  q.mechanisms = MechanismSwitches::none();
  const CellModel m(q);
  const double C = capacity(s, q);
  const double I = -0.5 * q.C_nom;
  for (int k = 0; k < 360; ++k) m.step(s, I, 10.0);
  const double dq = -I * 3600.0 / 3600.0;
  CHECK(soc(s, q) - 0.3 == doctest::Approx(dq / C).epsilon(0.005));
}

TEST_CASE("capacity from eSOH") {
  const auto p = cell();
  CellState s = fresh_state(p);
  const ESOH w = esoh(s, p);
  CHECK(w.capacity == doctest::Approx(p.C_nom).epsilon(0.01));
  CHECK(w.lli == doctest::Approx(0.0));
  CHECK(w.capacity == doctest::Approx(scanned_capacity(p, w.C_n, w.C_p, w.Q_Li)).epsilon(1e-4));

  // 30% lithium loss
  const ESOH l = esoh(p, w.C_n, w.C_p, 0.7 * s.n_Li, s.n_Li);
  CHECK(l.lli == doctest::Approx(0.3));
  CHECK(l.capacity == doctest::Approx(scanned_capacity(p, w.C_n, w.C_p, 0.7 * w.Q_Li)).epsilon(1e-4));
  CHECK(l.capacity < w.capacity);

  // halving the negative host makes it limiting
  const ESOH h = esoh(p, 0.5 * w.C_n, w.C_p, s.n_Li * 0.5, s.n_Li);
  CHECK(h.capacity == doctest::Approx(scanned_capacity(p, 0.5 * w.C_n, w.C_p, 0.5 * w.Q_Li)).epsilon(1e-3));
  CHECK(h.x100 > h.x0);

  CHECK_THROWS_AS(esoh(p, 0.0, w.C_p, s.n_Li, s.n_Li), CapacityCollapse);
}

TEST_CASE("lithium is conserved with mechanisms off") {
  auto p = cell("nmc111");
  p.mechanisms = MechanismSwitches::none();
  const CellModel m(p);
  const auto sched = scenario_schedule(Scenario::ModerateV2G, DriveVariant::Long, p);
  CellState s = fresh_state(p);
  const double n0 = s.n_Li;
  for (int d = 1; d <= 3; ++d) {
    simulate_day(s, sched, m, d);
    CHECK(std::abs(cell_lithium(s, p) - n0) / n0 < 1e-8);
    CHECK(std::abs(s.n_Li - n0) / n0 < 1e-8);
    CHECK(s.ledger.sum() == 0.0);
  }
}

TEST_CASE("bad cell file") {
  const std::string path = "bad_cell.yaml";
  {
    std::ofstream f(path);
    f << "name: x\ncell:\n  C_nom_Ah: -1\n";
  }
  CHECK_THROWS_AS(load_cell(path), ConfigError);
  CHECK_THROWS_AS(load_cell("does_not_exist.yaml"), ConfigError);
}
