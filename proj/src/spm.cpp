#include "cellwear/spm.hpp"

#include <algorithm>
#include <cmath>

#include "cellwear/errors.hpp"

namespace cellwear {

// Geometry is stored divided by 4*pi throughout.
SphereGrid::SphereGrid(int n_shells, double radius) : n_(n_shells), R_(radius) {
  if (n_ < 2 || !(R_ > 0)) throw ConfigError("sphere grid needs >= 2 shells and R > 0");
  std::vector<double> rf(n_ + 1);
  for (int i = 0; i <= n_; ++i) rf[i] = R_ * std::cbrt(double(i) / n_);
  rc_.resize(n_);
  for (int i = 0; i < n_; ++i)
    rc_[i] = std::cbrt(0.5 * (rf[i] * rf[i] * rf[i] + rf[i + 1] * rf[i + 1] * rf[i + 1]));
  trans_.resize(n_ - 1);
  for (int i = 0; i + 1 < n_; ++i) trans_[i] = rf[i + 1] * rf[i + 1] / (rc_[i + 1] - rc_[i]);
  vol_ = R_ * R_ * R_ / (3.0 * n_);
  surf_area_ = R_ * R_;
  a_.resize(n_);
  b_.resize(n_);
  cc_.resize(n_);
  d_.resize(n_);
}

double SphereGrid::step(std::vector<double>& c, double D, double flux, double dt) const {
  const double m = vol_ / dt;
  for (int i = 0; i < n_; ++i) {
    const double tl = i > 0 ? D * trans_[i - 1] : 0.0;
    const double tr = i + 1 < n_ ? D * trans_[i] : 0.0;
    a_[i] = -tl;
    cc_[i] = -tr;
    b_[i] = m + tl + tr;
    d_[i] = m * c[i];
  }
  d_[n_ - 1] -= flux * surf_area_;
  // Thomas algorithm
  for (int i = 1; i < n_; ++i) {
    const double w = a_[i] / b_[i - 1];
    b_[i] -= w * cc_[i - 1];
    d_[i] -= w * d_[i - 1];
  }
  c[n_ - 1] = d_[n_ - 1] / b_[n_ - 1];
  for (int i = n_ - 2; i >= 0; --i) c[i] = (d_[i] - cc_[i] * c[i + 1]) / b_[i];
  return surface(c, D, flux);
}

double SphereGrid::surface(const std::vector<double>& c, double D, double flux) const {
  return c[n_ - 1] - flux * (R_ - rc_[n_ - 1]) / D;
}

double SphereGrid::average(const std::vector<double>& c) const {
  double s = 0;
  for (double v : c) s += v;
  return s / n_;
}

void check_bounds(const ElectrodeState& e, double c_max, const std::string& tag) {
  auto [lo, hi] = std::minmax_element(e.c_s.begin(), e.c_s.end());
  if (*lo < 0 || e.c_ss < 0) throw SaturationError(tag, false);
  if (*hi > c_max || e.c_ss > c_max) throw SaturationError(tag, true);
}

ElectrodeState diffusion_step(const ElectrodeState& elec, const ElectrodeParameters& p,
                              double surface_flux, double dt, int n_shells,
                              const std::string& tag) {
  if (!(dt > 0)) throw std::invalid_argument("diffusion_step: dt must be positive");
  if (!std::isfinite(surface_flux)) throw std::invalid_argument("diffusion_step: flux not finite");
  SphereGrid g(n_shells, p.R_p);
  if (static_cast<int>(elec.c_s.size()) != n_shells)
    throw std::invalid_argument("diffusion_step: profile size does not match grid");
  ElectrodeState out = elec;
  out.c_ss = g.step(out.c_s, p.D_s, surface_flux, dt);
  out.c_avg = g.average(out.c_s);
  check_bounds(out, p.c_s_max, tag);
  return out;
}

double exchange_current(double c_ss, double c_e, const ElectrodeParameters& p) {
  const double cs = std::clamp(c_ss, 0.0, p.c_s_max);
  if (p.alpha == 0.5) return p.k_0 * std::sqrt(c_e * cs * (p.c_s_max - cs));
  return p.k_0 * std::pow(c_e, p.alpha) * std::pow(cs, p.alpha) *
         std::pow(p.c_s_max - cs, 1.0 - p.alpha);
}

double overpotential(double j_int, double i_0, double T) {
  if (j_int == 0.0) return 0.0;
  if (!(i_0 > 0)) throw KineticStarvation("exchange current is zero with nonzero current");
  return 2.0 * kGas * T / kFaraday * std::asinh(j_int / (2.0 * i_0));
}

double specific_area(const ElectrodeParameters& p, double eps) { return 3.0 * eps / p.R_p; }

ESOH esoh(const CellParameters& p, double C_n, double C_p, double n_Li, double n_Li_bol) {
  if (!(C_n > 1e-9 * p.C_nom) || !(C_p > 1e-9 * p.C_nom))
    throw CapacityCollapse("electrode capacity collapsed");
  ESOH e;
  e.C_n = C_n;
  e.C_p = C_p;
  e.Q_Li = n_Li * kFaraday / 3600.0;
  e.lli = n_Li_bol > 0 ? (n_Li_bol - n_Li) / n_Li_bol : 0.0;
  const double Q = e.Q_Li;
  const double lo = std::max(0.0, (Q - C_p) / C_n);
  const double hi = std::min(1.0, Q / C_n);
  if (!(hi > lo)) throw CapacityCollapse("no feasible stoichiometry for lithium inventory");
  auto g = [&](double x) { return p.pos.ocp((Q - x * C_n) / C_p) - p.neg.ocp(x); };
  auto solve = [&](double v) {
    double a = lo, b = hi;
    if (g(a) > v || g(b) < v) throw CapacityCollapse("voltage window not reachable");
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      const double m = 0.5 * (a + b);
      (g(m) < v ? a : b) = m;
    }
    return 0.5 * (a + b);
  };
  e.x100 = solve(p.V_max);
  e.x0 = solve(p.V_min);
  e.y100 = (Q - e.x100 * C_n) / C_p;
  e.y0 = (Q - e.x0 * C_n) / C_p;
  e.capacity = C_n * (e.x100 - e.x0);
  return e;
}

double electrode_lithium(const ElectrodeState& e, const ElectrodeParameters& p, double area) {
  return e.eps_s * p.l * area * e.c_avg;
}

double cell_lithium(const CellState& s, const CellParameters& p) {
  return electrode_lithium(s.neg, p.neg, p.A) + electrode_lithium(s.pos, p.pos, p.A);
}

ESOH esoh(const CellState& s, const CellParameters& p) {
  return esoh(p, p.electrode_capacity(p.neg, s.neg.eps_s), p.electrode_capacity(p.pos, s.pos.eps_s),
              s.n_Li, s.n_Li_bol);
}

double capacity(const CellState& s, const CellParameters& p) { return esoh(s, p).capacity; }

double soc(const CellState& s, const CellParameters& p, const ESOH& w) {
  const double x = s.neg.c_avg / p.neg.c_s_max;
  return std::clamp((x - w.x0) / (w.x100 - w.x0), 0.0, 1.05);
}

double soc(const CellState& s, const CellParameters& p) { return soc(s, p, esoh(s, p)); }

namespace {
void fill(ElectrodeState& e, int n, double c) {
  e.c_s.assign(n, c);
  e.c_avg = c;
  e.c_ss = c;
}
}  // namespace

CellState fresh_state(const CellParameters& p) {
  CellState s;
  const int n = p.numerics.n_shells;
  s.neg.eps_s = p.neg.eps_s0;
  s.pos.eps_s = p.pos.eps_s0;
  fill(s.neg, n, p.neg.sto_100 * p.neg.c_s_max);
  fill(s.pos, n, p.pos.sto_100 * p.pos.c_s_max);
  s.delta_SEI = p.sei.delta_SEI0;
  s.n_Li = cell_lithium(s, p);
  s.n_Li_bol = s.n_Li;
  return s;
}

void set_uniform(CellState& s, const CellParameters& p, double n_neg, double n_pos) {
  const int n = p.numerics.n_shells;
  fill(s.neg, n, n_neg / (s.neg.eps_s * p.neg.l * p.A));
  fill(s.pos, n, n_pos / (s.pos.eps_s * p.pos.l * p.A));
  check_bounds(s.neg, p.neg.c_s_max, "negative");
  check_bounds(s.pos, p.pos.c_s_max, "positive");
}

void relax_to_soc(CellState& s, const CellParameters& p, double target_soc) {
  const ESOH w = esoh(s, p);
  const double x = w.x0 + target_soc * (w.x100 - w.x0);
  const double n_neg = s.neg.eps_s * p.neg.l * p.A * p.neg.c_s_max * x;
  set_uniform(s, p, n_neg, s.n_Li - n_neg);
}

}  // namespace cellwear
