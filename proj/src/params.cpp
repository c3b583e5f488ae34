#include "cellwear/params.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "cellwear/errors.hpp"

namespace fs = std::filesystem;

namespace cellwear {

namespace {

double req(const YAML::Node& n, const char* key, const std::string& where) {
  if (!n || !n[key]) throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return n[key].as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + ": key '" + key + "' is not a number");
  }
}

double opt(const YAML::Node& n, const char* key, double dflt) {
  if (!n || !n[key]) return dflt;
  return n[key].as<double>();
}

ElectrodeParameters read_electrode(const YAML::Node& n, const std::string& where,
                                   const fs::path& base) {
  ElectrodeParameters e;
  e.c_s_max = req(n, "c_s_max_mol_per_m3", where);
  e.D_s = req(n, "D_s_m2_per_s", where);
  e.R_p = req(n, "R_p_m", where);
  e.l = req(n, "l_m", where);
  e.eps_s0 = req(n, "eps_s0", where);
  e.k_0 = req(n, "k_0_A_m2_per_mol_m3_1p5", where);
  e.alpha = opt(n, "alpha", 0.5);
  e.E = req(n, "E_Pa", where);
  e.nu = req(n, "nu", where);
  e.Omega = req(n, "Omega_m3_per_mol", where);
  e.sigma_critical = req(n, "sigma_critical_Pa", where);
  e.sto_0 = req(n, "sto_0", where);
  e.sto_100 = req(n, "sto_100", where);
  if (!n["ocp_table"]) throw ConfigError(where + ": missing key 'ocp_table'");
  fs::path p = n["ocp_table"].as<std::string>();
  if (p.is_relative()) p = base / p;
  e.ocp = OCPCurve::load(p.string());
  return e;
}

}  // namespace

void ElectrodeParameters::validate(const std::string& tag) const {
  auto bad = [&](const std::string& what) { throw ConfigError(tag + ": " + what); };
  if (!(c_s_max > 0)) bad("c_s_max must be positive");
  if (!(R_p > 0)) bad("R_p must be positive");
  if (!(D_s > 0)) bad("D_s must be positive");
  if (!(l > 0)) bad("l must be positive");
  if (!(eps_s0 > 0 && eps_s0 <= 1)) bad("eps_s0 must lie in (0, 1]");
  if (!(alpha > 0 && alpha < 1)) bad("alpha must lie in (0, 1)");
  if (!(k_0 > 0)) bad("k_0 must be positive");
  if (!(sto_0 >= 0 && sto_0 <= 1 && sto_100 >= 0 && sto_100 <= 1))
    bad("stoichiometry window must lie in [0, 1]");
  if (!(sigma_critical > 0)) bad("sigma_critical must be positive");
  if (ocp.empty()) bad("missing OCP curve");
  if (!ocp.strictly_decreasing()) bad("OCP must decrease with lithiation");
}

void CellParameters::validate() const {
  if (!(C_nom > 0)) throw ConfigError(name + ": C_nom must be positive");
  if (!(A > 0)) throw ConfigError(name + ": A must be positive");
  if (!(T > 0)) throw ConfigError(name + ": T must be positive");
  if (!(c_e > 0)) throw ConfigError(name + ": c_e must be positive");
  if (!(V_max > V_min)) throw ConfigError(name + ": voltage window is empty");
  neg.validate(name + ".negative");
  pos.validate(name + ".positive");
  const auto& s = sei;
  if (!(s.k_SEI > 0 && s.D_SEI > 0 && s.kappa_SEI > 0 && s.Omega_SEI > 0 && s.c_EC_bulk > 0 &&
        s.delta_SEI0 > 0))
    throw ConfigError(name + ": SEI parameters must be strictly positive");
  if (!(s.alpha_SEI > 0 && s.alpha_SEI < 1)) throw ConfigError(name + ": alpha_SEI outside (0,1)");
  if (!(plating.k_0_pl > 0 && plating.kappa_pl > 0 && plating.Omega_pl > 0))
    throw ConfigError(name + ": plating parameters must be strictly positive");
  if (!(dissolution.i_0_diss >= 0)) throw ConfigError(name + ": i_0_diss must be >= 0");
  if (!(crack.beta_neg >= 0 && crack.beta_pos >= 0)) throw ConfigError(name + ": beta must be >= 0");
  if (!(crack.m_crack >= 1)) throw ConfigError(name + ": m_crack must be >= 1");
  if (numerics.n_shells < 3) throw ConfigError(name + ": need at least 3 shells");
}

double CellParameters::electrode_capacity(const ElectrodeParameters& e, double eps) const {
  return kFaraday * eps * e.l * A * e.c_s_max / 3600.0;
}

CellParameters load_cell(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  CellParameters c;
  try {
    c.name = root["name"] ? root["name"].as<std::string>() : fs::path(path).stem().string();
    auto cell = root["cell"];
    c.C_nom = req(cell, "C_nom_Ah", path);
    c.A = req(cell, "A_m2", path);
    c.c_e = opt(cell, "c_e_mol_per_m3", 1000.0);
    c.T = req(cell, "T_K", path);
    c.R_ohmic0 = req(cell, "R_ohmic0_Ohm", path);
    c.V_min = opt(cell, "V_min_V", 3.0);
    c.V_max = opt(cell, "V_max_V", 4.2);
    c.neg = read_electrode(root["negative"], path + " [negative]", base);
    c.pos = read_electrode(root["positive"], path + " [positive]", base);

    auto s = root["sei"];
    c.sei.k_SEI = req(s, "k_sei_m_per_s", path);
    c.sei.D_SEI = req(s, "D_sei_m2_per_s", path);
    c.sei.alpha_SEI = opt(s, "alpha_sei", 0.5);
    c.sei.U_SEI = req(s, "U_sei_V", path);
    c.sei.kappa_SEI = req(s, "kappa_sei_S_per_m", path);
    c.sei.Omega_SEI = req(s, "Omega_sei_m3_per_mol", path);
    c.sei.c_EC_bulk = req(s, "c_EC_bulk_mol_per_m3", path);
    c.sei.delta_SEI0 = req(s, "delta_sei0_m", path);

    auto p = root["plating"];
    c.plating.k_0_pl = req(p, "k_0_pl_m_per_s", path);
    c.plating.kappa_pl = req(p, "kappa_pl_S_per_m", path);
    c.plating.Omega_pl = req(p, "Omega_pl_m3_per_mol", path);
    c.plating.gamma = opt(p, "gamma_per_C", 0.2);

    auto d = root["dissolution"];
    c.dissolution.i_0_diss = req(d, "i_0_diss_A_per_m2", path);
    c.dissolution.E_eq_diss = opt(d, "E_eq_diss_V", 4.0);
    c.dissolution.Omega_diss = req(d, "Omega_diss_m3_per_mol", path);

    auto k = root["crack"];
    c.crack.beta_neg = req(k, "beta_neg_per_s", path);
    c.crack.beta_pos = req(k, "beta_pos_per_s", path);
    c.crack.m_crack = req(k, "m_crack", path);

    if (auto n = root["numerics"]) {
      c.numerics.n_shells = n["n_shells"] ? n["n_shells"].as<int>() : 20;
      c.numerics.dt_drive = opt(n, "dt_drive_s", 1.0);
      c.numerics.dt_rest = opt(n, "dt_rest_s", 10.0);
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  c.validate();
  return c;
}

std::string data_path(const std::string& rel) {
  if (const char* env = std::getenv("CELLWEAR_DATA")) return (fs::path(env) / rel).string();
  return (fs::path(CELLWEAR_DATA_DIR) / rel).string();
}

}  // namespace cellwear
