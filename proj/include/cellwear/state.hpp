#pragma once
#include <vector>

namespace cellwear {

/// Cumulative lithium lost per mechanism [mol].
struct LliLedger {
  double sei = 0;
  double plating = 0;
  double diss = 0;   // lithium trapped in dissolved positive material
  double crack = 0;  // lithium trapped in cracked-off material, both electrodes

  double sum() const { return sei + plating + diss + crack; }

  LliLedger& operator+=(const LliLedger& o) {
    sei += o.sei;
    plating += o.plating;
    diss += o.diss;
    crack += o.crack;
    return *this;
  }
  friend LliLedger operator-(const LliLedger& a, const LliLedger& b) {
    return {a.sei - b.sei, a.plating - b.plating, a.diss - b.diss, a.crack - b.crack};
  }
  friend LliLedger operator*(double k, const LliLedger& a) {
    return {k * a.sei, k * a.plating, k * a.diss, k * a.crack};
  }
};

struct ElectrodeState {
  std::vector<double> c_s;  // shell concentrations, centre first [mol/m^3]
  double eps_s = 0;
  double c_ss = 0;   // surface concentration, refreshed by each diffusion step
  double c_avg = 0;  // volume average
};

struct CellState {
  ElectrodeState neg, pos;
  double delta_SEI = 0;  // m
  double delta_pl = 0;   // m
  double n_Li = 0;       // mol, cyclable lithium held in both electrodes
  double n_Li_bol = 0;
  double eps_diss_loss = 0;
  double eps_crack_loss_neg = 0;
  double eps_crack_loss_pos = 0;
  LliLedger ledger;
};

}  // namespace cellwear
