#pragma once
#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace cellwear {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct DfoOptions {
  int max_evals = 0;       // 0: 100 * (n + 1)
  double rho_beg = 0.1;    // scaled units, bounds map to [0, 1]
  double rho_end = 1e-8;
  double f_target = 0.0;   // stop once 0.5 |r|^2 <= f_target
};

struct DfoTraceEntry {
  int eval = 0;
  double f = 0;       // 0.5 |r|^2 at this evaluation
  double f_best = 0;  // best so far
  double rho = 0;
};

struct DfoResult {
  Eigen::VectorXd x;   // best point found
  Eigen::VectorXd r;   // residual there
  double f = 0;        // 0.5 |r|^2
  double norm = 0;     // |r|
  int evals = 0;
  bool max_evals = false;  // budget ran out before rho reached rho_end
  std::string exit;
  std::vector<DfoTraceEntry> trace;
};

/// Bound-constrained derivative-free least squares. Gauss-Newton model from
/// linear interpolation on n+1 points, box trust region.
DfoResult solve_dfo_ls(const ResidualFn& fn, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const DfoOptions& opt = {});

/// min |r + J s|^2 subject to lo <= s <= hi, by active-set enumeration.
/// Exact for small n (cost 3^n small solves).
Eigen::VectorXd box_least_squares(const Eigen::MatrixXd& J, const Eigen::VectorXd& r,
                                  const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

}  // namespace cellwear
