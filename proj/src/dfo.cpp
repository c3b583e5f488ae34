#include "cellwear/dfo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cellwear/errors.hpp"
#include "cellwear/log.hpp"

namespace cellwear {

Eigen::VectorXd box_least_squares(const Eigen::MatrixXd& J, const Eigen::VectorXd& r,
                                  const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(J.cols());
  if (n > 12) throw SolverError("box_least_squares: too many variables for enumeration");
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n).cwiseMax(lo).cwiseMin(hi);
  double best_val = (r + J * best).squaredNorm();
  std::vector<int> state(n);
  std::vector<int> free_idx;
  for (int c = 0; c < combos; ++c) {
    int code = c;
    free_idx.clear();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      state[i] = code % 3;
      code /= 3;
      if (state[i] == 1) s[i] = lo[i];
      else if (state[i] == 2) s[i] = hi[i];
      else free_idx.push_back(i);
    }
    if (!free_idx.empty()) {
      Eigen::MatrixXd Jf(J.rows(), free_idx.size());
      for (std::size_t j = 0; j < free_idx.size(); ++j) Jf.col(j) = J.col(free_idx[j]);
      const Eigen::VectorXd rhs = -(r + J * s);
      const Eigen::VectorXd sf = Jf.completeOrthogonalDecomposition().solve(rhs);
      bool ok = true;
      for (std::size_t j = 0; j < free_idx.size(); ++j) {
        const int i = free_idx[j];
        const double tol = 1e-12 * (1.0 + std::abs(hi[i] - lo[i]));
        if (sf[j] < lo[i] - tol || sf[j] > hi[i] + tol) {
          ok = false;
          break;
        }
        s[i] = std::clamp(sf[j], lo[i], hi[i]);
      }
      if (!ok) continue;
    }
    const double v = (r + J * s).squaredNorm();
    if (v < best_val) {
      best_val = v;
      best = s;
    }
  }
  return best;
}

namespace {

constexpr double kPenalty = 1e10;

struct Interp {
  Eigen::MatrixXd Y;  // points, one per row, scaled
  Eigen::MatrixXd F;  // residuals, one per row
  Eigen::VectorXd f;  // 0.5 |r|^2
  int k = 0;          // best point
};

}  // namespace

DfoResult solve_dfo_ls(const ResidualFn& fn, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const DfoOptions& opt) {
  const int n = static_cast<int>(x0.size());
  if (n == 0 || lower.size() != n || upper.size() != n)
    throw SolverError("solve_dfo_ls: dimension mismatch");
  for (int i = 0; i < n; ++i)
    if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw SolverError("solve_dfo_ls: bounds must be finite with lower < upper");
  const int budget = opt.max_evals > 0 ? opt.max_evals : 100 * (n + 1);
  if (budget < n + 1) throw SolverError("solve_dfo_ls: budget below n + 1");

  const Eigen::VectorXd span = upper - lower;
  auto unscale = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return (lower.array() + z.array() * span.array()).matrix();
  };

  DfoResult out;
  int m = -1;
  auto eval = [&](const Eigen::VectorXd& z, double rho) {
    Eigen::VectorXd r = fn(unscale(z));
    if (m < 0) m = static_cast<int>(r.size());
    if (r.size() != m) throw SolverError("solve_dfo_ls: residual length changed");
    if (!r.allFinite()) r = Eigen::VectorXd::Constant(m, kPenalty);
    const double f = 0.5 * r.squaredNorm();
    ++out.evals;
    const double best = out.trace.empty() ? f : std::min(out.trace.back().f_best, f);
    out.trace.push_back({out.evals, f, best, rho});
    return std::make_pair(r, f);
  };

  double rho = opt.rho_beg, delta = opt.rho_beg;
  Eigen::VectorXd z0 = ((x0 - lower).array() / span.array()).matrix().cwiseMax(0.0).cwiseMin(1.0);

  Interp S;
  S.Y.resize(n + 1, n);
  S.f.resize(n + 1);
  {
    auto [r0, f0] = eval(z0, rho);
    S.F.resize(n + 1, m);
    S.Y.row(0) = z0.transpose();
    S.F.row(0) = r0.transpose();
    S.f[0] = f0;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd y = z0;
      y[i] += (y[i] + rho <= 1.0) ? rho : -rho;
      auto [r, f] = eval(y, rho);
      S.Y.row(i + 1) = y.transpose();
      S.F.row(i + 1) = r.transpose();
      S.f[i + 1] = f;
    }
    S.f.minCoeff(&S.k);
  }

  // displacement matrix of the non-best points relative to the best
  auto displacements = [&](std::vector<int>& idx) {
    idx.clear();
    for (int i = 0; i <= n; ++i)
      if (i != S.k) idx.push_back(i);
    Eigen::MatrixXd D(n, n);
    for (int j = 0; j < n; ++j) D.row(j) = S.Y.row(idx[j]) - S.Y.row(S.k);
    return D;
  };

  auto replace = [&](int t, const Eigen::VectorXd& z, const Eigen::VectorXd& r, double f) {
    S.Y.row(t) = z.transpose();
    S.F.row(t) = r.transpose();
    S.f[t] = f;
    if (f < S.f[S.k]) S.k = t;
  };

  // move the point farthest from the best to where its Lagrange polynomial is large
  auto geometry_step = [&]() {
    std::vector<int> idx;
    const Eigen::MatrixXd D = displacements(idx);
    int jt = 0;
    double far = -1;
    for (int j = 0; j < n; ++j) {
      const double d = D.row(j).lpNorm<Eigen::Infinity>();
      if (d > far) {
        far = d;
        jt = j;
      }
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[jt] = 1.0;
    Eigen::VectorXd g = D.completeOrthogonalDecomposition().solve(e);
    if (!g.allFinite() || g.norm() == 0) g = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd zk = S.Y.row(S.k).transpose();
    Eigen::VectorXd best_d;
    double best_v = -1;
    for (double sg : {1.0, -1.0}) {
      Eigen::VectorXd d(n);
      for (int i = 0; i < n; ++i) {
        const double dir = g[i] >= 0 ? sg : -sg;
        d[i] = std::clamp(dir * delta, -zk[i], 1.0 - zk[i]);
      }
      const double v = std::abs(g.dot(d));
      if (v > best_v) {
        best_v = v;
        best_d = d;
      }
    }
    auto [r, f] = eval(zk + best_d, rho);
    replace(idx[jt], zk + best_d, r, f);
  };

  auto geometry_bad = [&]() {
    const Eigen::RowVectorXd zk = S.Y.row(S.k);
    for (int i = 0; i <= n; ++i)
      if (i != S.k && (S.Y.row(i) - zk).lpNorm<Eigen::Infinity>() > 2.0 * delta) return true;
    std::vector<int> idx;
    const Eigen::MatrixXd D = displacements(idx);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
    const auto& sv = svd.singularValues();
    return sv[n - 1] <= 1e-3 * sv[0] || sv[n - 1] == 0.0;
  };

  // returns false once rho cannot shrink further
  auto reduce_rho = [&]() {
    if (rho <= opt.rho_end) return false;
    const double old = rho;
    if (rho <= 250.0 * opt.rho_end) rho = opt.rho_end;
    else if (rho <= 1e4 * opt.rho_end) rho = std::sqrt(rho * opt.rho_end);
    else rho *= 0.1;
    delta = std::max(0.5 * old, rho);
    return true;
  };

  out.exit = "rho_end";
  while (true) {
    if (S.f[S.k] <= opt.f_target) {
      out.exit = "f_target";
      break;
    }
    if (out.evals >= budget) {
      out.max_evals = true;
      out.exit = "max_evals";
      break;
    }
    std::vector<int> idx;
    const Eigen::MatrixXd D = displacements(idx);
    Eigen::MatrixXd R(n, m);
    for (int j = 0; j < n; ++j) R.row(j) = S.F.row(idx[j]) - S.F.row(S.k);
    const Eigen::MatrixXd J = D.completeOrthogonalDecomposition().solve(R).transpose();
    const Eigen::VectorXd zk = S.Y.row(S.k).transpose();
    const Eigen::VectorXd rk = S.F.row(S.k).transpose();

    const Eigen::VectorXd lo = (-zk).cwiseMax(-delta);
    const Eigen::VectorXd hi = (Eigen::VectorXd::Ones(n) - zk).cwiseMin(delta);
    const Eigen::VectorXd s = box_least_squares(J, rk, lo, hi);
    const double snorm = s.lpNorm<Eigen::Infinity>();
    const double pred = 0.5 * rk.squaredNorm() - 0.5 * (rk + J * s).squaredNorm();

    if (snorm < 0.5 * rho || !(pred > 0)) {
      if (geometry_bad()) {
        geometry_step();
        continue;
      }
      if (!reduce_rho()) break;
      continue;
    }

    const Eigen::VectorXd znew = zk + s;
    auto [rnew, fnew] = eval(znew, rho);
    const double ratio = (S.f[S.k] - fnew) / pred;
    if (ratio < 0.1) delta = std::min(0.5 * delta, snorm);
    else if (ratio <= 0.7) delta = std::max(0.5 * delta, snorm);
    else delta = std::min(std::max(delta, 2.0 * snorm), 1.0);
    if (delta <= 1.5 * rho) delta = rho;

    // replace the point whose removal keeps the set best poised
    {
      const Eigen::VectorXd c = D.transpose().completeOrthogonalDecomposition().solve(s);
      int t = idx[0];
      double best = -1;
      for (int j = 0; j < n; ++j) {
        const double dist = (S.Y.row(idx[j]).transpose() - znew).lpNorm<Eigen::Infinity>();
        const double w = std::max(1.0, dist / delta);
        const double v = std::abs(c[j]) * w * w;
        if (v > best) {
          best = v;
          t = idx[j];
        }
      }
      replace(t, znew, rnew, fnew);
    }

    if (ratio < 0.1) {
      if (geometry_bad()) {
        geometry_step();
      } else if (delta <= rho) {
        if (!reduce_rho()) break;
      }
    }
  }

  const Eigen::VectorXd zbest = S.Y.row(S.k).transpose();
  out.x = unscale(zbest);
  out.r = S.F.row(S.k).transpose();
  out.f = S.f[S.k];
  out.norm = out.r.norm();
  CW_LOG_DEBUG("dfo: {} evals, |r| = {:.6g}, exit {}", out.evals, out.norm, out.exit);
  return out;
}

}  // namespace cellwear
