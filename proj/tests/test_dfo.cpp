#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cellwear/dfo.hpp"

using namespace cellwear;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(v.size());
  int i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

}  // namespace

TEST_CASE("linear least squares") {
  Eigen::MatrixXd A(4, 2);
  A << 1, 0, 0, 2, 1, 1, 3, -1;
  const VectorXd b = vec({1, 2, 3, 4});
  const VectorXd xs = A.colPivHouseholderQr().solve(b);
  int calls = 0;
  auto fn = [&](const VectorXd& x) {
    ++calls;
    return VectorXd(A * x - b);
  };
  const auto r = solve_dfo_ls(fn, vec({0, 0}), vec({-10, -10}), vec({10, 10}));
  CHECK(r.evals == calls);
  CHECK(r.evals <= 30);
  CHECK((r.x - xs).norm() < 1e-6);
  CHECK(r.f == doctest::Approx(0.5 * (A * xs - b).squaredNorm()).epsilon(1e-8));
}

TEST_CASE("rosenbrock") {
  auto fn = [](const VectorXd& x) { return vec({10 * (x[1] - x[0] * x[0]), 1 - x[0]}); };
  const auto r = solve_dfo_ls(fn, vec({-1.2, 1}), vec({-5, -5}), vec({5, 5}));
  CAPTURE(r.exit);
  CHECK(std::abs(r.x[0] - 1) < 1e-4);
  CHECK(std::abs(r.x[1] - 1) < 1e-4);
  CHECK_FALSE(r.max_evals);
  // best-found is non-increasing along the trace
  REQUIRE(r.trace.size() == static_cast<std::size_t>(r.evals));
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].f_best <= r.trace[i - 1].f_best);
  CHECK(r.trace.back().f_best == doctest::Approx(r.f));
}

TEST_CASE("active bound") {
  // unconstrained minimiser at x = 3, upper bound 2
  auto fn = [](const VectorXd& x) { return vec({x[0] - 3, 0.5 * (x[1] + 1)}); };
  const auto r = solve_dfo_ls(fn, vec({0, 0}), vec({-4, -4}), vec({2, 4}));
  CHECK(r.x[0] == doctest::Approx(2).epsilon(1e-8));
  CHECK(r.x[1] == doctest::Approx(-1).epsilon(1e-6));
}

TEST_CASE("budget exhaustion is flagged") {
  auto fn = [](const VectorXd& x) { return vec({10 * (x[1] - x[0] * x[0]), 1 - x[0]}); };
  DfoOptions o;
  o.max_evals = 8;
  const auto r = solve_dfo_ls(fn, vec({-1.2, 1}), vec({-5, -5}), vec({5, 5}), o);
  CHECK(r.max_evals);
  CHECK(r.exit == "max_evals");
  CHECK(r.evals == 8);
}

TEST_CASE("target stops early") {
  auto fn = [](const VectorXd& x) { return vec({x[0] - 1, x[1] - 2}); };
  DfoOptions o;
  o.f_target = 1e-3;
  const auto r = solve_dfo_ls(fn, vec({0, 0}), vec({-5, -5}), vec({5, 5}), o);
  CHECK(r.exit == "f_target");
  CHECK(r.f <= 1e-3);
}

TEST_CASE("failed evaluations never win") {
  int bad = 0;
  auto fn = [&](const VectorXd& x) {
    if (x[0] > 0.5) {
      ++bad;
      return vec({NAN, NAN});
    }
    return vec({x[0] - 1, x[1]});
  };
  const auto r = solve_dfo_ls(fn, vec({0, 0.3}), vec({-2, -2}), vec({2, 2}));
  CHECK(std::isfinite(r.f));
  CHECK(r.x[0] <= 0.5);
  CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("start outside the box is clipped") {
  auto fn = [](const VectorXd& x) { return vec({x[0], x[1]}); };
  const auto r = solve_dfo_ls(fn, vec({9, -9}), vec({-1, -1}), vec({1, 1}));
  CHECK(r.x.norm() < 1e-6);
}

TEST_CASE("box least squares") {
  Eigen::MatrixXd J(2, 2);
  J << 1, 0, 0, 1;
  const VectorXd r = vec({-3, 0.5});
  // free minimiser s = (3, -0.5)
  auto s = box_least_squares(J, r, vec({-1, -1}), vec({1, 1}));
  CHECK(s[0] == doctest::Approx(1));
  CHECK(s[1] == doctest::Approx(-0.5));
  s = box_least_squares(J, r, vec({-10, -10}), vec({10, 10}));
  CHECK(s[0] == doctest::Approx(3));
  // coupled columns: compare to a dense grid search
  Eigen::MatrixXd K(3, 2);
  K << 1, 2, 3, 1, -1, 1;
  const VectorXd q = vec({-2, 1, 4});
  const VectorXd lo = vec({-0.5, 0}), hi = vec({0.5, 2});
  s = box_least_squares(K, q, lo, hi);
  double best = 1e300;
  for (int i = 0; i <= 1000; ++i)
    for (int j = 0; j <= 1000; ++j) {
      const VectorXd t = vec({lo[0] + (hi[0] - lo[0]) * i / 1000.0, lo[1] + (hi[1] - lo[1]) * j / 1000.0});
      best = std::min(best, (q + K * t).squaredNorm());
    }
  CHECK((q + K * s).squaredNorm() <= best + 1e-9);
  CHECK((q + K * s).squaredNorm() == doctest::Approx(best).epsilon(1e-4));
}
