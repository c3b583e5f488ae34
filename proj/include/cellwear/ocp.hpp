#pragma once
#include <string>
#include <vector>

namespace cellwear {

// Tabulated open-circuit potential, piecewise linear in stoichiometry.
// Outside [0,1] the end segments are extended linearly so root brackets
// near the table edges stay well defined.
class OCPCurve {
 public:
  OCPCurve() = default;
  OCPCurve(std::vector<double> sto, std::vector<double> volts);

  static OCPCurve load(const std::string& path);

  double operator()(double s) const;
  double slope(double s) const;

  bool strictly_decreasing() const;
  bool empty() const { return s_.empty(); }
  const std::vector<double>& sto() const { return s_; }
  const std::vector<double>& volts() const { return u_; }

 private:
  std::size_t segment(double s) const;

  std::vector<double> s_, u_;
  bool uniform_ = false;
  double h_ = 0.0;
};

}  // namespace cellwear
