#include "cellwear/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cellwear/errors.hpp"

namespace cellwear {

OCPCurve::OCPCurve(std::vector<double> sto, std::vector<double> volts)
    : s_(std::move(sto)), u_(std::move(volts)) {
  if (s_.size() != u_.size() || s_.size() < 2)
    throw ConfigError("OCP table needs at least two (sto, volts) rows");
  for (std::size_t i = 1; i < s_.size(); ++i)
    if (!(s_[i] > s_[i - 1])) throw ConfigError("OCP stoichiometry column must increase");
  if (s_.front() > 1e-9 || s_.back() < 1.0 - 1e-9)
    throw ConfigError("OCP table must cover stoichiometry [0, 1]");
  h_ = (s_.back() - s_.front()) / double(s_.size() - 1);
  uniform_ = true;
  for (std::size_t i = 0; i < s_.size(); ++i)
    if (std::abs(s_[i] - (s_.front() + h_ * double(i))) > 1e-9) {
      uniform_ = false;
      break;
    }
}

OCPCurve OCPCurve::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open OCP table " + path);
  std::vector<double> s, u;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) throw SchemaError(path, lineno, "expected two columns");
    s.push_back(a);
    u.push_back(b);
  }
  try {
    return OCPCurve(std::move(s), std::move(u));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::size_t OCPCurve::segment(double s) const {
  const std::size_t last = s_.size() - 2;
  if (s <= s_.front()) return 0;
  if (s >= s_.back()) return last;
  if (uniform_) return std::min(last, static_cast<std::size_t>((s - s_.front()) / h_));
  auto it = std::upper_bound(s_.begin(), s_.end(), s);
  return std::min(last, static_cast<std::size_t>(it - s_.begin()) - 1);
}

double OCPCurve::operator()(double s) const {
  const std::size_t i = segment(s);
  const double t = (s - s_[i]) / (s_[i + 1] - s_[i]);
  return u_[i] + t * (u_[i + 1] - u_[i]);
}

double OCPCurve::slope(double s) const {
  const std::size_t i = segment(s);
  return (u_[i + 1] - u_[i]) / (s_[i + 1] - s_[i]);
}

bool OCPCurve::strictly_decreasing() const {
  for (std::size_t i = 1; i < u_.size(); ++i)
    if (!(u_[i] < u_[i - 1])) return false;
  return true;
}

}  // namespace cellwear
