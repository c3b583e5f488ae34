#pragma once
#include <stdexcept>
#include <string>

namespace cellwear {

/// Bad or missing configuration. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A file that does not follow its declared schema.
struct SchemaError : ConfigError {
  SchemaError(const std::string& file, int line, const std::string& what)
      : ConfigError(file + ":" + std::to_string(line) + ": " + what), line(line) {}
  int line;
};

/// Solid concentration left [0, c_max] during a diffusion step.
struct SaturationError : std::runtime_error {
  SaturationError(std::string electrode, bool upper)
      : std::runtime_error(electrode + " electrode " + (upper ? "saturated" : "depleted")),
        electrode(std::move(electrode)), upper(upper) {}
  std::string electrode;
  bool upper;
};

struct KineticStarvation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CapacityCollapse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BookkeepingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AttributionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ComparisonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integration failure inside a simulated day.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cellwear
