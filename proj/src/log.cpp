#include "cellwear/log.hpp"

#include <cstdlib>
#include <spdlog/sinks/stdout_color_sinks.h>

namespace cellwear {

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> lg = [] {
    auto l = spdlog::stderr_color_mt("cellwear");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("CELLWEAR_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return *lg;
}

}  // namespace cellwear
