#pragma once
#include <spdlog/spdlog.h>

namespace cellwear {

/// Shared logger. Level from CELLWEAR_LOG (trace..off), default warn.
spdlog::logger& logger();

}  // namespace cellwear

#define CW_LOG_DEBUG(...) ::cellwear::logger().debug(__VA_ARGS__)
#define CW_LOG_INFO(...) ::cellwear::logger().info(__VA_ARGS__)
#define CW_LOG_WARN(...) ::cellwear::logger().warn(__VA_ARGS__)
