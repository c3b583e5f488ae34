#pragma once
#include <string>
#include <vector>

#include "cellwear/engine.hpp"
#include "cellwear/metrics.hpp"

namespace cellwear {

/// One row per logged day.
void write_trajectory(const std::string& path, const LifetimeResult& r);
void write_summary(const std::string& path, const RunSummary& s);
RunSummary read_summary(const std::string& path);

struct TvDPair {
  RunSummary base, v2g;
  TvDResult ah, wh;
};

void write_tvd_report(const std::string& path, const std::vector<TvDPair>& pairs,
                      const TrendReport& trend, const std::vector<std::string>& unmatched);
void write_trend_csv(const std::string& path, const TrendReport& trend);

/// Fixed-width console table in the layout of the lifetime summary table.
std::string format_table(const std::vector<RunSummary>& runs);

}  // namespace cellwear
