#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wlan/domain.hpp"

namespace wlan {

/// How the latency and loss bounds combine when flagging an AP.
enum class FlagRule { All, Any };

std::optional<FlagRule> parse_flag_rule(std::string_view s);
std::string_view to_string(FlagRule r);

struct PrescriptiveConfig {
  double latency_bound_ms = 40.0;
  double loss_bound_pct = 1.5;
  FlagRule rule = FlagRule::All;
  /// Band width and minimum day count for the capacity rule.
  double k = 3.0;
  int capacity_days = 3;
};

/// APs whose mean latency and loss are strictly above the bounds (either
/// one under FlagRule::Any). APs without health data are never flagged.
/// Result is sorted by AP id.
std::vector<ApId> flag_aps(std::span<const ApStats> stats, double latency_bound_ms = 40.0,
                           double loss_bound_pct = 1.5, FlagRule rule = FlagRule::All);

/// Rule table from anomalies and AP conditions to advisory actions, one per
/// (target, action). When `aggregates` and `baseline` are given, sustained
/// overload above the baseline also yields CapacityExpansion.
std::vector<Recommendation> recommend(std::span<const AnomalyEvent> anomalies,
                                      std::span<const ApStats> ap_stats,
                                      const PrescriptiveConfig& config = {},
                                      std::span<const DailyAggregate> aggregates = {},
                                      const BaselineProfile* baseline = nullptr);

}  // namespace wlan
