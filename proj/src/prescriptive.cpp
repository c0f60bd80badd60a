#include "wlan/prescriptive.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>

namespace wlan {

std::optional<FlagRule> parse_flag_rule(std::string_view s) {
  if (s == "all") return FlagRule::All;
  if (s == "any") return FlagRule::Any;
  return std::nullopt;
}

std::string_view to_string(FlagRule r) { return r == FlagRule::All ? "all" : "any"; }

std::vector<ApId> flag_aps(std::span<const ApStats> stats, double latency_bound_ms,
                           double loss_bound_pct, FlagRule rule) {
  std::vector<ApId> out;
  for (const auto& s : stats) {
    if (!s.mean_latency_ms || !s.mean_loss_pct) continue;
    const bool slow = *s.mean_latency_ms > latency_bound_ms;
    const bool lossy = *s.mean_loss_pct > loss_bound_pct;
    if (rule == FlagRule::All ? (slow && lossy) : (slow || lossy)) out.push_back(s.ap);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

// Keyed by (target, action); an empty target string is network-wide.
using Key = std::pair<std::string, Action>;

struct Pending {
  std::optional<ApId> target;
  std::string rationale;
  std::set<std::uint32_t> linked;
};

}  // namespace

std::vector<Recommendation> recommend(std::span<const AnomalyEvent> anomalies,
                                      std::span<const ApStats> ap_stats,
                                      const PrescriptiveConfig& config,
                                      std::span<const DailyAggregate> aggregates,
                                      const BaselineProfile* baseline) {
  std::map<Key, Pending> out;
  auto add = [&](const std::optional<ApId>& target, Action action, const std::string& why) -> Pending& {
    auto [it, inserted] = out.try_emplace(Key{target ? target->str() : std::string(), action});
    if (inserted) {
      it->second.target = target;
      it->second.rationale = why;
    }
    return it->second;
  };

  const auto flagged = flag_aps(ap_stats, config.latency_bound_ms, config.loss_bound_pct, config.rule);
  for (const auto& ap : flagged) {
    const auto stats = std::find_if(ap_stats.begin(), ap_stats.end(),
                                    [&](const ApStats& s) { return s.ap == ap; });
    const std::string health = "mean latency " + fmt(*stats->mean_latency_ms, 1) + " ms, loss " +
                               fmt(*stats->mean_loss_pct, 2) + " %";
    auto& channel = add(ap, Action::ChannelReassign, health + "; move to a cleaner channel");
    auto& load = add(ap, Action::LoadRedistribution, health + "; steer clients to neighbouring APs");
    for (const auto& e : anomalies) {
      if (e.ap == ap && !e.device) {
        channel.linked.insert(e.id);
        load.linked.insert(e.id);
      }
    }
  }

  for (const auto& e : anomalies) {
    switch (e.type) {
      case AnomalyType::AuthBurst:
        if (e.severity >= Severity::Medium) {
          add(std::nullopt, Action::AuthPolicyReview,
              "authentication failure bursts; review lockout and onboarding policy")
              .linked.insert(e.id);
        }
        break;
      case AnomalyType::DnsAnomaly:
        add(e.ap, Action::Segmentation, "unusual DNS traffic; isolate the affected segment")
            .linked.insert(e.id);
        break;
      case AnomalyType::SimultaneousConnections:
        add(e.ap, Action::Segmentation, "devices holding many parallel sessions; isolate the affected segment")
            .linked.insert(e.id);
        break;
      default:
        break;
    }
  }

  if (baseline && !aggregates.empty()) {
    const auto m = static_cast<int>(Metric::OverloadPct);
    std::vector<Date> excess;
    for (const auto& a : aggregates) {
      const SlotStats& slot = baseline->slot_for(a.day);
      if (a.overload_pct - slot.mean[m] > config.k * slot.stddev[m]) excess.push_back(a.day);
    }
    if (static_cast<int>(excess.size()) >= config.capacity_days) {
      auto& p = add(std::nullopt, Action::CapacityExpansion,
                    "overloaded AP share above its weekday baseline on " + std::to_string(excess.size()) +
                        " days; add capacity in the hotspot areas");
      for (const auto& e : anomalies) {
        if (e.type == AnomalyType::ApOverload &&
            std::find(excess.begin(), excess.end(), e.day) != excess.end()) {
          p.linked.insert(e.id);
        }
      }
    }
  }

  std::vector<Recommendation> result;
  result.reserve(out.size());
  for (auto& [key, p] : out) {
    Recommendation r;
    r.target = p.target;
    r.action = key.second;
    r.rationale = std::move(p.rationale);
    r.linked_events.assign(p.linked.begin(), p.linked.end());
    result.push_back(std::move(r));
  }
  return result;
}

}  // namespace wlan
