#include "wlan/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace wlan {

namespace {

std::int64_t session_start(const SessionRecord& r) {
  return r.ts.seconds - static_cast<std::int64_t>(std::llround(r.session_minutes.value_or(0.0) * 60.0));
}

}  // namespace

std::int64_t sweep_peak(std::vector<std::pair<std::int64_t, int>> events) {
  std::sort(events.begin(), events.end());
  std::int64_t current = 0;
  std::int64_t peak = 0;
  for (const auto& [ts, delta] : events) {
    current = std::max<std::int64_t>(0, current + delta);
    peak = std::max(peak, current);
  }
  return peak;
}

DailyAccumulator::DailyAccumulator(Date day, const DescriptiveConfig& config)
    : day_(day), config_(config) {}

void DailyAccumulator::add(const SessionRecord& r) {
  if (config_.zone.local_date(r.ts) != day_) return;
  switch (r.kind) {
    case EventKind::Assoc:
      ++connections_;
      associated_devices_.push_back(r.device);
      ap_events_[r.ap].emplace_back(r.ts.seconds, +1);
      break;
    case EventKind::Disassoc: {
      const double minutes = r.session_minutes.value_or(0.0);
      ++disassoc_count_;
      session_minutes_sum_ += minutes;
      if (minutes < config_.unexpected_disconnect_minutes) ++unexpected_disconnects_;
      ap_events_[r.ap].emplace_back(r.ts.seconds, -1);
      sessions_[r.device].push_back({session_start(r), r.ts.seconds, r.ap});
      break;
    }
    case EventKind::AuthFail:
      ++auth_failures_;
      break;
    case EventKind::TrafficSample:
      proto_bytes_[static_cast<std::size_t>(r.proto.value_or(Protocol::Other))] +=
          r.bytes_up.value_or(0) + r.bytes_down.value_or(0);
      break;
    case EventKind::ApHealth:
      // Registers the AP in the day's inventory.
      ap_events_[r.ap];
      break;
  }
}

void DailyAccumulator::merge(const DailyAccumulator& o) {
  connections_ += o.connections_;
  auth_failures_ += o.auth_failures_;
  unexpected_disconnects_ += o.unexpected_disconnects_;
  disassoc_count_ += o.disassoc_count_;
  session_minutes_sum_ += o.session_minutes_sum_;
  for (std::size_t i = 0; i < kProtocolCount; ++i) proto_bytes_[i] += o.proto_bytes_[i];
  associated_devices_.insert(associated_devices_.end(), o.associated_devices_.begin(),
                             o.associated_devices_.end());
  for (const auto& [ap, events] : o.ap_events_) {
    auto& dst = ap_events_[ap];
    dst.insert(dst.end(), events.begin(), events.end());
  }
  for (const auto& [device, intervals] : o.sessions_) {
    auto& dst = sessions_[device];
    dst.insert(dst.end(), intervals.begin(), intervals.end());
  }
}

DailyAggregate DailyAccumulator::finalize() const {
  DailyAggregate a;
  a.day = day_;
  a.connections = connections_;
  a.auth_failures = auth_failures_;
  a.unexpected_disconnects = unexpected_disconnects_;
  a.mean_session_minutes =
      disassoc_count_ > 0 ? session_minutes_sum_ / static_cast<double>(disassoc_count_) : 0.0;

  auto devices = associated_devices_;
  std::sort(devices.begin(), devices.end());
  a.distinct_devices = std::unique(devices.begin(), devices.end()) - devices.begin();

  std::uint64_t total = 0;
  for (auto b : proto_bytes_) total += b;
  a.traffic_gb = static_cast<double>(total) / kBytesPerGigabyte;
  if (total > 0) {
    for (Protocol p : kProtocols) {
      a.proto_share[p] =
          static_cast<double>(proto_bytes_[static_cast<std::size_t>(p)]) / static_cast<double>(total);
    }
  }

  if (!ap_events_.empty()) {
    std::int64_t overloaded = 0;
    for (const auto& [ap, events] : ap_events_) {
      if (sweep_peak(events) > config_.overload_threshold) ++overloaded;
    }
    a.overload_pct = 100.0 * static_cast<double>(overloaded) / static_cast<double>(ap_events_.size());
  }

  for (const auto& [device, intervals] : sessions_) {
    if (intervals.size() < 2) continue;
    auto sorted = intervals;
    std::sort(sorted.begin(), sorted.end(),
              [](const Interval& x, const Interval& y) { return x.start < y.start; });
    std::int64_t reach = sorted.front().end;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i].start < reach) {
        ++a.duplicate_device_events;
        break;
      }
      reach = std::max(reach, sorted[i].end);
    }
  }
  return a;
}

DailyAggregate aggregate_daily(std::span<const SessionRecord> records, Date day,
                               const DescriptiveConfig& config) {
  DailyAccumulator acc(day, config);
  for (const auto& r : records) acc.add(r);
  return acc.finalize();
}

std::optional<DateRange> record_span(std::span<const SessionRecord> records, const LocalZone& zone) {
  if (records.empty()) return std::nullopt;
  Date lo = zone.local_date(records.front().ts);
  Date hi = lo;
  for (const auto& r : records) {
    const Date d = zone.local_date(r.ts);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return DateRange{lo, hi};
}

std::vector<DailyAggregate> aggregate_days(std::span<const SessionRecord> records,
                                           const DescriptiveConfig& config) {
  const auto span = record_span(records, config.zone);
  if (!span) return {};
  std::vector<DailyAccumulator> days;
  days.reserve(static_cast<std::size_t>(span->size()));
  for (int i = 0; i < span->size(); ++i) days.emplace_back(span->first + i, config);
  for (const auto& r : records) {
    days[static_cast<std::size_t>(config.zone.local_date(r.ts) - span->first)].add(r);
  }
  std::vector<DailyAggregate> out;
  out.reserve(days.size());
  for (const auto& acc : days) out.push_back(acc.finalize());
  return out;
}

std::vector<ApStats> ap_load_stats(std::span<const SessionRecord> records,
                                   const std::optional<DateRange>& window,
                                   const DescriptiveConfig& config) {
  struct Work {
    std::int64_t connections = 0;
    std::vector<std::pair<std::int64_t, int>> events;
    std::map<Date, std::vector<std::pair<std::int64_t, int>>> daily_events;
    double latency_sum = 0.0;
    double loss_sum = 0.0;
    std::int64_t health_samples = 0;
  };
  std::map<ApId, Work> by_ap;
  for (const auto& r : records) {
    const Date day = config.zone.local_date(r.ts);
    if (window && !window->contains(day)) continue;
    auto& w = by_ap[r.ap];
    switch (r.kind) {
      case EventKind::Assoc:
        ++w.connections;
        w.events.emplace_back(r.ts.seconds, +1);
        w.daily_events[day].emplace_back(r.ts.seconds, +1);
        break;
      case EventKind::Disassoc:
        w.events.emplace_back(r.ts.seconds, -1);
        w.daily_events[day].emplace_back(r.ts.seconds, -1);
        break;
      case EventKind::ApHealth:
        w.latency_sum += r.latency_ms.value_or(0.0);
        w.loss_sum += r.loss_pct.value_or(0.0);
        ++w.health_samples;
        break;
      default:
        break;
    }
  }
  std::vector<ApStats> out;
  out.reserve(by_ap.size());
  for (auto& [ap, w] : by_ap) {
    ApStats s;
    s.ap = ap;
    s.monthly_connections = w.connections;
    s.peak_concurrent = sweep_peak(std::move(w.events));
    for (auto& [day, events] : w.daily_events) {
      if (sweep_peak(std::move(events)) > config.overload_threshold) ++s.overloaded_days;
    }
    if (w.health_samples > 0) {
      s.mean_latency_ms = w.latency_sum / static_cast<double>(w.health_samples);
      s.mean_loss_pct = w.loss_sum / static_cast<double>(w.health_samples);
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const ApStats& a, const ApStats& b) {
    return a.monthly_connections > b.monthly_connections;
  });
  return out;
}

double overload_fraction(std::span<const ApStats> stats, int threshold) {
  if (threshold < 1) throw std::invalid_argument("overload threshold must be >= 1");
  if (stats.empty()) return 0.0;
  const auto over = std::count_if(stats.begin(), stats.end(), [&](const ApStats& s) {
    return s.peak_concurrent > threshold;
  });
  return 100.0 * static_cast<double>(over) / static_cast<double>(stats.size());
}

HourlyProfile hourly_profile(std::span<const SessionRecord> records, const LocalZone& zone) {
  HourlyProfile profile{};
  if (records.empty()) return profile;
  std::vector<Date> days;
  days.reserve(64);
  std::array<std::int64_t, 24> counts{};
  for (const auto& r : records) {
    days.push_back(zone.local_date(r.ts));
    if (r.kind != EventKind::Disassoc) continue;
    const std::int64_t start = session_start(r);
    const std::int64_t end = r.ts.seconds;
    // First top-of-hour instant at or after the session start. Local hour
    // boundaries coincide with UTC hour boundaries for whole-hour offsets.
    const std::int64_t offset = zone.offset_minutes * 60LL;
    const std::int64_t local = start + offset;
    const std::int64_t first = (local >= 0 ? (local + 3599) / 3600 : -((-local) / 3600)) * 3600;
    for (std::int64_t t = first; t < end + offset; t += 3600) {
      const std::int64_t sod = ((t % 86400) + 86400) % 86400;
      ++counts[static_cast<std::size_t>(sod / 3600)];
    }
  }
  std::sort(days.begin(), days.end());
  const auto day_count = std::unique(days.begin(), days.end()) - days.begin();
  for (std::size_t h = 0; h < 24; ++h) {
    profile[h] = static_cast<double>(counts[h]) / static_cast<double>(day_count);
  }
  return profile;
}

BaselineProfile build_baseline(std::span<const DailyAggregate> aggregates) {
  if (aggregates.size() < static_cast<std::size_t>(kMinBaselineDays)) {
    throw InsufficientData("baseline needs at least " + std::to_string(kMinBaselineDays) +
                           " days, got " + std::to_string(aggregates.size()));
  }
  // Canonical order makes the floating-point sums independent of input order.
  std::vector<DailyAggregate> sorted(aggregates.begin(), aggregates.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const DailyAggregate& a, const DailyAggregate& b) { return a.day < b.day; });

  auto stats_of = [](const std::vector<const DailyAggregate*>& days) {
    Eigen::Matrix<double, Eigen::Dynamic, kMetricCount> rows(static_cast<Eigen::Index>(days.size()),
                                                            kMetricCount);
    for (std::size_t i = 0; i < days.size(); ++i) {
      for (int m = 0; m < kMetricCount; ++m) {
        rows(static_cast<Eigen::Index>(i), m) = metric_value(*days[i], static_cast<Metric>(m));
      }
    }
    auto [mean, sd] = column_mean_std(rows);
    SlotStats s;
    s.mean = mean;
    s.stddev = sd;
    s.days = static_cast<int>(days.size());
    return s;
  };

  BaselineProfile profile;
  std::vector<const DailyAggregate*> all;
  std::array<std::vector<const DailyAggregate*>, 7> by_slot;
  for (const auto& a : sorted) {
    all.push_back(&a);
    by_slot[static_cast<std::size_t>(a.day.weekday_index())].push_back(&a);
  }
  profile.all_days = stats_of(all);
  for (std::size_t i = 0; i < 7; ++i) {
    if (by_slot[i].size() >= static_cast<std::size_t>(kMinBaselineDays)) {
      profile.slots[i] = stats_of(by_slot[i]);
    } else {
      profile.slots[i] = profile.all_days;
      profile.slots[i].fallback = true;
    }
  }
  profile.window_days = static_cast<int>(sorted.size());
  profile.built_from = sorted.front().day;
  profile.built_to = sorted.back().day;
  return profile;
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw std::invalid_argument("correlation needs two series of equal length >= 3");
  }
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::Map<const Eigen::ArrayXd> x(xs.data(), n);
  Eigen::Map<const Eigen::ArrayXd> y(ys.data(), n);
  const Eigen::ArrayXd dx = x - x.mean();
  const Eigen::ArrayXd dy = y - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  if (sxx == 0.0 || syy == 0.0) throw ZeroVariance("correlation of a constant series");
  const double r = (dx * dy).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace wlan
