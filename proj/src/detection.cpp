#include "wlan/detection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>

#include "wlan/dbscan.hpp"

namespace wlan {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

/// Median and 1.4826 * MAD (a consistent sigma estimate under normality).
std::pair<double, double> robust_center_scale(const std::vector<double>& v) {
  const double med = median_of(v);
  std::vector<double> dev(v.size());
  std::transform(v.begin(), v.end(), dev.begin(), [&](double x) { return std::abs(x - med); });
  return {med, 1.4826 * median_of(std::move(dev))};
}

AnomalyEvent make_event(Date day, AnomalyType type, Detector detector, double score) {
  AnomalyEvent e;
  e.day = day;
  e.type = type;
  e.detector = detector;
  e.score = score;
  return e;
}

std::int64_t session_start_seconds(const SessionRecord& r) {
  return r.ts.seconds - static_cast<std::int64_t>(std::llround(r.session_minutes.value_or(0.0) * 60.0));
}

std::string fmt(double v, int precision = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace

FeatureVector feature_vector(const DailyAggregate& day, const BaselineProfile& baseline) {
  const SlotStats& slot = baseline.slot_for(day.day);
  FeatureVector f;
  f.day = day.day;
  for (int i = 0; i < kFeatureCount; ++i) {
    const auto m = static_cast<int>(kFeatureMetrics[static_cast<std::size_t>(i)]);
    const double sd = std::max(slot.stddev[m], kStdFloor);
    f.values[i] = (metric_value(day, kFeatureMetrics[static_cast<std::size_t>(i)]) - slot.mean[m]) / sd;
  }
  return f;
}

Eigen::MatrixXd feature_matrix(std::span<const FeatureVector> features) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(features.size()), kFeatureCount);
  for (std::size_t i = 0; i < features.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = features[i].values.transpose();
  }
  return m;
}

std::vector<ThresholdHit> threshold_hits(std::span<const double> series, int window, double k) {
  if (window < 2) throw std::invalid_argument("threshold window must be >= 2");
  if (!(k > 0.0)) throw std::invalid_argument("threshold k must be > 0");
  if (series.size() <= static_cast<std::size_t>(window)) {
    throw SeriesTooShort("series of " + std::to_string(series.size()) +
                         " points is not longer than the window of " + std::to_string(window));
  }
  const auto n = static_cast<Eigen::Index>(series.size());
  Eigen::Map<const Eigen::ArrayXd> x(series.data(), n);
  std::vector<ThresholdHit> hits;
  for (Eigen::Index t = window; t < n; ++t) {
    const auto past = x.segment(t - window, window);
    const double mean = past.mean();
    const double sd = std::sqrt((past - mean).square().sum() / static_cast<double>(window - 1));
    const double dev = std::abs(x[t] - mean);
    const bool hit = sd > 0.0 ? dev > k * sd : x[t] != mean;
    if (hit) {
      hits.push_back({static_cast<std::size_t>(t), x[t], mean, sd, dev / std::max(sd, kStdFloor)});
    }
  }
  return hits;
}

DailySeries metric_series(std::span<const DailyAggregate> aggregates, Metric metric, AnomalyType type) {
  DailySeries s;
  s.metric = metric;
  s.type = type;
  for (const auto& a : aggregates) {
    s.days.push_back(a.day);
    s.values.push_back(metric_value(a, metric));
  }
  return s;
}

std::vector<AnomalyEvent> dynamic_threshold_alerts(const DailySeries& series, int window, double k) {
  std::vector<AnomalyEvent> out;
  for (const auto& hit : threshold_hits(series.values, window, k)) {
    auto e = make_event(series.days[hit.index], series.type, Detector::Threshold, hit.score);
    const std::string name(metric_name(series.metric));
    e.evidence.text = name + " " + fmt(hit.value) + " outside rolling band " + fmt(hit.mean) +
                      " +/- " + fmt(k) + " sd (sd " + fmt(hit.stddev) + ")";
    e.evidence.values = {{name, hit.value}, {"window_mean", hit.mean}, {"window_sd", hit.stddev}};
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<AnomalyEvent> detect_duplicate_devices(std::span<const SessionRecord> records,
                                                   int max_concurrent, const LocalZone& zone) {
  if (max_concurrent < 1) throw std::invalid_argument("max_concurrent must be >= 1");
  struct Session {
    std::int64_t start;
    std::int64_t end;
    const ApId* ap;
  };
  std::map<std::pair<DeviceId, Date>, std::vector<Session>> groups;
  for (const auto& r : records) {
    if (r.kind != EventKind::Disassoc) continue;
    const std::int64_t start = session_start_seconds(r);
    groups[{r.device, zone.local_date(Timestamp{start})}].push_back({start, r.ts.seconds, &r.ap});
  }
  std::vector<AnomalyEvent> out;
  for (auto& [key, sessions] : groups) {
    if (sessions.size() < 2) continue;
    std::sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
      return std::tie(a.start, a.end) < std::tie(b.start, b.end);
    });
    std::vector<const Session*> active;
    std::size_t peak = 0;
    std::vector<const ApId*> overlapping_aps;
    bool multi_ap = false;
    for (const auto& s : sessions) {
      std::erase_if(active, [&](const Session* a) { return a->end <= s.start; });
      for (const Session* a : active) {
        if (*a->ap != *s.ap) multi_ap = true;
        overlapping_aps.push_back(a->ap);
      }
      if (!active.empty()) overlapping_aps.push_back(s.ap);
      active.push_back(&s);
      peak = std::max(peak, active.size());
    }
    std::sort(overlapping_aps.begin(), overlapping_aps.end(),
              [](const ApId* a, const ApId* b) { return *a < *b; });
    overlapping_aps.erase(std::unique(overlapping_aps.begin(), overlapping_aps.end(),
                                      [](const ApId* a, const ApId* b) { return *a == *b; }),
                          overlapping_aps.end());
    if (static_cast<int>(peak) > max_concurrent) {
      auto e = make_event(key.second, AnomalyType::SimultaneousConnections, Detector::Rule,
                          static_cast<double>(peak));
      e.device = key.first;
      e.ap = *overlapping_aps.front();
      e.evidence.text = "device held " + std::to_string(peak) + " overlapping sessions (limit " +
                        std::to_string(max_concurrent) + ")";
      e.evidence.values = {{"peak_overlap", static_cast<double>(peak)},
                           {"max_concurrent", static_cast<double>(max_concurrent)}};
      out.push_back(std::move(e));
    }
    if (multi_ap) {
      auto e = make_event(key.second, AnomalyType::DuplicateDevice, Detector::Rule,
                          static_cast<double>(overlapping_aps.size()));
      e.device = key.first;
      std::string aps;
      for (const ApId* ap : overlapping_aps) aps += (aps.empty() ? "" : ",") + ap->str();
      e.evidence.text = "overlapping sessions on " + aps;
      e.evidence.values = {{"distinct_aps", static_cast<double>(overlapping_aps.size())},
                           {"peak_overlap", static_cast<double>(peak)}};
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<AnomalyEvent> protocol_anomaly(Date day, const ProtocolShares& share,
                                           const BaselineProfile& baseline, double k) {
  std::vector<AnomalyEvent> out;
  double total = 0.0;
  for (double v : share.values) total += v;
  if (total <= 0.0) return out;
  const SlotStats& slot = baseline.slot_for(day);
  for (Protocol p : kProtocols) {
    const auto m = static_cast<int>(share_metric(p));
    const double sd = std::max(slot.stddev[m], kStdFloor);
    const double z = std::abs(share[p] - slot.mean[m]) / sd;
    if (!(z > k)) continue;
    const auto type = p == Protocol::Dns ? AnomalyType::DnsAnomaly : AnomalyType::TrafficSpike;
    auto e = make_event(day, type, Detector::Threshold, z);
    e.evidence.text = std::string(display_name(p)) + " share " + fmt(share[p], 4) +
                      " vs baseline " + fmt(slot.mean[m], 4) + " (sd " + fmt(slot.stddev[m], 4) + ")";
    e.evidence.values = {{std::string(metric_name(share_metric(p))), share[p]},
                         {"baseline_mean", slot.mean[m]},
                         {"baseline_sd", slot.stddev[m]}};
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<AnomalyEvent> detect_auth_bursts(std::span<const SessionRecord> records,
                                             const DetectionConfig& config) {
  struct Tally {
    std::int64_t failures = 0;
    std::map<ApId, std::int64_t> by_ap;
  };
  std::map<Date, std::map<DeviceId, Tally>> days;
  for (const auto& r : records) {
    if (r.kind != EventKind::AuthFail) continue;
    auto& t = days[config.zone.local_date(r.ts)][r.device];
    ++t.failures;
    ++t.by_ap[r.ap];
  }
  std::vector<AnomalyEvent> out;
  for (const auto& [day, devices] : days) {
    std::vector<double> counts;
    counts.reserve(devices.size());
    for (const auto& [device, t] : devices) counts.push_back(static_cast<double>(t.failures));
    auto [center, scale] = robust_center_scale(counts);
    // Count data: never trust a spread tighter than the Poisson scale.
    scale = std::max(scale, std::sqrt(std::max(center, 1.0)));
    for (const auto& [device, t] : devices) {
      const double z = (static_cast<double>(t.failures) - center) / scale;
      if (t.failures < config.auth_burst_min || !(z > config.k)) continue;
      auto e = make_event(day, AnomalyType::AuthBurst, Detector::Threshold, z);
      e.device = device;
      e.ap = std::max_element(t.by_ap.begin(), t.by_ap.end(), [](const auto& a, const auto& b) {
               return a.second < b.second;
             })->first;
      e.evidence.text = std::to_string(t.failures) + " authentication failures from one device (day median " +
                        fmt(center, 1) + ")";
      e.evidence.values = {{"auth_failures", static_cast<double>(t.failures)},
                           {"population_median", center},
                           {"population_scale", scale}};
      out.push_back(std::move(e));
    }
  }
  return out;
}

namespace {

struct DeviceTraffic {
  std::uint64_t total = 0;
  std::uint64_t dns = 0;
  std::map<ApId, std::uint64_t> dns_by_ap;
  std::map<ApId, std::uint64_t> total_by_ap;
};

std::map<Date, std::map<DeviceId, DeviceTraffic>> device_traffic(std::span<const SessionRecord> records,
                                                                 const LocalZone& zone) {
  std::map<Date, std::map<DeviceId, DeviceTraffic>> days;
  for (const auto& r : records) {
    if (r.kind != EventKind::TrafficSample) continue;
    const std::uint64_t bytes = r.bytes_up.value_or(0) + r.bytes_down.value_or(0);
    auto& t = days[zone.local_date(r.ts)][r.device];
    t.total += bytes;
    t.total_by_ap[r.ap] += bytes;
    if (r.proto == Protocol::Dns) {
      t.dns += bytes;
      t.dns_by_ap[r.ap] += bytes;
    }
  }
  return days;
}

template <typename Map>
const ApId& argmax_key(const Map& m) {
  return std::max_element(m.begin(), m.end(), [](const auto& a, const auto& b) {
           return a.second < b.second;
         })->first;
}

}  // namespace

std::vector<AnomalyEvent> detect_dns_cohorts(std::span<const SessionRecord> records,
                                             const DetectionConfig& config) {
  std::vector<AnomalyEvent> out;
  for (const auto& [day, devices] : device_traffic(records, config.zone)) {
    std::vector<double> shares;
    for (const auto& [device, t] : devices) {
      if (t.total >= config.dns_min_device_bytes) {
        shares.push_back(static_cast<double>(t.dns) / static_cast<double>(t.total));
      }
    }
    if (shares.size() < 3) continue;
    const auto [center, raw_scale] = robust_center_scale(shares);
    const double scale = std::max(raw_scale, kStdFloor);

    struct Cohort {
      std::int64_t devices = 0;
      double max_share = 0.0;
      double max_z = 0.0;
    };
    std::map<ApId, Cohort> cohorts;
    for (const auto& [device, t] : devices) {
      if (t.total < config.dns_min_device_bytes || t.dns == 0) continue;
      const double share = static_cast<double>(t.dns) / static_cast<double>(t.total);
      const double z = (share - center) / scale;
      if (share < config.dns_share_ratio * center || !(z > config.k)) continue;
      auto& c = cohorts[argmax_key(t.dns_by_ap)];
      ++c.devices;
      c.max_share = std::max(c.max_share, share);
      c.max_z = std::max(c.max_z, z);
    }
    for (const auto& [ap, c] : cohorts) {
      auto e = make_event(day, AnomalyType::DnsAnomaly, Detector::Threshold, c.max_z);
      e.ap = ap;
      e.evidence.text = std::to_string(c.devices) + " device(s) with DNS share up to " +
                        fmt(c.max_share, 3) + " (day median " + fmt(center, 3) + ")";
      e.evidence.values = {{"devices", static_cast<double>(c.devices)},
                           {"max_dns_share", c.max_share},
                           {"median_dns_share", center}};
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<AnomalyEvent> detect_heavy_hitters(std::span<const SessionRecord> records,
                                               const DetectionConfig& config) {
  std::vector<AnomalyEvent> out;
  for (const auto& [day, devices] : device_traffic(records, config.zone)) {
    std::vector<double> logs;
    for (const auto& [device, t] : devices) {
      if (t.total > 0) logs.push_back(std::log(static_cast<double>(t.total)));
    }
    if (logs.size() < 3) continue;
    const auto [center, raw_scale] = robust_center_scale(logs);
    const double scale = std::max(raw_scale, kStdFloor);
    const double ratio_floor = std::log(config.heavy_hitter_ratio);
    for (const auto& [device, t] : devices) {
      if (t.total == 0) continue;
      const double lx = std::log(static_cast<double>(t.total));
      const double z = (lx - center) / scale;
      if (lx - center < ratio_floor || !(z > config.k)) continue;
      auto e = make_event(day, AnomalyType::TrafficSpike, Detector::Threshold, z);
      e.device = device;
      e.ap = argmax_key(t.total_by_ap);
      const double gb = static_cast<double>(t.total) / kBytesPerGigabyte;
      e.evidence.text = "device moved " + fmt(gb, 2) + " GB, " + fmt(std::exp(lx - center), 0) +
                        "x the day's median device";
      e.evidence.values = {{"traffic_gb", gb}, {"median_device_gb", std::exp(center) / kBytesPerGigabyte}};
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<AnomalyEvent> isolation_forest_events(const ForestModel<double>& model,
                                                  std::span<const FeatureVector> features) {
  std::vector<AnomalyEvent> out;
  for (const auto& f : features) {
    const double path = mean_path_length(model, f.values);
    const double score = score_from_path_length(path, model.subsample_size);
    auto e = make_event(f.day, AnomalyType::MultivariateOutlier, Detector::IsolationForest, score);
    e.evidence.text = "isolation score " + fmt(score) + " (mean path " + fmt(path, 2) + ")";
    e.evidence.values = {{"mean_path_length", path}};
    for (int i = 0; i < kFeatureCount; ++i) {
      e.evidence.values.emplace_back(
          "z_" + std::string(metric_name(kFeatureMetrics[static_cast<std::size_t>(i)])), f.values[i]);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<AnomalyEvent> dbscan_events(std::span<const FeatureVector> features, double eps,
                                        int min_pts) {
  std::vector<AnomalyEvent> out;
  if (features.empty()) return out;
  const Eigen::MatrixXd points = feature_matrix(features);
  const auto labels = dbscan(points, eps, min_pts);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (labels[i] != kNoise) continue;
    const double norm = features[i].values.norm();
    auto e = make_event(features[i].day, AnomalyType::MultivariateOutlier, Detector::Dbscan, norm);
    e.evidence.text = "day is density noise (eps " + fmt(eps, 2) + ", min_pts " +
                      std::to_string(min_pts) + "), feature norm " + fmt(norm, 2);
    for (int d = 0; d < kFeatureCount; ++d) {
      e.evidence.values.emplace_back(
          "z_" + std::string(metric_name(kFeatureMetrics[static_cast<std::size_t>(d)])),
          features[i].values[d]);
    }
    out.push_back(std::move(e));
  }
  return out;
}

void sort_events(std::vector<AnomalyEvent>& events) {
  auto key = [](const AnomalyEvent& e) {
    return std::make_tuple(e.day, e.type, e.detector, e.device.has_value(),
                           e.device.value_or(DeviceId{}), e.ap.has_value(),
                           e.ap ? e.ap->str() : std::string(), e.score);
  };
  std::stable_sort(events.begin(), events.end(),
                   [&](const AnomalyEvent& a, const AnomalyEvent& b) { return key(a) < key(b); });
}

std::vector<AnomalyEvent> classify(std::vector<AnomalyEvent> detections, const SeverityPolicy& policy) {
  std::vector<AnomalyEvent> kept;
  kept.reserve(detections.size());
  for (auto& e : detections) {
    switch (e.detector) {
      case Detector::Threshold:
        if (!(e.score > policy.k)) continue;
        e.severity = e.score <= 2 * policy.k   ? Severity::Low
                     : e.score <= 4 * policy.k ? Severity::Medium
                                               : Severity::High;
        break;
      case Detector::IsolationForest:
        if (!(e.score > policy.iforest_floor)) continue;
        e.severity = e.score <= 0.7 ? Severity::Low : e.score <= 0.8 ? Severity::Medium : Severity::High;
        break;
      case Detector::Dbscan:
        e.severity = Severity::Medium;
        break;
      case Detector::Rule:
        e.severity = Severity::Medium;
        break;
    }
    kept.push_back(std::move(e));
  }

  // Recurring devices: a rule event escalates once its device has been
  // flagged by a rule on each of the preceding recurrence_days - 1 days.
  std::map<DeviceId, std::vector<Date>> rule_days;
  for (const auto& e : kept) {
    if (e.detector == Detector::Rule && e.device) rule_days[*e.device].push_back(e.day);
  }
  for (auto& [device, days] : rule_days) {
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());
  }
  for (auto& e : kept) {
    if (e.detector != Detector::Rule || !e.device) continue;
    const auto& days = rule_days[*e.device];
    bool recurring = true;
    for (int back = 1; back < policy.recurrence_days && recurring; ++back) {
      recurring = std::binary_search(days.begin(), days.end(), e.day + (-back));
    }
    if (recurring) e.severity = Severity::High;
  }

  sort_events(kept);
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i].id = static_cast<std::uint32_t>(i);
  return kept;
}

Json model_to_json(const ForestModel<double>& model) {
  Json trees = Json::array();
  for (const auto& tree : model.trees) {
    Json dim = Json::array(), value = Json::array(), left = Json::array(), right = Json::array(),
         size = Json::array();
    for (const auto& n : tree.nodes) {
      dim.push_back(n.split_dim);
      value.push_back(n.split_value);
      left.push_back(n.left);
      right.push_back(n.right);
      size.push_back(n.size);
    }
    trees.push_back(Json{{"split_dim", dim}, {"split_value", value}, {"left", left},
                         {"right", right}, {"size", size}});
  }
  return Json{{"format", "isolation-forest"},
              {"version", ForestModel<double>::kFormatVersion},
              {"n_trees", model.n_trees},
              {"requested_subsample", model.requested_subsample},
              {"subsample_size", model.subsample_size},
              {"dims", model.dims},
              {"seed", model.seed},
              {"trees", trees}};
}

ForestModel<double> model_from_json(const Json& j) {
  if (j.at("format").get<std::string>() != "isolation-forest" ||
      j.at("version").get<int>() != ForestModel<double>::kFormatVersion) {
    throw std::invalid_argument("unsupported model document");
  }
  ForestModel<double> m;
  m.n_trees = j.at("n_trees").get<int>();
  m.requested_subsample = j.at("requested_subsample").get<int>();
  m.subsample_size = j.at("subsample_size").get<int>();
  m.dims = j.at("dims").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& t : j.at("trees")) {
    IsolationTree<double> tree;
    const auto dims = t.at("split_dim").get<std::vector<int>>();
    const auto values = t.at("split_value").get<std::vector<double>>();
    const auto left = t.at("left").get<std::vector<int>>();
    const auto right = t.at("right").get<std::vector<int>>();
    const auto size = t.at("size").get<std::vector<int>>();
    for (std::size_t i = 0; i < dims.size(); ++i) {
      tree.nodes.push_back({dims[i], values[i], left[i], right[i], size[i]});
    }
    m.trees.push_back(std::move(tree));
  }
  if (static_cast<int>(m.trees.size()) != m.n_trees) throw std::invalid_argument("tree count mismatch");
  return m;
}

}  // namespace wlan
