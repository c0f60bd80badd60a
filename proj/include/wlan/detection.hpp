#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wlan/codec.hpp"
#include "wlan/domain.hpp"
#include "wlan/iforest.hpp"

namespace wlan {

struct DetectionConfig {
  LocalZone zone;
  /// Rolling window (days) and band width for threshold detectors.
  int window = 7;
  double k = 3.0;
  /// More overlapping sessions than this from one device is suspicious.
  int max_concurrent = 3;

  int n_trees = 100;
  int subsample = 64;
  std::uint64_t seed = 7;
  /// Isolation forest scores at or below this are not reported.
  double iforest_floor = 0.6;

  double dbscan_eps = 4.0;
  int dbscan_min_pts = 3;

  /// Entity screens. A device is flagged only when its value is both a
  /// k-sigma outlier against the day's robust population spread and at least
  /// the stated multiple of the population median.
  double dns_share_ratio = 2.5;
  std::uint64_t dns_min_device_bytes = 1'000'000;
  double heavy_hitter_ratio = 50.0;
  std::int64_t auth_burst_min = 8;
};

// ---------------------------------------------------------------------------
// Features

inline constexpr int kFeatureCount = 7;
/// Order of the feature vector components.
inline constexpr std::array<Metric, kFeatureCount> kFeatureMetrics = {
    Metric::Connections, Metric::MeanSessionMinutes, Metric::AuthFailures,
    Metric::TrafficGb,   Metric::OverloadPct,        Metric::ShareDns,
    Metric::DuplicateDeviceEvents};
inline constexpr double kStdFloor = 1e-9;

using FeatureValues = Eigen::Matrix<double, kFeatureCount, 1>;

struct FeatureVector {
  Date day;
  FeatureValues values = FeatureValues::Zero();
};

/// z-scores of the feature metrics against the baseline slot for the day.
FeatureVector feature_vector(const DailyAggregate& day, const BaselineProfile& baseline);
/// One row per feature vector.
Eigen::MatrixXd feature_matrix(std::span<const FeatureVector> features);

// ---------------------------------------------------------------------------
// Dynamic thresholds

class SeriesTooShort : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ThresholdHit {
  std::size_t index = 0;
  double value = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double score = 0.0;
};

/// For every t >= window: hit iff |x_t - mean| > k * sd over the `window`
/// preceding points (sample sd); when sd is 0, hit iff x_t != mean.
/// score = |x_t - mean| / max(sd, kStdFloor).
std::vector<ThresholdHit> threshold_hits(std::span<const double> series, int window, double k);

struct DailySeries {
  std::vector<Date> days;
  std::vector<double> values;
  Metric metric = Metric::Connections;
  AnomalyType type = AnomalyType::TrafficSpike;
};

DailySeries metric_series(std::span<const DailyAggregate> aggregates, Metric metric, AnomalyType type);

/// Network-wide Threshold events for a daily series; throws SeriesTooShort
/// when the series is not longer than the window.
std::vector<AnomalyEvent> dynamic_threshold_alerts(const DailySeries& series, int window, double k);

// ---------------------------------------------------------------------------
// Rule and entity detectors

/// SimultaneousConnections when a device holds more than `max_concurrent`
/// overlapping sessions; DuplicateDevice when its overlapping sessions span
/// two or more APs. At most one event of each type per device and local day.
std::vector<AnomalyEvent> detect_duplicate_devices(std::span<const SessionRecord> records,
                                                   int max_concurrent, const LocalZone& zone = {});

/// Per-protocol z-test of a day's traffic shares against the baseline slot.
/// DNS deviations are DnsAnomaly, others TrafficSpike. Zero-traffic days
/// yield nothing.
std::vector<AnomalyEvent> protocol_anomaly(Date day, const ProtocolShares& share,
                                           const BaselineProfile& baseline, double k);

/// Devices whose daily auth failures are a burst against the day's failing
/// population.
std::vector<AnomalyEvent> detect_auth_bursts(std::span<const SessionRecord> records,
                                             const DetectionConfig& config);

/// Device cohorts with an unusually high DNS share, one event per AP and day.
std::vector<AnomalyEvent> detect_dns_cohorts(std::span<const SessionRecord> records,
                                             const DetectionConfig& config);

/// Devices whose daily byte volume is far above the day's median device.
std::vector<AnomalyEvent> detect_heavy_hitters(std::span<const SessionRecord> records,
                                               const DetectionConfig& config);

/// One MultivariateOutlier event per day carrying its isolation score;
/// `classify` drops those at or below the floor.
std::vector<AnomalyEvent> isolation_forest_events(const ForestModel<double>& model,
                                                  std::span<const FeatureVector> features);

/// MultivariateOutlier events for days DBSCAN labels as noise.
std::vector<AnomalyEvent> dbscan_events(std::span<const FeatureVector> features, double eps,
                                        int min_pts);

// ---------------------------------------------------------------------------
// Classification

struct SeverityPolicy {
  double k = 3.0;
  double iforest_floor = 0.6;
  /// Rule events for the same device on this many consecutive days escalate.
  int recurrence_days = 3;
};

/// Assigns severity from detector and score and drops events below the
/// alerting floor. Output is sorted by (day, type, detector, scope, score)
/// with ids 0..n-1 in that order.
std::vector<AnomalyEvent> classify(std::vector<AnomalyEvent> detections,
                                   const SeverityPolicy& policy);

/// Orders events canonically without touching severities.
void sort_events(std::vector<AnomalyEvent>& events);

// ---------------------------------------------------------------------------
// Model persistence

Json model_to_json(const ForestModel<double>& model);
ForestModel<double> model_from_json(const Json& j);

}  // namespace wlan
