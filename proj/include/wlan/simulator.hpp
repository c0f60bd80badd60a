#pragma once

// Synthetic campus month: diurnal session arrivals over a hotspot-weighted
// AP inventory, per-protocol traffic, background auth failures, daily AP
// health, and labeled anomaly injections.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wlan/codec.hpp"
#include "wlan/domain.hpp"

namespace wlan {

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Calibration table. Every constant that shapes the generated month lives
/// here; `set` accepts the same names as key=value overrides.
struct SimConfig {
  Date start = Date::from_ymd(2025, 9, 1);
  int days = 30;
  int ap_count = 85;
  LocalZone zone;

  // Daily session volume: lognormal day noise around the weekday/weekend means.
  double weekday_users = 6400.0;
  double weekend_users = 4400.0;
  double day_noise_sigma = 0.06;

  // Session length in minutes, lognormal; a small share are sub-minute drops.
  double session_median_minutes = 44.0;
  double session_sigma = 0.35;
  double short_drop_fraction = 0.01;

  // Arrivals: a Gaussian bump centred uniformly in [peak_lo, peak_hi] local
  // hours, mixed with a flat background over [open_hour, close_hour].
  double peak_lo_hour = 10.5;
  double peak_hi_hour = 12.5;
  double peak_sd_hours = 1.0;
  double background_fraction = 0.15;
  double open_hour = 7.0;
  double close_hour = 20.0;

  double auth_fail_mean = 185.0;

  // Bytes per session, lognormal; split over protocols by proto_mix with
  // per-session jitter.
  double bytes_median = 110e6;
  double bytes_sigma = 0.8;
  double proto_jitter_sigma = 0.2;
  std::array<double, kProtocolCount> proto_mix = {0.08, 0.62, 0.05, 0.15, 0.10};  // kProtocols order

  int device_pool = 27000;

  // Injections per day: Poisson(anomaly_rate) clipped to [anomaly_min, anomaly_max].
  double anomaly_rate = 6.0;
  int anomaly_min = 1;
  int anomaly_max = 14;
  // Type mix in kInjectableTypes order.
  std::array<double, 5> injection_mix = {0.15, 0.20, 0.20, 0.25, 0.20};

  /// Throws InvalidConfig on a violated invariant.
  void validate() const;
  /// Applies one `key=value` override; throws InvalidConfig on unknown keys
  /// or bad values.
  void set(std::string_view assignment);
};

inline constexpr std::array<AnomalyType, 5> kInjectableTypes = {
    AnomalyType::AuthBurst, AnomalyType::DnsAnomaly, AnomalyType::SimultaneousConnections,
    AnomalyType::DuplicateDevice, AnomalyType::TrafficSpike};

/// Relative monthly-connection weight of every AP, AP-100 upwards.
std::vector<double> hotspot_weights(int ap_count);

/// One planned injection. `magnitude` is per type:
///   AuthBurst                failure events (exact)
///   DnsAnomaly               DNS share multiplier, over `count` devices
///   SimultaneousConnections  overlapping sessions of one device
///   DuplicateDevice          APs holding overlapping sessions of one device
///   TrafficSpike             multiple of the reference session volume
struct Injection {
  Date day;
  AnomalyType type = AnomalyType::AuthBurst;
  double magnitude = 0.0;
  int count = 1;
  std::optional<ApId> ap;  // drawn when absent
};

struct InjectionSpec {
  std::vector<Injection> injections;
  double reference_session_bytes = 110e6;
  double dns_base_share = 0.05;
  LocalZone zone;
};

struct GroundTruthEntry {
  Date day;
  AnomalyType type = AnomalyType::AuthBurst;
  std::vector<MacAddress> devices;
  std::vector<ApId> aps;
  double magnitude = 0.0;

  bool operator==(const GroundTruthEntry&) const = default;
};

struct GroundTruth {
  std::vector<GroundTruthEntry> entries;
  bool operator==(const GroundTruth&) const = default;
};

struct SimOutput {
  std::vector<TraceRecord> records;  // sorted by ts
  GroundTruth truth;
};

/// Superimposes the injections on `records` (sorted by ts). The originals
/// are kept unchanged and in order; injected records are merged in by ts,
/// after originals at equal instants.
SimOutput inject_anomalies(std::span<const TraceRecord> records, const InjectionSpec& spec,
                           std::uint64_t seed);

/// Deterministic in (config, seed).
SimOutput generate_month(const SimConfig& config, std::uint64_t seed);

void write_traces(std::ostream& out, std::span<const TraceRecord> records);
Json truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const Json& j);

}  // namespace wlan
