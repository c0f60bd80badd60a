#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wlan/time.hpp"

namespace wlan {

// ---------------------------------------------------------------------------
// Identifiers

/// Anonymized device identity: 16 opaque bytes, rendered as 32 lowercase hex.
class DeviceId {
 public:
  using Bytes = std::array<std::uint8_t, 16>;

  DeviceId() = default;
  explicit DeviceId(const Bytes& bytes) : bytes_(bytes) {}

  static std::optional<DeviceId> from_hex(std::string_view hex);
  std::string hex() const;
  const Bytes& bytes() const { return bytes_; }

  auto operator<=>(const DeviceId&) const = default;

 private:
  Bytes bytes_{};
};

/// Raw 48-bit hardware address. Exists only upstream of anonymization.
class MacAddress {
 public:
  using Bytes = std::array<std::uint8_t, 6>;

  MacAddress() = default;
  explicit MacAddress(const Bytes& bytes) : bytes_(bytes) {}

  /// Six colon-separated hex octets, case-insensitive.
  static std::optional<MacAddress> parse(std::string_view text);
  /// Lowercase, colon-separated.
  std::string str() const;
  const Bytes& bytes() const { return bytes_; }

  auto operator<=>(const MacAddress&) const = default;

 private:
  Bytes bytes_{};
};

/// Access point label, `AP-` followed by one or more digits.
class ApId {
 public:
  ApId() = default;
  static std::optional<ApId> parse(std::string_view text);
  static ApId from_number(int n) { return ApId("AP-" + std::to_string(n)); }

  const std::string& str() const { return value_; }
  auto operator<=>(const ApId&) const = default;

 private:
  explicit ApId(std::string v) : value_(std::move(v)) {}
  std::string value_;
};

struct DeviceIdHash {
  std::size_t operator()(const DeviceId& id) const noexcept;
};
struct MacAddressHash {
  std::size_t operator()(const MacAddress& mac) const noexcept;
};

// ---------------------------------------------------------------------------
// Enumerations

enum class EventKind : std::uint8_t { Assoc, Disassoc, AuthFail, TrafficSample, ApHealth };
enum class Protocol : std::uint8_t { Http, Https, Dns, Udp, Other };

inline constexpr std::size_t kProtocolCount = 5;
inline constexpr std::array<Protocol, kProtocolCount> kProtocols = {
    Protocol::Http, Protocol::Https, Protocol::Dns, Protocol::Udp, Protocol::Other};

/// Wire names: assoc|disassoc|auth_fail|traffic|ap_health.
std::string_view to_wire(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view wire);
/// Wire names: http|https|dns|udp|other.
std::string_view to_wire(Protocol proto);
std::optional<Protocol> parse_protocol(std::string_view wire);
/// Display names: HTTP, HTTPS, DNS, UDP, OTHER.
std::string_view display_name(Protocol proto);

// ---------------------------------------------------------------------------
// Records

/// One controller event on one AP at one instant. Optional fields are
/// populated only for the kinds they apply to (see `validate`).
template <typename Identity>
struct BasicSessionRecord {
  Timestamp ts;
  Identity device;
  ApId ap;
  EventKind kind = EventKind::Assoc;
  std::optional<double> session_minutes;  // Disassoc
  std::optional<std::uint64_t> bytes_up;  // TrafficSample
  std::optional<std::uint64_t> bytes_down;
  std::optional<Protocol> proto;
  std::optional<double> latency_ms;  // ApHealth
  std::optional<double> loss_pct;

  bool operator==(const BasicSessionRecord&) const = default;
};

using SessionRecord = BasicSessionRecord<DeviceId>;
/// Simulator/export form, before anonymization.
using TraceRecord = BasicSessionRecord<MacAddress>;

/// A parsed but unvalidated line. Every field is optional so that missing
/// fields surface as validation errors, not parse errors.
struct RawRecord {
  std::size_t line_no = 0;
  std::optional<std::string> ts;
  std::optional<std::string> device;
  std::optional<std::string> ap;
  std::optional<std::string> kind;
  std::optional<double> session_minutes;
  std::optional<double> bytes_up;
  std::optional<double> bytes_down;
  std::optional<std::string> proto;
  std::optional<double> latency_ms;
  std::optional<double> loss_pct;
};

inline constexpr double kMaxSessionMinutes = 1440.0;

struct ObservationWindow {
  std::optional<Timestamp> begin;  // inclusive
  std::optional<Timestamp> end;    // exclusive

  bool contains(Timestamp ts) const {
    return (!begin || ts >= *begin) && (!end || ts < *end);
  }
};

class ValidationError : public std::runtime_error {
 public:
  enum class Kind { FieldMissing, FieldOutOfRange, UnknownEventKind };

  ValidationError(Kind kind, std::string field, const std::string& detail);

  Kind kind() const { return kind_; }
  const std::string& field() const { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

std::string_view to_string(ValidationError::Kind kind);

/// Checks every record invariant in a fixed order and throws a
/// ValidationError naming the first violation. `raw.device` must already be
/// a 32-hex DeviceId.
SessionRecord validate(const RawRecord& raw, const ObservationWindow& window = {});

/// Converts a typed record back into raw form (inverse of `validate`).
RawRecord to_raw(const SessionRecord& record);

// ---------------------------------------------------------------------------
// Aggregates

inline constexpr double kBytesPerGigabyte = 1e9;

/// Per-protocol fractions, indexed by Protocol.
struct ProtocolShares {
  std::array<double, kProtocolCount> values{};

  double operator[](Protocol p) const { return values[static_cast<std::size_t>(p)]; }
  double& operator[](Protocol p) { return values[static_cast<std::size_t>(p)]; }
  bool operator==(const ProtocolShares&) const = default;
};

struct DailyAggregate {
  Date day;
  std::int64_t connections = 0;
  std::int64_t distinct_devices = 0;
  double mean_session_minutes = 0.0;
  std::int64_t auth_failures = 0;
  std::int64_t unexpected_disconnects = 0;
  double traffic_gb = 0.0;
  double overload_pct = 0.0;
  ProtocolShares proto_share;
  std::int64_t duplicate_device_events = 0;

  bool operator==(const DailyAggregate&) const = default;
};

/// Every scalar metric a DailyAggregate carries, in a fixed order.
enum class Metric : std::uint8_t {
  Connections,
  DistinctDevices,
  MeanSessionMinutes,
  AuthFailures,
  UnexpectedDisconnects,
  TrafficGb,
  OverloadPct,
  ShareHttp,
  ShareHttps,
  ShareDns,
  ShareUdp,
  ShareOther,
  DuplicateDeviceEvents,
};
inline constexpr int kMetricCount = 13;

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);
double metric_value(const DailyAggregate& agg, Metric m);
Metric share_metric(Protocol p);

using MetricArray = Eigen::Array<double, kMetricCount, 1>;

/// Mean and sample standard deviation of every metric over one slot.
struct SlotStats {
  MetricArray mean = MetricArray::Zero();
  MetricArray stddev = MetricArray::Zero();
  int days = 0;
  /// True when the slot had too few days and carries the all-days statistics.
  bool fallback = false;
};

/// Day-of-week reference profile of normal behaviour.
struct BaselineProfile {
  std::array<SlotStats, 7> slots;  // Monday .. Sunday
  SlotStats all_days;
  int window_days = 0;
  Date built_from;
  Date built_to;

  const SlotStats& slot_for(Date d) const {
    return slots[static_cast<std::size_t>(d.weekday_index())];
  }
};

struct ApStats {
  ApId ap;
  std::int64_t monthly_connections = 0;
  std::int64_t peak_concurrent = 0;
  std::optional<double> mean_latency_ms;  // absent without ApHealth samples
  std::optional<double> mean_loss_pct;
  std::int64_t overloaded_days = 0;

  bool operator==(const ApStats&) const = default;
};

/// Mean concurrent connections at the top of each local hour.
using HourlyProfile = std::array<double, 24>;

// ---------------------------------------------------------------------------
// Anomalies and recommendations

enum class AnomalyType : std::uint8_t {
  AuthBurst,
  DnsAnomaly,
  SimultaneousConnections,
  DuplicateDevice,
  TrafficSpike,
  ApOverload,
  MultivariateOutlier,
};
inline constexpr std::array<AnomalyType, 7> kAnomalyTypes = {
    AnomalyType::AuthBurst,       AnomalyType::DnsAnomaly,   AnomalyType::SimultaneousConnections,
    AnomalyType::DuplicateDevice, AnomalyType::TrafficSpike, AnomalyType::ApOverload,
    AnomalyType::MultivariateOutlier};

enum class Severity : std::uint8_t { Low, Medium, High };
enum class Detector : std::uint8_t { Threshold, IsolationForest, Dbscan, Rule };

std::string_view to_string(AnomalyType t);
std::string_view to_string(Severity s);
std::string_view to_string(Detector d);
std::optional<AnomalyType> parse_anomaly_type(std::string_view s);
std::optional<Severity> parse_severity(std::string_view s);
std::optional<Detector> parse_detector(std::string_view s);

struct Evidence {
  std::string text;
  std::vector<std::pair<std::string, double>> values;

  bool operator==(const Evidence&) const = default;
};

struct AnomalyEvent {
  std::uint32_t id = 0;
  Date day;
  AnomalyType type = AnomalyType::MultivariateOutlier;
  Severity severity = Severity::Low;
  double score = 0.0;
  Detector detector = Detector::Threshold;
  /// Scope: a device, else an AP, else network-wide.
  std::optional<DeviceId> device;
  std::optional<ApId> ap;
  Evidence evidence;

  bool operator==(const AnomalyEvent&) const = default;
};

enum class Action : std::uint8_t {
  ChannelReassign,
  LoadRedistribution,
  Segmentation,
  AuthPolicyReview,
  CapacityExpansion,
};
std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view s);

struct Recommendation {
  std::optional<ApId> target;  // empty = network-wide
  Action action = Action::AuthPolicyReview;
  std::string rationale;
  std::vector<std::uint32_t> linked_events;  // AnomalyEvent ids

  bool operator==(const Recommendation&) const = default;
};

}  // namespace wlan
