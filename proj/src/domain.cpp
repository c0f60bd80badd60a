#include "wlan/domain.hpp"

#include <cmath>
#include <cstring>

namespace wlan {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

constexpr char kHexDigits[] = "0123456789abcdef";

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 5> kKindWire = {"assoc", "disassoc", "auth_fail", "traffic",
                                                       "ap_health"};
constexpr std::array<std::string_view, 5> kProtoWire = {"http", "https", "dns", "udp", "other"};
constexpr std::array<std::string_view, 5> kProtoDisplay = {"HTTP", "HTTPS", "DNS", "UDP", "OTHER"};
constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "connections",    "distinct_devices", "mean_session_minutes", "auth_failures",
    "unexpected_disconnects", "traffic_gb", "overload_pct",       "share_http",
    "share_https",    "share_dns",        "share_udp",            "share_other",
    "duplicate_device_events"};
constexpr std::array<std::string_view, 7> kTypeNames = {
    "AuthBurst",       "DnsAnomaly",   "SimultaneousConnections",
    "DuplicateDevice", "TrafficSpike", "ApOverload",
    "MultivariateOutlier"};
constexpr std::array<std::string_view, 3> kSeverityNames = {"Low", "Medium", "High"};
constexpr std::array<std::string_view, 4> kDetectorNames = {"Threshold", "IsolationForest",
                                                            "Dbscan", "Rule"};
constexpr std::array<std::string_view, 5> kActionNames = {
    "ChannelReassign", "LoadRedistribution", "Segmentation", "AuthPolicyReview",
    "CapacityExpansion"};

}  // namespace

std::optional<DeviceId> DeviceId::from_hex(std::string_view hex) {
  if (hex.size() != 32) return std::nullopt;
  Bytes bytes{};
  for (std::size_t i = 0; i < 16; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    // Rendering is lowercase only; uppercase input is not a canonical id.
    if ((hex[2 * i] >= 'A' && hex[2 * i] <= 'F') || (hex[2 * i + 1] >= 'A' && hex[2 * i + 1] <= 'F')) {
      return std::nullopt;
    }
    bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return DeviceId(bytes);
}

std::string DeviceId::hex() const {
  std::string out(32, '0');
  for (std::size_t i = 0; i < 16; ++i) {
    out[2 * i] = kHexDigits[bytes_[i] >> 4];
    out[2 * i + 1] = kHexDigits[bytes_[i] & 0xF];
  }
  return out;
}

std::optional<MacAddress> MacAddress::parse(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  Bytes bytes{};
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t p = i * 3;
    if (i > 0 && text[p - 1] != ':') return std::nullopt;
    const int hi = hex_value(text[p]);
    const int lo = hex_value(text[p + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return MacAddress(bytes);
}

std::string MacAddress::str() const {
  std::string out(17, ':');
  for (std::size_t i = 0; i < 6; ++i) {
    out[3 * i] = kHexDigits[bytes_[i] >> 4];
    out[3 * i + 1] = kHexDigits[bytes_[i] & 0xF];
  }
  return out;
}

std::optional<ApId> ApId::parse(std::string_view text) {
  if (text.size() < 4 || text.substr(0, 3) != "AP-") return std::nullopt;
  for (char c : text.substr(3)) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  return ApId(std::string(text));
}

std::size_t DeviceIdHash::operator()(const DeviceId& id) const noexcept {
  std::uint64_t h = 0;
  std::memcpy(&h, id.bytes().data(), sizeof h);
  return static_cast<std::size_t>(h);
}

std::size_t MacAddressHash::operator()(const MacAddress& mac) const noexcept {
  std::uint64_t h = 0;
  std::memcpy(&h, mac.bytes().data(), 6);
  return static_cast<std::size_t>(h * 0x9E3779B97F4A7C15ULL);
}

std::string_view to_wire(EventKind kind) { return kKindWire[static_cast<std::size_t>(kind)]; }
std::optional<EventKind> parse_event_kind(std::string_view wire) {
  return lookup<EventKind>(kKindWire, wire);
}
std::string_view to_wire(Protocol proto) { return kProtoWire[static_cast<std::size_t>(proto)]; }
std::optional<Protocol> parse_protocol(std::string_view wire) {
  return lookup<Protocol>(kProtoWire, wire);
}
std::string_view display_name(Protocol proto) {
  return kProtoDisplay[static_cast<std::size_t>(proto)];
}

ValidationError::ValidationError(Kind kind, std::string field, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " [" + field + "]: " + detail),
      kind_(kind),
      field_(std::move(field)) {}

std::string_view to_string(ValidationError::Kind kind) {
  switch (kind) {
    case ValidationError::Kind::FieldMissing: return "FieldMissing";
    case ValidationError::Kind::FieldOutOfRange: return "FieldOutOfRange";
    case ValidationError::Kind::UnknownEventKind: return "UnknownEventKind";
  }
  return "?";
}

namespace {

using VK = ValidationError::Kind;

template <typename T>
const T& require(const std::optional<T>& field, const char* name) {
  if (!field) throw ValidationError(VK::FieldMissing, name, "required for this kind");
  return *field;
}

template <typename T>
void forbid(const std::optional<T>& field, const char* name) {
  if (field) throw ValidationError(VK::FieldOutOfRange, name, "not applicable to this kind");
}

std::uint64_t byte_count(double v, const char* name) {
  // 2^53: every integer below is exactly representable in the raw double.
  if (!std::isfinite(v) || v < 0.0 || v >= 9007199254740992.0 || std::floor(v) != v) {
    throw ValidationError(VK::FieldOutOfRange, name, "must be a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace

SessionRecord validate(const RawRecord& raw, const ObservationWindow& window) {
  SessionRecord rec;

  const auto ts = parse_rfc3339(require(raw.ts, "ts"));
  if (!ts) throw ValidationError(VK::FieldOutOfRange, "ts", "not an RFC3339 timestamp");
  if (!window.contains(*ts)) {
    throw ValidationError(VK::FieldOutOfRange, "ts", "outside the observation window");
  }
  rec.ts = *ts;

  const auto device = DeviceId::from_hex(require(raw.device, "device"));
  if (!device) throw ValidationError(VK::FieldOutOfRange, "device", "not a 32-hex device id");
  rec.device = *device;

  const auto ap = ApId::parse(require(raw.ap, "ap"));
  if (!ap) throw ValidationError(VK::FieldOutOfRange, "ap", "expected AP-<digits>");
  rec.ap = *ap;

  const auto kind = parse_event_kind(require(raw.kind, "kind"));
  if (!kind) throw ValidationError(VK::UnknownEventKind, "kind", "'" + *raw.kind + "'");
  rec.kind = *kind;

  const bool is_disassoc = rec.kind == EventKind::Disassoc;
  const bool is_traffic = rec.kind == EventKind::TrafficSample;
  const bool is_health = rec.kind == EventKind::ApHealth;

  if (is_disassoc) {
    const double m = require(raw.session_minutes, "session_minutes");
    if (!std::isfinite(m) || m < 0.0 || m > kMaxSessionMinutes) {
      throw ValidationError(VK::FieldOutOfRange, "session_minutes", "must lie in [0, 1440]");
    }
    rec.session_minutes = m;
  } else {
    forbid(raw.session_minutes, "session_minutes");
  }

  if (is_traffic) {
    rec.bytes_up = byte_count(require(raw.bytes_up, "bytes_up"), "bytes_up");
    rec.bytes_down = byte_count(require(raw.bytes_down, "bytes_down"), "bytes_down");
    const auto proto = parse_protocol(require(raw.proto, "proto"));
    if (!proto) throw ValidationError(VK::FieldOutOfRange, "proto", "'" + *raw.proto + "'");
    rec.proto = *proto;
  } else {
    forbid(raw.bytes_up, "bytes_up");
    forbid(raw.bytes_down, "bytes_down");
    forbid(raw.proto, "proto");
  }

  if (is_health) {
    const double lat = require(raw.latency_ms, "latency_ms");
    if (!std::isfinite(lat) || lat < 0.0) {
      throw ValidationError(VK::FieldOutOfRange, "latency_ms", "must be non-negative");
    }
    const double loss = require(raw.loss_pct, "loss_pct");
    if (!std::isfinite(loss) || loss < 0.0 || loss > 100.0) {
      throw ValidationError(VK::FieldOutOfRange, "loss_pct", "must lie in [0, 100]");
    }
    rec.latency_ms = lat;
    rec.loss_pct = loss;
  } else {
    forbid(raw.latency_ms, "latency_ms");
    forbid(raw.loss_pct, "loss_pct");
  }
  return rec;
}

RawRecord to_raw(const SessionRecord& r) {
  RawRecord raw;
  raw.ts = format_rfc3339(r.ts);
  raw.device = r.device.hex();
  raw.ap = r.ap.str();
  raw.kind = std::string(to_wire(r.kind));
  raw.session_minutes = r.session_minutes;
  if (r.bytes_up) raw.bytes_up = static_cast<double>(*r.bytes_up);
  if (r.bytes_down) raw.bytes_down = static_cast<double>(*r.bytes_down);
  if (r.proto) raw.proto = std::string(to_wire(*r.proto));
  raw.latency_ms = r.latency_ms;
  raw.loss_pct = r.loss_pct;
  return raw;
}

std::string_view metric_name(Metric m) { return kMetricNames[static_cast<std::size_t>(m)]; }
std::optional<Metric> parse_metric(std::string_view name) {
  return lookup<Metric>(kMetricNames, name);
}

Metric share_metric(Protocol p) {
  return static_cast<Metric>(static_cast<int>(Metric::ShareHttp) + static_cast<int>(p));
}

double metric_value(const DailyAggregate& a, Metric m) {
  switch (m) {
    case Metric::Connections: return static_cast<double>(a.connections);
    case Metric::DistinctDevices: return static_cast<double>(a.distinct_devices);
    case Metric::MeanSessionMinutes: return a.mean_session_minutes;
    case Metric::AuthFailures: return static_cast<double>(a.auth_failures);
    case Metric::UnexpectedDisconnects: return static_cast<double>(a.unexpected_disconnects);
    case Metric::TrafficGb: return a.traffic_gb;
    case Metric::OverloadPct: return a.overload_pct;
    case Metric::ShareHttp: return a.proto_share[Protocol::Http];
    case Metric::ShareHttps: return a.proto_share[Protocol::Https];
    case Metric::ShareDns: return a.proto_share[Protocol::Dns];
    case Metric::ShareUdp: return a.proto_share[Protocol::Udp];
    case Metric::ShareOther: return a.proto_share[Protocol::Other];
    case Metric::DuplicateDeviceEvents: return static_cast<double>(a.duplicate_device_events);
  }
  return 0.0;
}

std::string_view to_string(AnomalyType t) { return kTypeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(Severity s) { return kSeverityNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(Detector d) { return kDetectorNames[static_cast<std::size_t>(d)]; }
std::string_view to_string(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }
std::optional<AnomalyType> parse_anomaly_type(std::string_view s) {
  return lookup<AnomalyType>(kTypeNames, s);
}
std::optional<Severity> parse_severity(std::string_view s) {
  return lookup<Severity>(kSeverityNames, s);
}
std::optional<Detector> parse_detector(std::string_view s) {
  return lookup<Detector>(kDetectorNames, s);
}
std::optional<Action> parse_action(std::string_view s) { return lookup<Action>(kActionNames, s); }

}  // namespace wlan
