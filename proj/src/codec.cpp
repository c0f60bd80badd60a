#include "wlan/codec.hpp"

#include <stdexcept>

namespace wlan {

namespace {

template <typename Record>
std::string encode_record(const Record& r, const std::string& device) {
  Json j;
  j["ts"] = format_rfc3339(r.ts);
  j["device"] = device;
  j["ap"] = r.ap.str();
  j["kind"] = to_wire(r.kind);
  if (r.session_minutes) j["session_minutes"] = *r.session_minutes;
  if (r.bytes_up) j["bytes_up"] = *r.bytes_up;
  if (r.bytes_down) j["bytes_down"] = *r.bytes_down;
  if (r.proto) j["proto"] = to_wire(*r.proto);
  if (r.latency_ms) j["latency_ms"] = *r.latency_ms;
  if (r.loss_pct) j["loss_pct"] = *r.loss_pct;
  return j.dump();
}

Date date_field(const Json& j, const char* key) {
  auto d = Date::parse(j.at(key).get<std::string>());
  if (!d) throw std::invalid_argument(std::string("bad date in field ") + key);
  return *d;
}

Json metric_array_to_json(const MetricArray& a) {
  Json j = Json::object();
  for (int i = 0; i < kMetricCount; ++i) j[std::string(metric_name(static_cast<Metric>(i)))] = a[i];
  return j;
}

MetricArray metric_array_from_json(const Json& j) {
  MetricArray a = MetricArray::Zero();
  for (int i = 0; i < kMetricCount; ++i) {
    a[i] = j.at(std::string(metric_name(static_cast<Metric>(i)))).get<double>();
  }
  return a;
}

Json slot_to_json(const SlotStats& s) {
  return Json{{"days", s.days},
              {"fallback", s.fallback},
              {"mean", metric_array_to_json(s.mean)},
              {"stddev", metric_array_to_json(s.stddev)}};
}

SlotStats slot_from_json(const Json& j) {
  SlotStats s;
  s.days = j.at("days").get<int>();
  s.fallback = j.at("fallback").get<bool>();
  s.mean = metric_array_from_json(j.at("mean"));
  s.stddev = metric_array_from_json(j.at("stddev"));
  return s;
}

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

constexpr std::array<const char*, 7> kWeekdays = {"monday", "tuesday", "wednesday", "thursday",
                                                  "friday", "saturday", "sunday"};

}  // namespace

std::string encode_line(const SessionRecord& record) {
  return encode_record(record, record.device.hex());
}

std::string encode_line(const TraceRecord& record) {
  return encode_record(record, record.device.str());
}

void to_json(Json& j, const DailyAggregate& a) {
  Json shares = Json::object();
  for (Protocol p : kProtocols) shares[std::string(to_wire(p))] = a.proto_share[p];
  j = Json{{"day", a.day.iso()},
           {"connections", a.connections},
           {"distinct_devices", a.distinct_devices},
           {"mean_session_minutes", a.mean_session_minutes},
           {"auth_failures", a.auth_failures},
           {"unexpected_disconnects", a.unexpected_disconnects},
           {"traffic_gb", a.traffic_gb},
           {"overload_pct", a.overload_pct},
           {"proto_share", shares},
           {"duplicate_device_events", a.duplicate_device_events}};
}

void from_json(const Json& j, DailyAggregate& a) {
  a.day = date_field(j, "day");
  a.connections = j.at("connections").get<std::int64_t>();
  a.distinct_devices = j.at("distinct_devices").get<std::int64_t>();
  a.mean_session_minutes = j.at("mean_session_minutes").get<double>();
  a.auth_failures = j.at("auth_failures").get<std::int64_t>();
  a.unexpected_disconnects = j.at("unexpected_disconnects").get<std::int64_t>();
  a.traffic_gb = j.at("traffic_gb").get<double>();
  a.overload_pct = j.at("overload_pct").get<double>();
  for (Protocol p : kProtocols) {
    a.proto_share[p] = j.at("proto_share").at(std::string(to_wire(p))).get<double>();
  }
  a.duplicate_device_events = j.at("duplicate_device_events").get<std::int64_t>();
}

void to_json(Json& j, const BaselineProfile& b) {
  Json slots = Json::object();
  for (std::size_t i = 0; i < 7; ++i) slots[kWeekdays[i]] = slot_to_json(b.slots[i]);
  j = Json{{"window_days", b.window_days},
           {"built_from", b.built_from.iso()},
           {"built_to", b.built_to.iso()},
           {"all_days", slot_to_json(b.all_days)},
           {"slots", slots}};
}

void from_json(const Json& j, BaselineProfile& b) {
  b.window_days = j.at("window_days").get<int>();
  b.built_from = date_field(j, "built_from");
  b.built_to = date_field(j, "built_to");
  b.all_days = slot_from_json(j.at("all_days"));
  for (std::size_t i = 0; i < 7; ++i) b.slots[i] = slot_from_json(j.at("slots").at(kWeekdays[i]));
}

void to_json(Json& j, const ApStats& s) {
  j = Json{{"ap", s.ap.str()},
           {"monthly_connections", s.monthly_connections},
           {"peak_concurrent", s.peak_concurrent}};
  put_optional(j, "mean_latency_ms", s.mean_latency_ms);
  put_optional(j, "mean_loss_pct", s.mean_loss_pct);
  j["overloaded_days"] = s.overloaded_days;
}

void from_json(const Json& j, ApStats& s) {
  auto ap = ApId::parse(j.at("ap").get<std::string>());
  if (!ap) throw std::invalid_argument("bad ap id");
  s.ap = *ap;
  s.monthly_connections = j.at("monthly_connections").get<std::int64_t>();
  s.peak_concurrent = j.at("peak_concurrent").get<std::int64_t>();
  s.mean_latency_ms = j.at("mean_latency_ms").is_null()
                          ? std::nullopt
                          : std::optional<double>(j.at("mean_latency_ms").get<double>());
  s.mean_loss_pct = j.at("mean_loss_pct").is_null()
                        ? std::nullopt
                        : std::optional<double>(j.at("mean_loss_pct").get<double>());
  s.overloaded_days = j.at("overloaded_days").get<std::int64_t>();
}

void to_json(Json& j, const AnomalyEvent& e) {
  Json values = Json::array();
  for (const auto& [name, v] : e.evidence.values) values.push_back(Json{{"name", name}, {"value", v}});
  j = Json{{"id", e.id},
           {"day", e.day.iso()},
           {"type", to_string(e.type)},
           {"severity", to_string(e.severity)},
           {"score", e.score},
           {"detector", to_string(e.detector)}};
  j["device"] = e.device ? Json(e.device->hex()) : Json(nullptr);
  j["ap"] = e.ap ? Json(e.ap->str()) : Json(nullptr);
  j["evidence"] = Json{{"text", e.evidence.text}, {"values", values}};
}

void from_json(const Json& j, AnomalyEvent& e) {
  e.id = j.at("id").get<std::uint32_t>();
  e.day = date_field(j, "day");
  auto type = parse_anomaly_type(j.at("type").get<std::string>());
  auto sev = parse_severity(j.at("severity").get<std::string>());
  auto det = parse_detector(j.at("detector").get<std::string>());
  if (!type || !sev || !det) throw std::invalid_argument("bad anomaly enumeration value");
  e.type = *type;
  e.severity = *sev;
  e.detector = *det;
  e.score = j.at("score").get<double>();
  e.device.reset();
  e.ap.reset();
  if (!j.at("device").is_null()) {
    e.device = DeviceId::from_hex(j.at("device").get<std::string>());
    if (!e.device) throw std::invalid_argument("bad device id");
  }
  if (!j.at("ap").is_null()) {
    e.ap = ApId::parse(j.at("ap").get<std::string>());
    if (!e.ap) throw std::invalid_argument("bad ap id");
  }
  e.evidence.text = j.at("evidence").at("text").get<std::string>();
  e.evidence.values.clear();
  for (const auto& v : j.at("evidence").at("values")) {
    e.evidence.values.emplace_back(v.at("name").get<std::string>(), v.at("value").get<double>());
  }
}

void to_json(Json& j, const Recommendation& r) {
  j = Json::object();
  j["target"] = r.target ? Json(r.target->str()) : Json("network");
  j["action"] = to_string(r.action);
  j["rationale"] = r.rationale;
  j["linked_events"] = r.linked_events;
}

void from_json(const Json& j, Recommendation& r) {
  const auto target = j.at("target").get<std::string>();
  r.target.reset();
  if (target != "network") {
    r.target = ApId::parse(target);
    if (!r.target) throw std::invalid_argument("bad recommendation target");
  }
  auto action = parse_action(j.at("action").get<std::string>());
  if (!action) throw std::invalid_argument("bad action");
  r.action = *action;
  r.rationale = j.at("rationale").get<std::string>();
  r.linked_events = j.at("linked_events").get<std::vector<std::uint32_t>>();
}

}  // namespace wlan
