#pragma once

// Record builders shared by the unit tests.

#include <string>

#include "wlan/domain.hpp"

namespace wlan::testing {

inline const LocalZone kZone{};

/// UTC instant of local wall-clock time on `day`.
inline Timestamp at(Date day, int hour, int minute = 0, int second = 0) {
  return kZone.local_midnight(day) + (hour * 3600 + minute * 60 + second);
}

inline DeviceId device(int n) {
  DeviceId::Bytes b{};
  b[15] = static_cast<std::uint8_t>(n);
  b[14] = static_cast<std::uint8_t>(n >> 8);
  return DeviceId(b);
}

inline ApId ap(int n) { return ApId::from_number(n); }

inline SessionRecord rec(Timestamp ts, const DeviceId& dev, const ApId& a, EventKind kind) {
  SessionRecord r;
  r.ts = ts;
  r.device = dev;
  r.ap = a;
  r.kind = kind;
  return r;
}

inline SessionRecord assoc(Timestamp ts, const DeviceId& dev, const ApId& a) {
  return rec(ts, dev, a, EventKind::Assoc);
}

inline SessionRecord disassoc(Timestamp ts, const DeviceId& dev, const ApId& a, double minutes) {
  auto r = rec(ts, dev, a, EventKind::Disassoc);
  r.session_minutes = minutes;
  return r;
}

inline SessionRecord auth_fail(Timestamp ts, const DeviceId& dev, const ApId& a) {
  return rec(ts, dev, a, EventKind::AuthFail);
}

inline SessionRecord traffic(Timestamp ts, const DeviceId& dev, const ApId& a, Protocol p, std::uint64_t up,
                             std::uint64_t down) {
  auto r = rec(ts, dev, a, EventKind::TrafficSample);
  r.proto = p;
  r.bytes_up = up;
  r.bytes_down = down;
  return r;
}

inline SessionRecord health(Timestamp ts, const ApId& a, double latency, double loss) {
  auto r = rec(ts, device(0), a, EventKind::ApHealth);
  r.latency_ms = latency;
  r.loss_pct = loss;
  return r;
}

/// Assoc at `start` plus the matching Disassoc `minutes` later.
inline void session(std::vector<SessionRecord>& out, Timestamp start, double minutes, const DeviceId& dev,
                    const ApId& a) {
  out.push_back(assoc(start, dev, a));
  out.push_back(disassoc(start + static_cast<std::int64_t>(minutes * 60), dev, a, minutes));
}

}  // namespace wlan::testing
