#include "wlan/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "wlan/rng.hpp"

namespace wlan {

namespace {

// RNG stream ids under the run seed.
constexpr std::uint64_t kStreamDevices = 1;
constexpr std::uint64_t kStreamPlan = 2;
constexpr std::uint64_t kStreamInject = 3;
constexpr std::uint64_t kStreamDayBase = 1000;

// Top of the AP table, in monthly connections; the tail decays from
// kTailHead geometrically.
constexpr std::array<std::pair<int, double>, 10> kHotspots = {{{104, 15240},
                                                              {100, 13950},
                                                              {106, 12870},
                                                              {109, 11220},
                                                              {101, 10980},
                                                              {105, 9860},
                                                              {102, 8900},
                                                              {103, 8100},
                                                              {107, 7400},
                                                              {108, 6700}}};
constexpr double kTailHead = 2600.0;
constexpr double kTailDecay = 0.97;
constexpr int kFirstAp = 100;

MacAddress random_mac(Rng& rng, std::uint8_t prefix) {
  MacAddress::Bytes b{};
  b[0] = prefix;
  const std::uint64_t x = rng.next();
  for (std::size_t i = 1; i < b.size(); ++i) b[i] = static_cast<std::uint8_t>(x >> (8 * (i - 1)));
  return MacAddress(b);
}

// Locally administered, unicast.
constexpr std::uint8_t kPoolPrefix = 0x02;
constexpr std::uint8_t kInjectPrefix = 0x0a;
constexpr std::uint8_t kBssidPrefix = 0x0e;

class WeightedPicker {
 public:
  explicit WeightedPicker(const std::vector<double>& weights) : cumulative_(weights.size()) {
    std::partial_sum(weights.begin(), weights.end(), cumulative_.begin());
  }
  std::size_t operator()(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

TraceRecord base_record(Timestamp ts, const MacAddress& mac, const ApId& ap, EventKind kind) {
  TraceRecord r;
  r.ts = ts;
  r.device = mac;
  r.ap = ap;
  r.kind = kind;
  return r;
}

/// Splits `total` bytes over the protocols by `mix` with lognormal jitter.
void emit_traffic(std::vector<TraceRecord>& out, Timestamp ts, const MacAddress& mac, const ApId& ap,
                  double total, const std::array<double, kProtocolCount>& mix, double jitter, Rng& rng) {
  std::array<double, kProtocolCount> w{};
  double sum = 0.0;
  for (std::size_t p = 0; p < kProtocolCount; ++p) {
    w[p] = mix[p] * std::exp(jitter * rng.normal());
    sum += w[p];
  }
  for (std::size_t p = 0; p < kProtocolCount; ++p) {
    const double bytes = std::max(0.0, std::round(total * w[p] / sum));
    const double up_share = rng.uniform(0.10, 0.20);
    auto r = base_record(ts, mac, ap, EventKind::TrafficSample);
    r.proto = kProtocols[p];
    r.bytes_up = static_cast<std::uint64_t>(std::round(bytes * up_share));
    r.bytes_down = static_cast<std::uint64_t>(bytes) - *r.bytes_up;
    out.push_back(std::move(r));
  }
}

/// Assoc at `start`, traffic and Disassoc at the end.
void emit_session(std::vector<TraceRecord>& out, Timestamp start, std::int64_t seconds,
                  const MacAddress& mac, const ApId& ap, double bytes,
                  const std::array<double, kProtocolCount>& mix, double jitter, Rng& rng) {
  out.push_back(base_record(start, mac, ap, EventKind::Assoc));
  const Timestamp end = start + seconds;
  emit_traffic(out, end, mac, ap, bytes, mix, jitter, rng);
  auto d = base_record(end, mac, ap, EventKind::Disassoc);
  d.session_minutes = static_cast<double>(seconds) / 60.0;
  out.push_back(std::move(d));
}

void sort_by_ts(std::vector<TraceRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) { return a.ts < b.ts; });
}

double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw InvalidConfig("bad value for " + std::string(key) + ": " + std::string(text));
  }
  return v;
}

}  // namespace

std::vector<double> hotspot_weights(int ap_count) {
  std::vector<double> w(static_cast<std::size_t>(std::max(ap_count, 0)), 0.0);
  for (int i = 0; i < ap_count; ++i) {
    const int number = kFirstAp + i;
    const auto hot = std::find_if(kHotspots.begin(), kHotspots.end(),
                                  [&](const auto& h) { return h.first == number; });
    w[static_cast<std::size_t>(i)] =
        hot != kHotspots.end() ? hot->second : kTailHead * std::pow(kTailDecay, number - 110);
  }
  return w;
}

void SimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidConfig(what);
  };
  require(days >= 7, "days must be >= 7");
  require(ap_count >= 1, "ap_count must be >= 1");
  require(weekday_users > 0 && weekend_users > 0, "daily user means must be positive");
  require(day_noise_sigma >= 0, "day_noise_sigma must be >= 0");
  require(session_median_minutes > 0 && session_median_minutes <= kMaxSessionMinutes,
          "session_median_minutes out of range");
  require(session_sigma >= 0, "session_sigma must be >= 0");
  require(short_drop_fraction >= 0 && short_drop_fraction < 1, "short_drop_fraction out of range");
  require(peak_lo_hour >= 0 && peak_lo_hour <= peak_hi_hour && peak_hi_hour < 24, "peak hours out of range");
  require(peak_sd_hours > 0, "peak_sd_hours must be positive");
  require(background_fraction >= 0 && background_fraction <= 1, "background_fraction out of range");
  require(open_hour >= 0 && open_hour < close_hour && close_hour <= 23, "open/close hours out of range");
  require(auth_fail_mean > 0, "auth_fail_mean must be positive");
  require(bytes_median > 0 && bytes_sigma >= 0 && proto_jitter_sigma >= 0, "traffic parameters out of range");
  double mix = 0.0;
  for (double p : proto_mix) {
    require(p >= 0, "proto_mix entries must be >= 0");
    mix += p;
  }
  require(std::abs(mix - 1.0) < 1e-9, "proto_mix must sum to 1");
  require(device_pool >= 1, "device_pool must be >= 1");
  require(anomaly_rate >= 0, "anomaly_rate must be >= 0");
  require(anomaly_min >= 0 && anomaly_min <= anomaly_max, "anomaly_min/max out of range");
  double inj = 0.0;
  for (double p : injection_mix) {
    require(p >= 0, "injection_mix entries must be >= 0");
    inj += p;
  }
  require(inj > 0, "injection_mix must have a positive entry");
}

void SimConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw InvalidConfig("expected key=value: " + std::string(assignment));
  const auto key = assignment.substr(0, eq);
  const auto value = assignment.substr(eq + 1);

  if (key == "start") {
    const auto d = Date::parse(value);
    if (!d) throw InvalidConfig("bad value for start: " + std::string(value));
    start = *d;
    return;
  }
  const double v = parse_number(key, value);
  auto integer = [&]() {
    if (v != std::floor(v) || std::abs(v) > 1e9) throw InvalidConfig(std::string(key) + " must be an integer");
    return static_cast<int>(v);
  };
  const std::map<std::string_view, double*> reals = {
      {"weekday_users", &weekday_users},
      {"weekend_users", &weekend_users},
      {"day_noise_sigma", &day_noise_sigma},
      {"session_median_minutes", &session_median_minutes},
      {"session_sigma", &session_sigma},
      {"short_drop_fraction", &short_drop_fraction},
      {"peak_lo_hour", &peak_lo_hour},
      {"peak_hi_hour", &peak_hi_hour},
      {"peak_sd_hours", &peak_sd_hours},
      {"background_fraction", &background_fraction},
      {"open_hour", &open_hour},
      {"close_hour", &close_hour},
      {"auth_fail_mean", &auth_fail_mean},
      {"bytes_median", &bytes_median},
      {"bytes_sigma", &bytes_sigma},
      {"proto_jitter_sigma", &proto_jitter_sigma},
      {"anomaly_rate", &anomaly_rate},
      {"proto_http", &proto_mix[0]},
      {"proto_https", &proto_mix[1]},
      {"proto_dns", &proto_mix[2]},
      {"proto_udp", &proto_mix[3]},
      {"proto_other", &proto_mix[4]},
  };
  const std::map<std::string_view, int*> ints = {
      {"days", &days},
      {"ap_count", &ap_count},
      {"device_pool", &device_pool},
      {"anomaly_min", &anomaly_min},
      {"anomaly_max", &anomaly_max},
  };
  if (auto it = reals.find(key); it != reals.end()) {
    *it->second = v;
  } else if (auto jt = ints.find(key); jt != ints.end()) {
    *jt->second = integer();
  } else {
    throw InvalidConfig("unknown config key: " + std::string(key));
  }
}

SimOutput inject_anomalies(std::span<const TraceRecord> records, const InjectionSpec& spec,
                           std::uint64_t seed) {
  // APs present in the input, for injections without a fixed AP.
  std::vector<ApId> aps;
  for (const auto& r : records) aps.push_back(r.ap);
  std::sort(aps.begin(), aps.end());
  aps.erase(std::unique(aps.begin(), aps.end()), aps.end());
  if (aps.empty()) aps.push_back(ApId::from_number(kFirstAp));

  const std::array<double, kProtocolCount> normal_mix = {
      0.08, 1.0 - 0.08 - spec.dns_base_share - 0.15 - 0.10, spec.dns_base_share, 0.15, 0.10};
  const double jitter = 0.2;

  SimOutput out;
  std::vector<TraceRecord> extra;
  for (std::size_t i = 0; i < spec.injections.size(); ++i) {
    const Injection& inj = spec.injections[i];
    Rng rng(Rng::derive(seed, i));
    const ApId ap = inj.ap ? *inj.ap : aps[static_cast<std::size_t>(rng.below(aps.size()))];
    // Injected activity happens during working hours.
    const Timestamp at =
        spec.zone.local_midnight(inj.day) + static_cast<std::int64_t>(rng.uniform(8.0, 18.0) * 3600.0);
    auto session_bytes = [&] { return rng.lognormal_median(spec.reference_session_bytes, 0.3); };
    auto session_seconds = [&] { return static_cast<std::int64_t>(rng.uniform(30.0, 60.0) * 60.0); };

    GroundTruthEntry truth;
    truth.day = inj.day;
    truth.type = inj.type;
    truth.magnitude = inj.magnitude;
    truth.aps.push_back(ap);

    switch (inj.type) {
      case AnomalyType::AuthBurst: {
        const MacAddress mac = random_mac(rng, kInjectPrefix);
        truth.devices.push_back(mac);
        const auto n = static_cast<std::int64_t>(std::llround(inj.magnitude));
        std::int64_t t = 0;
        for (std::int64_t k = 0; k < n; ++k) {
          extra.push_back(base_record(at + t, mac, ap, EventKind::AuthFail));
          t += rng.between(2, 20);
        }
        break;
      }
      case AnomalyType::DnsAnomaly: {
        // Extra DNS bytes x lift a device's share from b to s = m * b:
        // (b T + x) / (T + x) = s.
        const double share = std::min(0.95, inj.magnitude * spec.dns_base_share);
        for (int d = 0; d < std::max(inj.count, 1); ++d) {
          const MacAddress mac = random_mac(rng, kInjectPrefix);
          truth.devices.push_back(mac);
          const Timestamp start = at + rng.between(0, 1800);
          const std::int64_t seconds = session_seconds();
          const double bytes = session_bytes();
          emit_session(extra, start, seconds, mac, ap, bytes, normal_mix, jitter, rng);
          const double dns = std::round(bytes * (share - spec.dns_base_share) / (1.0 - share));
          auto r = base_record(start + seconds, mac, ap, EventKind::TrafficSample);
          r.proto = Protocol::Dns;
          r.bytes_up = static_cast<std::uint64_t>(std::round(dns * 0.5));
          r.bytes_down = static_cast<std::uint64_t>(dns) - *r.bytes_up;
          extra.push_back(std::move(r));
        }
        break;
      }
      case AnomalyType::SimultaneousConnections: {
        const MacAddress mac = random_mac(rng, kInjectPrefix);
        truth.devices.push_back(mac);
        const auto n = std::max<std::int64_t>(2, std::llround(inj.magnitude));
        for (std::int64_t k = 0; k < n; ++k) {
          // Staggered starts inside the first session keep all of them open at once.
          emit_session(extra, at + 60 * k, session_seconds(), mac, ap, session_bytes(), normal_mix, jitter, rng);
        }
        break;
      }
      case AnomalyType::DuplicateDevice: {
        const MacAddress mac = random_mac(rng, kInjectPrefix);
        truth.devices.push_back(mac);
        const auto n = std::clamp<std::int64_t>(std::llround(inj.magnitude), 2,
                                                static_cast<std::int64_t>(aps.size()));
        std::vector<ApId> used = {ap};
        while (static_cast<std::int64_t>(used.size()) < n) {
          const ApId& other = aps[static_cast<std::size_t>(rng.below(aps.size()))];
          if (std::find(used.begin(), used.end(), other) == used.end()) used.push_back(other);
        }
        for (std::size_t k = 0; k < used.size(); ++k) {
          emit_session(extra, at + 120 * static_cast<std::int64_t>(k), session_seconds(), mac, used[k],
                       session_bytes(), normal_mix, jitter, rng);
        }
        truth.aps = used;
        break;
      }
      case AnomalyType::TrafficSpike: {
        const MacAddress mac = random_mac(rng, kInjectPrefix);
        truth.devices.push_back(mac);
        emit_session(extra, at, session_seconds() * 2, mac, ap,
                     inj.magnitude * spec.reference_session_bytes, normal_mix, jitter, rng);
        break;
      }
      default:
        throw std::invalid_argument("type cannot be injected: " + std::string(to_string(inj.type)));
    }
    out.truth.entries.push_back(std::move(truth));
  }

  sort_by_ts(extra);
  out.records.reserve(records.size() + extra.size());
  std::merge(records.begin(), records.end(), extra.begin(), extra.end(), std::back_inserter(out.records),
             [](const TraceRecord& a, const TraceRecord& b) { return a.ts < b.ts; });
  return out;
}

SimOutput generate_month(const SimConfig& config, std::uint64_t seed) {
  config.validate();

  std::vector<MacAddress> pool;
  {
    Rng rng(Rng::derive(seed, kStreamDevices));
    pool.reserve(static_cast<std::size_t>(config.device_pool));
    for (int i = 0; i < config.device_pool; ++i) pool.push_back(random_mac(rng, kPoolPrefix));
  }
  std::vector<Timestamp> busy_until(pool.size(), Timestamp{std::numeric_limits<std::int64_t>::min()});

  std::vector<ApId> aps;
  for (int i = 0; i < config.ap_count; ++i) aps.push_back(ApId::from_number(kFirstAp + i));
  const auto weights = hotspot_weights(config.ap_count);
  const WeightedPicker pick_ap(weights);
  const double max_weight = *std::max_element(weights.begin(), weights.end());
  // Health samples are reported under the AP's own radio address.
  std::vector<MacAddress> bssids;
  for (int i = 0; i < config.ap_count; ++i) {
    bssids.push_back(MacAddress({kBssidPrefix, 0, 0, 0, static_cast<std::uint8_t>(i >> 8),
                                 static_cast<std::uint8_t>(i & 0xff)}));
  }

  std::vector<TraceRecord> records;
  for (int day_index = 0; day_index < config.days; ++day_index) {
    Rng rng(Rng::derive(seed, kStreamDayBase + static_cast<std::uint64_t>(day_index)));
    const Date day = config.start + day_index;
    const Timestamp midnight = config.zone.local_midnight(day);
    const Timestamp next_midnight = config.zone.local_midnight(day + 1);
    const double center = rng.uniform(config.peak_lo_hour, config.peak_hi_hour);

    auto arrival_hour = [&] {
      if (rng.bernoulli(config.background_fraction)) return rng.uniform(config.open_hour, config.close_hour);
      for (;;) {
        const double h = rng.normal(center, config.peak_sd_hours);
        if (h >= config.open_hour - 1.0 && h < config.close_hour + 1.0) return h;
      }
    };

    const double mean = day.is_weekend() ? config.weekend_users : config.weekday_users;
    const auto sessions = static_cast<std::int64_t>(
        std::llround(rng.lognormal_median(mean, config.day_noise_sigma)));
    std::vector<std::int64_t> starts;
    starts.reserve(static_cast<std::size_t>(sessions));
    for (std::int64_t s = 0; s < sessions; ++s) {
      starts.push_back(static_cast<std::int64_t>(arrival_hour() * 3600.0));
    }
    std::sort(starts.begin(), starts.end());

    std::vector<std::int64_t> ap_sessions(aps.size(), 0);
    for (const std::int64_t offset : starts) {
      const Timestamp start = midnight + offset;
      double minutes = rng.bernoulli(config.short_drop_fraction)
                           ? rng.uniform(0.2, 0.95)
                           : std::clamp(rng.lognormal_median(config.session_median_minutes, config.session_sigma),
                                        1.0, kMaxSessionMinutes);
      std::int64_t seconds = std::max<std::int64_t>(1, std::llround(minutes * 60.0));
      // Sessions close by local midnight so every day stays self-contained.
      seconds = std::min(seconds, next_midnight.seconds - 1 - start.seconds);

      std::size_t device = static_cast<std::size_t>(rng.below(pool.size()));
      for (int attempt = 0; attempt < 64 && busy_until[device] > start; ++attempt) {
        device = static_cast<std::size_t>(rng.below(pool.size()));
      }
      if (busy_until[device] > start) continue;  // pool exhausted at this instant
      busy_until[device] = start + seconds;

      const std::size_t ap = pick_ap(rng);
      ++ap_sessions[ap];
      const double bytes = rng.lognormal_median(config.bytes_median, config.bytes_sigma);
      emit_session(records, start, seconds, pool[device], aps[ap], bytes, config.proto_mix,
                   config.proto_jitter_sigma, rng);
    }

    // Background authentication failures in episodes of one to three.
    std::int64_t failures = rng.poisson(config.auth_fail_mean);
    while (failures > 0) {
      const std::int64_t episode = std::min<std::int64_t>(failures, rng.between(1, 3));
      failures -= episode;
      const MacAddress& mac = pool[static_cast<std::size_t>(rng.below(pool.size()))];
      const ApId& ap = aps[pick_ap(rng)];
      Timestamp t = midnight + static_cast<std::int64_t>(arrival_hour() * 3600.0);
      for (std::int64_t k = 0; k < episode; ++k) {
        records.push_back(base_record(t, mac, ap, EventKind::AuthFail));
        t = t + rng.between(5, 30);
      }
    }

    // One health sample per AP late in the day; worse with relative load.
    for (std::size_t a = 0; a < aps.size(); ++a) {
      const double load = weights[a] / max_weight;
      auto r = base_record(midnight + 23 * 3600, bssids[a], aps[a], EventKind::ApHealth);
      r.latency_ms = std::round(std::clamp(25.0 + 20.0 * load + rng.normal(0.0, 1.5), 25.0, 45.0) * 10.0) / 10.0;
      r.loss_pct = std::round(std::clamp(0.5 + 1.3 * load + rng.normal(0.0, 0.1), 0.5, 1.8) * 100.0) / 100.0;
      records.push_back(std::move(r));
    }
  }
  sort_by_ts(records);

  InjectionSpec spec;
  spec.zone = config.zone;
  spec.reference_session_bytes = config.bytes_median;
  spec.dns_base_share = config.proto_mix[static_cast<std::size_t>(Protocol::Dns)];
  if (config.anomaly_rate > 0) {
    Rng rng(Rng::derive(seed, kStreamPlan));
    const WeightedPicker pick_type(std::vector<double>(config.injection_mix.begin(), config.injection_mix.end()));
    const double per_ap_failures = config.auth_fail_mean / config.ap_count;
    for (int day_index = 0; day_index < config.days; ++day_index) {
      const auto n = std::clamp<std::int64_t>(rng.poisson(config.anomaly_rate), config.anomaly_min,
                                              config.anomaly_max);
      for (std::int64_t k = 0; k < n; ++k) {
        Injection inj;
        inj.day = config.start + day_index;
        inj.type = kInjectableTypes[pick_type(rng)];
        switch (inj.type) {
          case AnomalyType::AuthBurst:
            inj.magnitude = std::max(10.0, std::round(rng.uniform(5.0, 20.0) * per_ap_failures));
            break;
          case AnomalyType::DnsAnomaly:
            inj.magnitude = rng.uniform(3.0, 8.0);
            inj.count = static_cast<int>(rng.between(3, 10));
            break;
          case AnomalyType::SimultaneousConnections:
            inj.magnitude = static_cast<double>(rng.between(4, 6));
            break;
          case AnomalyType::DuplicateDevice:
            inj.magnitude = 2.0;
            break;
          default:
            inj.magnitude = rng.uniform(60.0, 200.0);
            break;
        }
        spec.injections.push_back(std::move(inj));
      }
    }
  }
  return inject_anomalies(records, spec, Rng::derive(seed, kStreamInject));
}

void write_traces(std::ostream& out, std::span<const TraceRecord> records) {
  for (const auto& r : records) out << encode_line(r) << '\n';
}

Json truth_to_json(const GroundTruth& truth) {
  Json entries = Json::array();
  for (const auto& e : truth.entries) {
    Json devices = Json::array();
    for (const auto& d : e.devices) devices.push_back(d.str());
    Json aps = Json::array();
    for (const auto& a : e.aps) aps.push_back(a.str());
    entries.push_back(Json{{"day", e.day.iso()},
                           {"type", to_string(e.type)},
                           {"devices", devices},
                           {"aps", aps},
                           {"magnitude", e.magnitude}});
  }
  return Json{{"injections", entries}};
}

GroundTruth truth_from_json(const Json& j) {
  GroundTruth truth;
  for (const auto& e : j.at("injections")) {
    GroundTruthEntry entry;
    const auto day = Date::parse(e.at("day").get<std::string>());
    const auto type = parse_anomaly_type(e.at("type").get<std::string>());
    if (!day || !type) throw std::invalid_argument("bad ground truth entry");
    entry.day = *day;
    entry.type = *type;
    for (const auto& d : e.at("devices")) {
      const auto mac = MacAddress::parse(d.get<std::string>());
      if (!mac) throw std::invalid_argument("bad MAC in ground truth");
      entry.devices.push_back(*mac);
    }
    for (const auto& a : e.at("aps")) {
      const auto ap = ApId::parse(a.get<std::string>());
      if (!ap) throw std::invalid_argument("bad AP in ground truth");
      entry.aps.push_back(*ap);
    }
    entry.magnitude = e.at("magnitude").get<double>();
    truth.entries.push_back(std::move(entry));
  }
  return truth;
}

}  // namespace wlan
