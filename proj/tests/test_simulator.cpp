#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "wlan/codec.hpp"
#include "wlan/simulator.hpp"

using namespace wlan;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.days = 14;
  c.ap_count = 20;
  c.weekday_users = 400;
  c.weekend_users = 200;
  c.auth_fail_mean = 30;
  c.device_pool = 2000;
  return c;
}

std::map<Date, std::int64_t> auth_by_day(std::span<const TraceRecord> records, const LocalZone& zone) {
  std::map<Date, std::int64_t> out;
  for (const auto& r : records) {
    if (r.kind == EventKind::AuthFail) ++out[zone.local_date(r.ts)];
  }
  return out;
}

}  // namespace

TEST(Config, ValidatesAndParsesOverrides) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.set("days=10");
  c.set("weekday_users=500.5");
  EXPECT_EQ(c.days, 10);
  EXPECT_DOUBLE_EQ(c.weekday_users, 500.5);
  EXPECT_THROW(c.set("no_such_key=1"), InvalidConfig);
  EXPECT_THROW(c.set("days"), InvalidConfig);
  EXPECT_THROW(c.set("days=abc"), InvalidConfig);
  SimConfig bad;
  bad.days = 0;
  EXPECT_THROW(bad.validate(), InvalidConfig);
  bad = SimConfig{};
  bad.session_sigma = -1;
  EXPECT_THROW(bad.validate(), InvalidConfig);
}

TEST(Config, HotspotWeightsLeadWithBusiestAps) {
  const auto w = hotspot_weights(85);
  ASSERT_EQ(w.size(), 85u);
  EXPECT_DOUBLE_EQ(w[4], 15240);  // AP-104
  EXPECT_DOUBLE_EQ(w[0], 13950);
  for (std::size_t i = 11; i < w.size(); ++i) EXPECT_LT(w[i], w[i - 1]);
}

TEST(Generate, DeterministicInSeed) {
  const auto a = generate_month(small_config(), 5);
  const auto b = generate_month(small_config(), 5);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.truth, b.truth);
  const auto c = generate_month(small_config(), 6);
  EXPECT_NE(a.records, c.records);
}

TEST(Generate, SortedAndValid) {
  const auto out = generate_month(small_config(), 1);
  ASSERT_FALSE(out.records.empty());
  for (std::size_t i = 1; i < out.records.size(); ++i) ASSERT_LE(out.records[i - 1].ts, out.records[i].ts);
  for (const auto& r : out.records) {
    auto raw = to_raw(SessionRecord{r.ts, DeviceId{}, r.ap, r.kind, r.session_minutes, r.bytes_up,
                                    r.bytes_down, r.proto, r.latency_ms, r.loss_pct});
    ASSERT_NO_THROW(validate(raw));
  }
}

TEST(Generate, WeekdaysBusierThanWeekends) {
  auto cfg = small_config();
  cfg.anomaly_rate = 0;
  cfg.anomaly_min = 0;
  const auto out = generate_month(cfg, 2);
  std::map<Date, int> assoc;
  for (const auto& r : out.records) {
    if (r.kind == EventKind::Assoc) ++assoc[cfg.zone.local_date(r.ts)];
  }
  double wd = 0, we = 0;
  int nwd = 0, nwe = 0;
  for (const auto& [d, n] : assoc) {
    (d.is_weekend() ? we : wd) += n;
    (d.is_weekend() ? nwe : nwd) += 1;
  }
  ASSERT_GT(nwd, 0);
  ASSERT_GT(nwe, 0);
  EXPECT_GT(wd / nwd, we / nwe);
}

TEST(Generate, EverySessionClosesOnItsAp) {
  auto cfg = small_config();
  const auto out = generate_month(cfg, 3);
  std::map<std::pair<MacAddress, ApId>, int> open;
  for (const auto& r : out.records) {
    if (r.kind == EventKind::Assoc) ++open[{r.device, r.ap}];
    if (r.kind == EventKind::Disassoc) {
      auto& n = open[{r.device, r.ap}];
      ASSERT_GT(n, 0) << "disassoc without assoc";
      --n;
    }
  }
  for (const auto& [key, n] : open) EXPECT_EQ(n, 0);
}

TEST(Generate, ZeroRateMeansNoInjections) {
  auto cfg = small_config();
  cfg.anomaly_rate = 0;
  cfg.anomaly_min = 0;
  EXPECT_TRUE(generate_month(cfg, 4).truth.entries.empty());
}

TEST(Generate, TruthLabelsInjectableTypesWithinTheMonth) {
  const auto cfg = small_config();
  const auto out = generate_month(cfg, 9);
  ASSERT_FALSE(out.truth.entries.empty());
  for (const auto& e : out.truth.entries) {
    EXPECT_NE(std::find(kInjectableTypes.begin(), kInjectableTypes.end(), e.type), kInjectableTypes.end());
    EXPECT_GE(e.day, cfg.start);
    EXPECT_LT(e.day, cfg.start + cfg.days);
    EXPECT_FALSE(e.devices.empty());
  }
  EXPECT_EQ(truth_from_json(truth_to_json(out.truth)), out.truth);
}

TEST(Inject, EmptySpecIsIdentity) {
  auto cfg = small_config();
  cfg.anomaly_rate = 0;
  cfg.anomaly_min = 0;
  const auto base = generate_month(cfg, 7);
  const auto out = inject_anomalies(base.records, InjectionSpec{}, 1);
  EXPECT_EQ(out.records, base.records);
  EXPECT_TRUE(out.truth.entries.empty());
}

TEST(Inject, AuthBurstAddsExactCount) {
  auto cfg = small_config();
  cfg.anomaly_rate = 0;
  cfg.anomaly_min = 0;
  const auto base = generate_month(cfg, 7);
  InjectionSpec spec;
  const Date day = cfg.start + 3;
  spec.injections.push_back({day, AnomalyType::AuthBurst, 300, 1, ApId::from_number(104)});
  const auto out = inject_anomalies(base.records, spec, 1);
  auto before = auth_by_day(base.records, cfg.zone);
  auto after = auth_by_day(out.records, cfg.zone);
  EXPECT_EQ(after[day] - before[day], 300);
  for (const auto& [d, n] : before) {
    if (d != day) EXPECT_EQ(after[d], n);
  }
  ASSERT_EQ(out.truth.entries.size(), 1u);
  EXPECT_EQ(out.truth.entries[0].aps, (std::vector<ApId>{ApId::from_number(104)}));
}

TEST(Inject, OriginalsKeptInOrder) {
  auto cfg = small_config();
  cfg.anomaly_rate = 0;
  cfg.anomaly_min = 0;
  const auto base = generate_month(cfg, 8);
  InjectionSpec spec;
  for (std::size_t i = 0; i < kInjectableTypes.size(); ++i) {
    spec.injections.push_back({cfg.start + static_cast<int>(i), kInjectableTypes[i],
                               kInjectableTypes[i] == AnomalyType::DnsAnomaly ? 5.0 : 3.0, 3, std::nullopt});
  }
  const auto out = inject_anomalies(base.records, spec, 2);
  // Originals appear as a subsequence, in order.
  std::size_t j = 0;
  for (const auto& r : out.records) {
    if (j < base.records.size() && r == base.records[j]) ++j;
  }
  EXPECT_EQ(j, base.records.size());
  EXPECT_GT(out.records.size(), base.records.size());
  EXPECT_EQ(out.truth.entries.size(), kInjectableTypes.size());
  for (std::size_t i = 1; i < out.records.size(); ++i) ASSERT_LE(out.records[i - 1].ts, out.records[i].ts);
}

TEST(Traces, OneJsonLinePerRecord) {
  const auto out = generate_month(small_config(), 1);
  std::ostringstream os;
  write_traces(os, out.records);
  std::istringstream is(os.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ASSERT_EQ(line, encode_line(out.records[n]));
    ++n;
  }
  EXPECT_EQ(n, out.records.size());
}
