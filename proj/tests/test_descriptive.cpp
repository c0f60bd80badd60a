#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "wlan/descriptive.hpp"

using namespace wlan;
using namespace wlan::testing;

namespace {

const Date kDay = Date::from_ymd(2025, 9, 3);  // Wednesday

std::vector<SessionRecord> random_day(std::uint32_t seed, int sessions) {
  std::mt19937 gen(seed);
  std::vector<SessionRecord> out;
  for (int i = 0; i < sessions; ++i) {
    const int start_min = 6 * 60 + static_cast<int>(gen() % (12 * 60));
    const int minutes = static_cast<int>(gen() % 120);
    const auto dev = device(static_cast<int>(gen() % 40));
    const auto a = ap(static_cast<int>(gen() % 4));
    session(out, at(kDay, 0, start_min), minutes, dev, a);
    if (gen() % 3 == 0) out.push_back(auth_fail(at(kDay, 0, start_min), dev, a));
    if (gen() % 2 == 0) {
      out.push_back(traffic(at(kDay, 0, start_min + 1), dev, a, kProtocols[gen() % 5], gen() % 100000,
                            gen() % 1000000));
    }
  }
  return out;
}

// Peak by brute force: concurrency just after every event instant.
std::int64_t brute_peak(const std::vector<std::pair<std::int64_t, int>>& events) {
  std::vector<std::pair<std::int64_t, int>> sorted = events;
  std::sort(sorted.begin(), sorted.end());
  std::int64_t best = 0;
  for (const auto& probe : sorted) {
    std::int64_t level = 0;
    for (const auto& e : sorted) {
      if (e.first > probe.first) break;
      level = std::max<std::int64_t>(0, level + e.second);
    }
    best = std::max(best, level);
  }
  return best;
}

}  // namespace

TEST(Daily, HandDay) {
  std::vector<SessionRecord> r;
  r.push_back(assoc(at(kDay, 9), device(1), ap(1)));
  r.push_back(assoc(at(kDay, 10), device(2), ap(1)));
  r.push_back(auth_fail(at(kDay, 11), device(3), ap(1)));
  r.push_back(traffic(at(kDay, 12), device(1), ap(1), Protocol::Https, 1'000'000'000, 2'000'000'000));
  const auto a = aggregate_daily(r, kDay);
  EXPECT_EQ(a.connections, 2);
  EXPECT_EQ(a.auth_failures, 1);
  EXPECT_DOUBLE_EQ(a.traffic_gb, 3.0);
  EXPECT_EQ(a.distinct_devices, 2);
  EXPECT_DOUBLE_EQ(a.proto_share[Protocol::Https], 1.0);
}

TEST(Daily, RecordsOfOtherDaysAreIgnored) {
  std::vector<SessionRecord> r;
  r.push_back(assoc(at(kDay, 23, 59), device(1), ap(1)));
  r.push_back(assoc(at(kDay + 1, 0, 0), device(1), ap(1)));
  EXPECT_EQ(aggregate_daily(r, kDay).connections, 1);
  EXPECT_EQ(aggregate_daily(r, kDay + 1).connections, 1);
}

TEST(Daily, SessionMinutesAndUnexpectedDisconnects) {
  std::vector<SessionRecord> r;
  session(r, at(kDay, 9), 30, device(1), ap(1));
  session(r, at(kDay, 10), 0.5, device(2), ap(1));
  const auto a = aggregate_daily(r, kDay);
  EXPECT_DOUBLE_EQ(a.mean_session_minutes, 15.25);
  EXPECT_EQ(a.unexpected_disconnects, 1);
}

TEST(Sweep, TwoOverlappingOfThree) {
  // [9,11) [10,12) [11,13): departures before arrivals at 11:00 keep the peak at 2.
  std::vector<std::pair<std::int64_t, int>> ev = {{9, 1}, {11, -1}, {10, 1}, {12, -1}, {11, 1}, {13, -1}};
  EXPECT_EQ(sweep_peak(ev), 2);
}

TEST(Sweep, NeverBelowZero) {
  EXPECT_EQ(sweep_peak({{1, -1}, {2, -1}, {3, 1}}), 1);
  EXPECT_EQ(sweep_peak({}), 0);
}

TEST(Sweep, AgreesWithBruteForce) {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::pair<std::int64_t, int>> ev;
    const int n = 1 + static_cast<int>(gen() % 30);
    for (int i = 0; i < n; ++i) {
      const std::int64_t s = gen() % 50;
      ev.emplace_back(s, 1);
      ev.emplace_back(s + static_cast<std::int64_t>(gen() % 20), -1);
    }
    EXPECT_EQ(sweep_peak(ev), brute_peak(ev));
  }
}

TEST(ApLoad, OverloadFraction) {
  std::vector<ApStats> stats(10);
  for (int i = 0; i < 10; ++i) {
    stats[i].ap = ap(i);
    stats[i].peak_concurrent = i < 2 ? 60 : 50;  // 50 is not above the threshold
  }
  EXPECT_DOUBLE_EQ(overload_fraction(stats, 50), 20.0);
  EXPECT_DOUBLE_EQ(overload_fraction({}, 50), 0.0);
  EXPECT_THROW(overload_fraction(stats, 0), std::invalid_argument);
}

TEST(ApLoad, StatsSortedAndHealthAveraged) {
  std::vector<SessionRecord> r;
  session(r, at(kDay, 9), 60, device(1), ap(2));
  session(r, at(kDay, 9, 30), 60, device(2), ap(2));
  session(r, at(kDay, 9), 60, device(3), ap(1));
  r.push_back(health(at(kDay, 23), ap(1), 40, 1.0));
  r.push_back(health(at(kDay + 1, 23), ap(1), 44, 2.0));
  const auto stats = ap_load_stats(r);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[0].ap, ap(2));
  EXPECT_EQ(stats[0].monthly_connections, 2);
  EXPECT_EQ(stats[0].peak_concurrent, 2);
  EXPECT_FALSE(stats[0].mean_latency_ms);
  EXPECT_DOUBLE_EQ(*stats[1].mean_latency_ms, 42.0);
  EXPECT_DOUBLE_EQ(*stats[1].mean_loss_pct, 1.5);

  const auto windowed = ap_load_stats(r, DateRange{kDay + 1, kDay + 1});
  ASSERT_EQ(windowed.size(), 1u);
  EXPECT_EQ(windowed[0].monthly_connections, 0);
}

TEST(Hourly, SessionCoversTopsOfHours) {
  std::vector<SessionRecord> r;
  session(r, at(kDay, 9, 30), 120, device(1), ap(1));
  const auto h = hourly_profile(r);
  for (int i = 0; i < 24; ++i) EXPECT_DOUBLE_EQ(h[i], (i == 10 || i == 11) ? 1.0 : 0.0) << "hour " << i;
}

TEST(Hourly, AveragedOverRecordDays) {
  std::vector<SessionRecord> r;
  session(r, at(kDay, 9, 30), 60, device(1), ap(1));
  session(r, at(kDay + 1, 9, 30), 60, device(1), ap(1));
  session(r, at(kDay + 1, 9, 45), 60, device(2), ap(1));
  EXPECT_DOUBLE_EQ(hourly_profile(r)[10], 1.5);
}

TEST(Baseline, SampleStandardDeviation) {
  Eigen::ArrayXXd rows(2, 1);
  rows << 4, 6;
  const auto [mean, sd] = column_mean_std(rows);
  EXPECT_DOUBLE_EQ(mean(0), 5.0);
  EXPECT_NEAR(sd(0), std::sqrt(2.0), 1e-12);
}

TEST(Baseline, RequiresFiveDays) {
  std::vector<DailyAggregate> days(4);
  for (int i = 0; i < 4; ++i) days[i].day = kDay + i;
  EXPECT_THROW(build_baseline(days), InsufficientData);
  days.push_back(DailyAggregate{});
  days.back().day = kDay + 4;
  EXPECT_NO_THROW(build_baseline(days));
}

TEST(Baseline, WeekdaySlotsAndFallback) {
  // Five Wednesdays with connections 10..14 plus one Thursday.
  std::vector<DailyAggregate> days;
  for (int w = 0; w < 5; ++w) {
    DailyAggregate a;
    a.day = kDay + 7 * w;
    a.connections = 10 + w;
    days.push_back(a);
  }
  DailyAggregate thu;
  thu.day = kDay + 1;
  thu.connections = 100;
  days.push_back(thu);
  const auto b = build_baseline(days);
  const auto& wed = b.slot_for(kDay);
  EXPECT_FALSE(wed.fallback);
  EXPECT_EQ(wed.days, 5);
  EXPECT_DOUBLE_EQ(wed.mean(static_cast<int>(Metric::Connections)), 12.0);
  EXPECT_NEAR(wed.stddev(static_cast<int>(Metric::Connections)), std::sqrt(2.5), 1e-12);
  const auto& th = b.slot_for(kDay + 1);
  EXPECT_TRUE(th.fallback);
  EXPECT_DOUBLE_EQ(th.mean(static_cast<int>(Metric::Connections)), 160.0 / 6.0);
}

TEST(Correlation, KnownValue) {
  const std::vector<double> x = {1, 2, 3}, y = {2, 1, 4};
  EXPECT_NEAR(correlation(x, y), 0.6546536707, 1e-9);
}

TEST(Correlation, Errors) {
  const std::vector<double> x = {1, 2, 3}, flat = {5, 5, 5}, two = {1, 2};
  EXPECT_THROW(correlation(x, flat), ZeroVariance);
  EXPECT_THROW(correlation(two, two), std::invalid_argument);
  EXPECT_THROW(correlation(x, two), std::invalid_argument);
}

TEST(Correlation, SymmetricAndAffineInvariant) {
  std::mt19937 gen(3);
  std::normal_distribution<> n;
  std::vector<double> x(50), y(50), z(50);
  for (int i = 0; i < 50; ++i) {
    x[i] = n(gen);
    y[i] = x[i] + n(gen);
    z[i] = 3.0 * y[i] + 7.0;
  }
  EXPECT_NEAR(correlation(x, y), correlation(y, x), 1e-12);
  EXPECT_NEAR(correlation(x, y), correlation(x, z), 1e-12);
}

TEST(Properties, PermutationInvariant) {
  auto r = random_day(11, 200);
  const auto ref = aggregate_daily(r, kDay);
  const auto ref_stats = ap_load_stats(r);
  std::mt19937 gen(5);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(r.begin(), r.end(), gen);
    const auto a = aggregate_daily(r, kDay);
    EXPECT_EQ(a.connections, ref.connections);
    EXPECT_EQ(a.distinct_devices, ref.distinct_devices);
    EXPECT_NEAR(a.mean_session_minutes, ref.mean_session_minutes, 1e-9);
    EXPECT_EQ(a.auth_failures, ref.auth_failures);
    EXPECT_DOUBLE_EQ(a.traffic_gb, ref.traffic_gb);
    EXPECT_DOUBLE_EQ(a.overload_pct, ref.overload_pct);
    EXPECT_EQ(a.proto_share, ref.proto_share);
    EXPECT_EQ(a.duplicate_device_events, ref.duplicate_device_events);
    EXPECT_EQ(ap_load_stats(r), ref_stats);
  }
}

TEST(Properties, MergeEqualsSinglePass) {
  DescriptiveConfig cfg;
  cfg.overload_threshold = 3;
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    const auto r = random_day(seed, 150);
    const std::size_t cut = r.size() * (seed + 1) / 21;
    DailyAccumulator left(kDay, cfg), right(kDay, cfg), whole(kDay, cfg);
    for (std::size_t i = 0; i < r.size(); ++i) {
      (i < cut ? left : right).add(r[i]);
      whole.add(r[i]);
    }
    left.merge(right);
    const auto m = left.finalize(), w = whole.finalize();
    EXPECT_EQ(m.connections, w.connections);
    EXPECT_EQ(m.distinct_devices, w.distinct_devices);
    EXPECT_NEAR(m.mean_session_minutes, w.mean_session_minutes, 1e-9);
    EXPECT_EQ(m.auth_failures, w.auth_failures);
    EXPECT_EQ(m.unexpected_disconnects, w.unexpected_disconnects);
    EXPECT_DOUBLE_EQ(m.traffic_gb, w.traffic_gb);
    EXPECT_DOUBLE_EQ(m.overload_pct, w.overload_pct);
    EXPECT_EQ(m.duplicate_device_events, w.duplicate_device_events);
  }
}

TEST(Days, EmptyDaysIncluded) {
  std::vector<SessionRecord> r;
  r.push_back(assoc(at(kDay, 9), device(1), ap(1)));
  r.push_back(assoc(at(kDay + 3, 9), device(1), ap(1)));
  const auto days = aggregate_days(r);
  ASSERT_EQ(days.size(), 4u);
  EXPECT_EQ(days[1].connections, 0);
  EXPECT_EQ(days[3].day, kDay + 3);
  EXPECT_TRUE(aggregate_days({}).empty());
}
