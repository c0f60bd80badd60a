#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "support.hpp"
#include "wlan/codec.hpp"
#include "wlan/ingest.hpp"
#include "wlan/pipeline.hpp"
#include "wlan/simulator.hpp"

using namespace wlan;
using namespace wlan::testing;
namespace fs = std::filesystem;

namespace {

const Date kDay = Date::from_ymd(2025, 9, 3);

Salt salt() {
  Salt::Bytes b{};
  b.fill(0x5a);
  return Salt(b);
}

// A small injected fortnight, anonymized.
const SimOutput& small_month() {
  static const SimOutput out = [] {
    SimConfig c;
    c.days = 14;
    c.ap_count = 20;
    c.weekday_users = 500;
    c.weekend_users = 250;
    c.auth_fail_mean = 40;
    c.device_pool = 3000;
    return generate_month(c, 21);
  }();
  return out;
}

std::vector<SessionRecord> anonymized(const std::vector<TraceRecord>& records) {
  Anonymizer anon(salt());
  std::vector<SessionRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(anon(r));
  return out;
}

AnomalyEvent event(AnomalyType type, Date day) {
  AnomalyEvent e;
  e.type = type;
  e.day = day;
  return e;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("wlan_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Digest, Sha256OfCanonicalLines) {
  const std::vector<SessionRecord> one = {assoc(at(kDay, 9), device(1), ap(1))};
  ASSERT_EQ(encode_line(one[0]),
            R"({"ts":"2025-09-03T14:00:00Z","device":"00000000000000000000000000000001","ap":"AP-1","kind":"assoc"})");
  // Reference digests from an independent SHA-256 implementation.
  EXPECT_EQ(input_digest(one), "454dbefbf89b41319c26a82cfd003a63e645feef70c33467f31ad1eaffabe707");
  EXPECT_EQ(input_digest({}), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Config, KeyValueOverrides) {
  PipelineConfig c;
  c.set("k=2.5");
  c.set("flag_rule=any");
  c.set("overload_threshold=40");
  c.set("dbscan_eps=3");
  EXPECT_DOUBLE_EQ(c.detection.k, 2.5);
  EXPECT_DOUBLE_EQ(c.prescriptive.k, 2.5);
  EXPECT_EQ(c.prescriptive.rule, FlagRule::Any);
  EXPECT_EQ(c.descriptive.overload_threshold, 40);
  EXPECT_DOUBLE_EQ(c.detection.dbscan_eps, 3.0);
  EXPECT_THROW(c.set("nonsense=1"), std::invalid_argument);
  EXPECT_THROW(c.set("k=abc"), std::invalid_argument);
  EXPECT_THROW(c.set("flag_rule=most"), std::invalid_argument);
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Evaluate, TwoOfThreeRecalled) {
  std::vector<LabeledInjection> truth = {
      {kDay, AnomalyType::AuthBurst, {device(1)}, {ap(1)}},
      {kDay + 1, AnomalyType::AuthBurst, {device(2)}, {ap(1)}},
      {kDay + 2, AnomalyType::AuthBurst, {device(3)}, {ap(1)}},
  };
  auto hit1 = event(AnomalyType::AuthBurst, kDay);
  hit1.device = device(1);
  auto hit2 = event(AnomalyType::AuthBurst, kDay + 1);  // network-wide
  auto wrong_device = event(AnomalyType::AuthBurst, kDay + 2);
  wrong_device.device = device(9);
  const std::vector<AnomalyEvent> events = {hit1, hit2, wrong_device};
  const auto ev = evaluate(events, truth);
  const auto& s = ev.per_type[0];
  EXPECT_EQ(s.injected, 3);
  EXPECT_EQ(s.recalled, 2);
  EXPECT_EQ(s.detected, 3);
  EXPECT_EQ(s.confirmed, 2);
  EXPECT_NEAR(*s.recall, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(*s.precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(*ev.overall_recall, 2.0 / 3.0, 1e-12);
}

TEST(Evaluate, ApScopedEventsMatchByAp) {
  std::vector<LabeledInjection> truth = {{kDay, AnomalyType::DnsAnomaly, {device(1)}, {ap(4)}}};
  auto right = event(AnomalyType::DnsAnomaly, kDay);
  right.ap = ap(4);
  auto wrong = event(AnomalyType::DnsAnomaly, kDay);
  wrong.ap = ap(5);
  const std::vector<AnomalyEvent> events = {right, wrong};
  const auto ev = evaluate(events, truth);
  EXPECT_EQ(ev.per_type[1].confirmed, 1);
  EXPECT_EQ(ev.per_type[1].recalled, 1);
}

TEST(Evaluate, NothingDetected) {
  std::vector<LabeledInjection> truth = {{kDay, AnomalyType::TrafficSpike, {device(1)}, {ap(1)}}};
  const auto ev = evaluate({}, truth);
  const auto& s = ev.per_type[4];
  EXPECT_EQ(s.type, AnomalyType::TrafficSpike);
  EXPECT_EQ(*s.recall, 0.0);
  EXPECT_FALSE(s.precision);
  EXPECT_FALSE(ev.overall_precision);
  EXPECT_FALSE(evaluate({}, {}).overall_recall);
  const auto j = evaluation_to_json(ev);
  EXPECT_TRUE(j["overall_precision"].is_null());
}

TEST(Evaluate, AnonymizedTruthUsesRunIdentities) {
  GroundTruth t;
  t.entries.push_back({kDay, AnomalyType::AuthBurst, {*MacAddress::parse("0a:00:00:00:00:01")}, {ap(3)}, 100});
  const auto labels = anonymize_truth(t, salt());
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].devices[0], anonymize_device("0a:00:00:00:00:01", salt()));
  EXPECT_EQ(labels[0].aps, (std::vector<ApId>{ap(3)}));
}

TEST(Pipeline, TooFewDays) {
  std::vector<SessionRecord> r;
  for (int d = 0; d < 6; ++d) session(r, at(kDay + d, 9), 30, device(1), ap(1));
  try {
    run_pipeline(r, PipelineConfig{});
    FAIL() << "six days were accepted";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "descriptive");
    EXPECT_TRUE(e.bad_input());
  }
}

TEST(Pipeline, DeterministicAndComplete) {
  const auto records = anonymized(small_month().records);
  const auto a = run_pipeline(records, PipelineConfig{});
  const auto b = run_pipeline(records, PipelineConfig{});
  EXPECT_EQ(a.input_digest, b.input_digest);
  EXPECT_EQ(a.aggregates, b.aggregates);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.anomalies, b.anomalies);
  EXPECT_EQ(a.recommendations, b.recommendations);
  EXPECT_EQ(a.record_count, records.size());
  EXPECT_EQ(a.aggregates.size(), 14u);
  EXPECT_EQ(a.daily_counts.size(), 14u);
  std::int64_t total = 0;
  for (const auto& c : a.daily_counts) total += c.anomalies;
  EXPECT_EQ(total, static_cast<std::int64_t>(a.anomalies.size()));
  for (std::size_t i = 0; i < a.anomalies.size(); ++i) EXPECT_EQ(a.anomalies[i].id, i);
  EXPECT_FALSE(a.timings.empty());
  EXPECT_EQ(a.run_id.substr(a.run_id.size() - 12), a.input_digest.substr(0, 12));
}

TEST(Pipeline, RecallsMostInjections) {
  const auto records = anonymized(small_month().records);
  const auto run = run_pipeline(records, PipelineConfig{});
  const auto labels = anonymize_truth(small_month().truth, salt());
  const auto ev = evaluate(run.anomalies, labels);
  ASSERT_TRUE(ev.overall_recall);
  EXPECT_GE(*ev.overall_recall, 0.8);
}

TEST(Pipeline, SaveLoadRoundTrip) {
  const auto records = anonymized(small_month().records);
  const auto run = run_pipeline(records, PipelineConfig{});
  const auto dir = scratch_dir("roundtrip");
  save_run(run, dir);
  for (const char* f : {"manifest.json", "config.json", "aggregates.json", "baseline.json", "ap_stats.json",
                        "hourly_profile.json", "model.json", "anomalies.json", "recommendations.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto back = load_run(dir);
  EXPECT_EQ(back.run_id, run.run_id);
  EXPECT_EQ(back.input_digest, run.input_digest);
  EXPECT_EQ(back.aggregates, run.aggregates);
  EXPECT_EQ(back.ap_stats, run.ap_stats);
  EXPECT_EQ(back.model, run.model);
  EXPECT_EQ(back.anomalies, run.anomalies);
  EXPECT_EQ(back.daily_counts, run.daily_counts);
  EXPECT_EQ(back.recommendations, run.recommendations);

  // Saving the reloaded run reproduces every artifact byte for byte.
  const auto again = scratch_dir("roundtrip2");
  save_run(back, again);
  for (const auto& entry : fs::directory_iterator(dir)) {
    EXPECT_EQ(slurp(entry.path()), slurp(again / entry.path().filename())) << entry.path().filename();
  }
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST(Pipeline, LoadRejectsForeignDirectory) {
  const auto dir = scratch_dir("foreign");
  std::ofstream(dir / "manifest.json") << R"({"format":"something-else","version":1})";
  EXPECT_ANY_THROW(load_run(dir));
  fs::remove_all(dir);
}
