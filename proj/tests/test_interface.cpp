#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "support.hpp"
#include "wlan/codec.hpp"
#include "wlan/pipeline.hpp"
#include "wlan/report.hpp"
#include "wlan/service.hpp"

// After Eigen: the resolver header defines a macro that clashes with it.
#include "httplib.h"

using namespace wlan;
using namespace wlan::testing;
namespace fs = std::filesystem;

namespace {

const Date kDay = Date::from_ymd(2025, 9, 1);

// A hand-built run: two days, two APs, one anomaly.
AnalysisRun tiny_run(bool with_anomaly) {
  AnalysisRun run;
  run.run_id = "20250101T000000Z-abcdefabcdef";
  for (int d = 0; d < 2; ++d) {
    DailyAggregate a;
    a.day = kDay + d;
    a.connections = 100 + d;
    a.auth_failures = 7;
    a.traffic_gb = 1.5;
    a.proto_share.values = {0.1, 0.6, 0.05, 0.15, 0.1};
    run.aggregates.push_back(a);
    run.daily_counts.push_back({a.day, with_anomaly && d == 1 ? 1 : 0});
  }
  ApStats s1{ap(100), 50, 12, 35.0, 1.0, 0};
  ApStats s2{ap(104), 80, 20, std::nullopt, std::nullopt, 1};
  run.ap_stats = {s2, s1};
  if (with_anomaly) {
    AnomalyEvent e;
    e.day = kDay + 1;
    e.type = AnomalyType::AuthBurst;
    e.severity = Severity::High;
    e.score = 14.0;
    e.device = device(3);
    e.ap = ap(100);
    run.anomalies.push_back(e);
    Recommendation r;
    r.action = Action::AuthPolicyReview;
    r.rationale = "repeated authentication failures";
    r.linked_events = {0};
    run.recommendations.push_back(r);
  }
  return run;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WLANALYZE_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("wlan_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Metrics, EveryLineIsAWellFormedSample) {
  const std::string text = render_metrics(tiny_run(true));
  const std::regex line(R"(^wlan_[a-z_]+(\{([a-z]+="[^"]*",?)+\})? -?[0-9.e+-]+$)");
  std::istringstream in(text);
  std::string l;
  int n = 0;
  while (std::getline(in, l)) {
    EXPECT_TRUE(std::regex_match(l, line)) << l;
    ++n;
  }
  EXPECT_GT(n, 20);
}

TEST(Metrics, DailyAnomalyCountsExposed) {
  const std::string text = render_metrics(tiny_run(true));
  EXPECT_NE(text.find("wlan_anomalies{day=\"2025-09-02\"} 1\n"), std::string::npos);
  EXPECT_NE(text.find("wlan_anomalies{day=\"2025-09-01\"} 0\n"), std::string::npos);
  EXPECT_NE(text.find("wlan_anomalies_by_type{type=\"AuthBurst\",severity=\"High\"} 1\n"), std::string::npos);
  EXPECT_NE(text.find("wlan_connections{day=\"2025-09-02\"} 101\n"), std::string::npos);
  EXPECT_NE(text.find("wlan_ap_latency_ms{ap=\"AP-100\"} 35\n"), std::string::npos);
  EXPECT_EQ(text.find("wlan_ap_latency_ms{ap=\"AP-104\"}"), std::string::npos);
}

TEST(Alerts, CleanRunIsEmptyArray) {
  EXPECT_EQ(render_alerts(tiny_run(false)), "[]");
  const auto alerts = Json::parse(render_alerts(tiny_run(true)));
  ASSERT_EQ(alerts.size(), 1u);
  EXPECT_EQ(alerts[0].get<AnomalyEvent>(), tiny_run(true).anomalies[0]);
}

TEST(Service, ServesEndpointsAndSwapsSnapshots) {
  MetricsService svc(make_snapshot(tiny_run(false)));
  const int port = svc.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread server([&] { svc.serve(); });
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);

  auto health = client.Get("/healthz");
  for (int i = 0; i < 50 && !health; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    health = client.Get("/healthz");
  }
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto alerts = client.Get("/alerts");
  ASSERT_TRUE(alerts);
  EXPECT_EQ(alerts->body, "[]");

  svc.publish(make_snapshot(tiny_run(true)));
  alerts = client.Get("/alerts");
  ASSERT_TRUE(alerts);
  EXPECT_EQ(Json::parse(alerts->body).size(), 1u);
  const auto metrics = client.Get("/metrics");
  ASSERT_TRUE(metrics);
  EXPECT_EQ(metrics->body, render_metrics(tiny_run(true)));
  EXPECT_EQ(client.Get("/nope")->status, 404);

  svc.stop();
  server.join();
}

TEST(Service, BindConflictIsReported) {
  MetricsService a(make_snapshot(tiny_run(false)));
  const int port = a.bind("127.0.0.1", 0);
  MetricsService b(make_snapshot(tiny_run(false)));
  EXPECT_THROW(b.bind("127.0.0.1", port), ServiceError);
}

TEST(Report, CsvHeadersAndOrdering) {
  const auto docs = render_report(tiny_run(true));
  EXPECT_EQ(first_line(docs.metrics_csv), "Métrica,Promedio Diario,Valor Mínimo,Valor Máximo");
  EXPECT_EQ(first_line(docs.aps_csv),
            "ID del AP,Conexiones Mensuales,Latencia Promedio (ms),Pérdida de Paquetes (%)");
  std::istringstream aps(docs.aps_csv);
  std::string header, r1, r2;
  std::getline(aps, header);
  std::getline(aps, r1);
  std::getline(aps, r2);
  EXPECT_EQ(r1.substr(0, 11), "AP-104,80,,");
  EXPECT_EQ(r2.substr(0, 10), "AP-100,50,");
  EXPECT_NE(docs.recommendations_txt.find("AuthPolicyReview"), std::string::npos);
  EXPECT_NE(docs.html.find("<svg"), std::string::npos);
  EXPECT_EQ(docs.summary["anomalies"].size(), 1u);
}

TEST(Report, WritesAllFiles) {
  const auto dir = scratch_dir("report");
  write_report(render_report(tiny_run(true)), dir);
  for (const char* f : {"report.json", "metrics.csv", "aps.csv", "recommendations.txt", "report.html"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("exit");
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("no-such-command"), 1);
  EXPECT_EQ(run_cli("run"), 1);  // missing required options
  EXPECT_EQ(run_cli("analyze --pre-anonymized --in " + (dir / "missing.jsonl").string()), 1);

  // Six days of data: the pipeline refuses it as bad input.
  std::ofstream six(dir / "six.jsonl");
  for (int d = 0; d < 6; ++d) {
    six << encode_line(assoc(at(kDay + d, 9), device(1), ap(1))) << "\n"
        << encode_line(disassoc(at(kDay + d, 10), device(1), ap(1), 60)) << "\n";
  }
  six.close();
  EXPECT_EQ(run_cli("run --pre-anonymized --in " + (dir / "six.jsonl").string() + " --out " +
                    (dir / "run").string()),
            1);

  std::ofstream bad(dir / "bad.jsonl");
  bad << "{broken\n";
  bad.close();
  EXPECT_EQ(run_cli("ingest --strict --pre-anonymized --in " + (dir / "bad.jsonl").string()), 1);
  fs::remove_all(dir);
}

TEST(Cli, SimulateRunReportEvaluate) {
  const auto dir = scratch_dir("flow");
  const std::string d = dir.string();
  ::setenv("WLC_SALT_HEX", "00112233445566778899aabbccddeeff", 1);
  ASSERT_EQ(run_cli("simulate --days 8 --seed 3 --config weekday_users=300 --config weekend_users=150 "
                    "--config auth_fail_mean=20 --config device_pool=2000 --out " +
                    d + "/trace.jsonl --labels " + d + "/labels.json"),
            0);
  ASSERT_EQ(run_cli("run -q --in " + d + "/trace.jsonl --out " + d + "/run"), 0);
  EXPECT_TRUE(fs::exists(dir / "run" / "manifest.json"));
  EXPECT_EQ(run_cli("report --run " + d + "/run --out " + d + "/report"), 0);
  EXPECT_TRUE(fs::exists(dir / "report" / "aps.csv"));
  EXPECT_EQ(run_cli("evaluate --json --run " + d + "/run --labels " + d + "/labels.json --out " + d + "/eval.json"),
            0);
  std::ifstream ev(dir / "eval.json");
  const auto j = Json::parse(ev);
  EXPECT_TRUE(j.contains("per_type"));
  EXPECT_EQ(run_cli("recommend --run " + d + "/run --flag-rule any"), 0);
  fs::remove_all(dir);
}
