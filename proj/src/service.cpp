#include "wlan/service.hpp"

#include <chrono>
#include <cstdio>
#include <map>

#include "httplib.h"

namespace wlan {

namespace {

std::string number(double v) {
  if (!std::isfinite(v)) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Exposition {
 public:
  void add(const std::string& name, const std::string& labels, double value) {
    out_ += name;
    if (!labels.empty()) out_ += "{" + labels + "}";
    out_ += " " + number(value) + "\n";
  }
  std::string str() && { return std::move(out_); }

 private:
  std::string out_;
};

std::string label(const char* key, const std::string& value) {
  std::string escaped;
  for (char c : value) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c;
  }
  return std::string(key) + "=\"" + escaped + "\"";
}

}  // namespace

std::string render_metrics(const AnalysisRun& run) {
  Exposition x;
  for (const auto& a : run.aggregates) {
    const std::string day = label("day", a.day.iso());
    x.add("wlan_connections", day, static_cast<double>(a.connections));
    x.add("wlan_distinct_devices", day, static_cast<double>(a.distinct_devices));
    x.add("wlan_mean_session_minutes", day, a.mean_session_minutes);
    x.add("wlan_auth_failures", day, static_cast<double>(a.auth_failures));
    x.add("wlan_unexpected_disconnects", day, static_cast<double>(a.unexpected_disconnects));
    x.add("wlan_traffic_gb", day, a.traffic_gb);
    x.add("wlan_overload_pct", day, a.overload_pct);
    x.add("wlan_duplicate_device_events", day, static_cast<double>(a.duplicate_device_events));
    for (Protocol p : kProtocols) {
      x.add("wlan_proto_share", day + "," + label("proto", std::string(to_wire(p))), a.proto_share[p]);
    }
  }
  for (const auto& c : run.daily_counts) {
    x.add("wlan_anomalies", label("day", c.day.iso()), static_cast<double>(c.anomalies));
  }
  std::map<std::pair<std::string, std::string>, std::int64_t> by_type;
  for (const auto& e : run.anomalies) {
    ++by_type[{std::string(to_string(e.type)), std::string(to_string(e.severity))}];
  }
  for (const auto& [key, n] : by_type) {
    x.add("wlan_anomalies_by_type", label("type", key.first) + "," + label("severity", key.second),
          static_cast<double>(n));
  }
  x.add("wlan_anomalies_total", "", static_cast<double>(run.anomalies.size()));
  for (const auto& s : run.ap_stats) {
    const std::string ap = label("ap", s.ap.str());
    x.add("wlan_ap_monthly_connections", ap, static_cast<double>(s.monthly_connections));
    x.add("wlan_ap_peak_concurrent", ap, static_cast<double>(s.peak_concurrent));
    x.add("wlan_ap_overloaded_days", ap, static_cast<double>(s.overloaded_days));
    if (s.mean_latency_ms) x.add("wlan_ap_latency_ms", ap, *s.mean_latency_ms);
    if (s.mean_loss_pct) x.add("wlan_ap_loss_pct", ap, *s.mean_loss_pct);
  }
  for (std::size_t h = 0; h < run.hourly.size(); ++h) {
    x.add("wlan_hourly_mean_concurrent", label("hour", std::to_string(h)), run.hourly[h]);
  }
  x.add("wlan_recommendations_total", "", static_cast<double>(run.recommendations.size()));
  return std::move(x).str();
}

std::string render_alerts(const AnalysisRun& run) { return Json(run.anomalies).dump(); }

std::shared_ptr<const Snapshot> make_snapshot(const AnalysisRun& run) {
  return std::make_shared<const Snapshot>(Snapshot{run.run_id, render_metrics(run), render_alerts(run)});
}

MetricsService::MetricsService(std::shared_ptr<const Snapshot> initial)
    : snapshot_(std::move(initial)), server_(std::make_unique<httplib::Server>()) {
  // No SO_REUSEPORT: a second server on a busy port must fail to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok\n", "text/plain");
  });
  server_->Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
    const auto snap = current();
    res.set_content(snap->metrics, "text/plain; version=0.0.4");
  });
  server_->Get("/alerts", [this](const httplib::Request&, httplib::Response& res) {
    const auto snap = current();
    res.set_content(snap->alerts, "application/json");
  });
}

MetricsService::~MetricsService() { stop(); }

void MetricsService::publish(std::shared_ptr<const Snapshot> next) {
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(next);
}

std::shared_ptr<const Snapshot> MetricsService::current() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

int MetricsService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw ServiceError("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw ServiceError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void MetricsService::serve() { server_->listen_after_bind(); }

void MetricsService::stop() {
  if (server_) server_->stop();
}

DirectoryWatcher::DirectoryWatcher(MetricsService& service, std::filesystem::path run_dir)
    : service_(service), dir_(std::move(run_dir)), thread_([this] { loop(); }) {}

DirectoryWatcher::~DirectoryWatcher() {
  running_ = false;
  if (thread_.joinable()) thread_.join();
}

void DirectoryWatcher::loop() {
  std::error_code ec;
  auto stamp = std::filesystem::last_write_time(dir_ / "manifest.json", ec);
  while (running_) {
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    const auto now = std::filesystem::last_write_time(dir_ / "manifest.json", ec);
    if (ec || now == stamp) continue;
    try {
      service_.publish(make_snapshot(load_run(dir_)));
      stamp = now;
    } catch (const std::exception&) {
      // A run still being written; retry on the next tick.
    }
  }
}

}  // namespace wlan
