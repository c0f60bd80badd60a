#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "wlan/pipeline.hpp"

namespace httplib {
class Server;
}

namespace wlan {

/// Line exposition of a run: `name{label="v"} value`, one sample per line.
std::string render_metrics(const AnalysisRun& run);
/// The run's anomaly list as a JSON array.
std::string render_alerts(const AnalysisRun& run);

/// Rendered, immutable view of one run.
struct Snapshot {
  std::string run_id;
  std::string metrics;
  std::string alerts;
};

std::shared_ptr<const Snapshot> make_snapshot(const AnalysisRun& run);

class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Read-only HTTP endpoints over the current snapshot: /metrics, /alerts,
/// /healthz. Readers hold their own reference, so `publish` never disturbs
/// a request in flight.
class MetricsService {
 public:
  explicit MetricsService(std::shared_ptr<const Snapshot> initial);
  ~MetricsService();
  MetricsService(const MetricsService&) = delete;
  MetricsService& operator=(const MetricsService&) = delete;

  void publish(std::shared_ptr<const Snapshot> next);
  std::shared_ptr<const Snapshot> current() const;

  /// Binds `host:port` (port 0 picks a free one); throws ServiceError.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind.
  void serve();
  void stop();

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::unique_ptr<httplib::Server> server_;
};

/// Serves `run_dir`, reloading it when its manifest changes.
class DirectoryWatcher {
 public:
  DirectoryWatcher(MetricsService& service, std::filesystem::path run_dir);
  ~DirectoryWatcher();

 private:
  void loop();

  MetricsService& service_;
  std::filesystem::path dir_;
  std::atomic<bool> running_{true};
  std::thread thread_;
};

}  // namespace wlan
