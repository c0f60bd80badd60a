#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wlan/codec.hpp"
#include "wlan/descriptive.hpp"
#include "wlan/detection.hpp"
#include "wlan/domain.hpp"
#include "wlan/ingest.hpp"
#include "wlan/prescriptive.hpp"
#include "wlan/simulator.hpp"

namespace wlan {

struct PipelineConfig {
  DescriptiveConfig descriptive;
  DetectionConfig detection;
  PrescriptiveConfig prescriptive;

  /// Applies a `key=value` override (e.g. `k=2.5`, `dbscan_eps=3`);
  /// throws std::invalid_argument on unknown keys or bad values.
  void set(std::string_view assignment);
};

Json config_to_json(const PipelineConfig& c);
PipelineConfig config_from_json(const Json& j);

inline constexpr int kMinPipelineDays = 7;

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, bool bad_input)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), bad_input_(bad_input) {}
  const std::string& stage() const { return stage_; }
  /// The stage rejected its input (as opposed to failing internally).
  bool bad_input() const { return bad_input_; }

 private:
  std::string stage_;
  bool bad_input_;
};

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct DailyCount {
  Date day;
  std::int64_t anomalies = 0;
  bool operator==(const DailyCount&) const = default;
};

struct AnalysisRun {
  std::string run_id;
  std::string created_at;
  std::string input_digest;
  std::size_t record_count = 0;
  PipelineConfig config;
  std::vector<DailyAggregate> aggregates;
  BaselineProfile baseline;
  std::vector<ApStats> ap_stats;
  HourlyProfile hourly{};
  ForestModel<double> model;
  std::vector<AnomalyEvent> anomalies;
  std::vector<DailyCount> daily_counts;
  std::vector<Recommendation> recommendations;
  std::vector<StageTiming> timings;
};

/// SHA-256 over the canonical JSONL encoding of the records, one line each
/// terminated by '\n', in the given order. Lowercase hex.
std::string input_digest(std::span<const SessionRecord> records);

/// descriptive -> detection -> prescriptive. Throws StageError naming the
/// failing stage; needs at least kMinPipelineDays local days of records.
AnalysisRun run_pipeline(std::span<const SessionRecord> records, const PipelineConfig& config);

/// Writes the run as a directory of JSON artifacts plus manifest.json.
/// Only the manifest carries run id, creation time and timings.
void save_run(const AnalysisRun& run, const std::filesystem::path& dir);
AnalysisRun load_run(const std::filesystem::path& dir);

struct TypeScore {
  AnomalyType type = AnomalyType::AuthBurst;
  std::int64_t injected = 0;
  std::int64_t recalled = 0;  // injections matched by some event
  std::int64_t detected = 0;
  std::int64_t confirmed = 0;  // events matching some injection
  std::optional<double> precision;  // absent when nothing was detected
  std::optional<double> recall;     // absent when nothing was injected
};

struct Evaluation {
  std::vector<TypeScore> per_type;  // kAnomalyTypes order
  std::optional<double> overall_recall;
  std::optional<double> overall_precision;
};

/// Ground truth with identities in the analysed (anonymized) form.
struct LabeledInjection {
  Date day;
  AnomalyType type = AnomalyType::AuthBurst;
  std::vector<DeviceId> devices;
  std::vector<ApId> aps;
};

std::vector<LabeledInjection> anonymize_truth(const GroundTruth& truth, const Salt& salt);

/// An injection is recalled iff an event of the same type falls on the same
/// day and, when the event is scoped, its device is one of the injection's
/// devices or (for AP-scoped events) its AP is one of the injection's APs.
/// Network-wide events match any injection of their type and day.
Evaluation evaluate(std::span<const AnomalyEvent> anomalies, std::span<const LabeledInjection> truth);

Json evaluation_to_json(const Evaluation& e);

}  // namespace wlan
