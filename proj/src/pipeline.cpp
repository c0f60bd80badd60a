#include "wlan/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include <openssl/evp.h>

namespace wlan {

namespace {

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad value for " + std::string(key) + ": " + std::string(text));
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad value for " + std::string(key) + ": " + std::string(text));
  }
  return v;
}

std::string hex(const unsigned char* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out += kDigits[data[i] >> 4];
    out += kDigits[data[i] & 0xf];
  }
  return out;
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

void PipelineConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw std::invalid_argument("expected key=value: " + std::string(assignment));
  }
  const auto key = assignment.substr(0, eq);
  const auto value = assignment.substr(eq + 1);
  auto& d = detection;
  auto& p = prescriptive;

  if (key == "flag_rule") {
    const auto rule = parse_flag_rule(value);
    if (!rule) throw std::invalid_argument("flag_rule must be all or any");
    p.rule = *rule;
  } else if (key == "zone_offset_minutes") {
    descriptive.zone.offset_minutes = parse_int<int>(key, value);
    d.zone = descriptive.zone;
  } else if (key == "overload_threshold") {
    descriptive.overload_threshold = parse_int<int>(key, value);
  } else if (key == "unexpected_disconnect_minutes") {
    descriptive.unexpected_disconnect_minutes = parse_double(key, value);
  } else if (key == "window") {
    d.window = parse_int<int>(key, value);
  } else if (key == "k") {
    d.k = p.k = parse_double(key, value);
  } else if (key == "max_concurrent") {
    d.max_concurrent = parse_int<int>(key, value);
  } else if (key == "n_trees") {
    d.n_trees = parse_int<int>(key, value);
  } else if (key == "subsample") {
    d.subsample = parse_int<int>(key, value);
  } else if (key == "seed") {
    d.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "iforest_floor") {
    d.iforest_floor = parse_double(key, value);
  } else if (key == "dbscan_eps") {
    d.dbscan_eps = parse_double(key, value);
  } else if (key == "dbscan_min_pts") {
    d.dbscan_min_pts = parse_int<int>(key, value);
  } else if (key == "dns_share_ratio") {
    d.dns_share_ratio = parse_double(key, value);
  } else if (key == "dns_min_device_bytes") {
    d.dns_min_device_bytes = parse_int<std::uint64_t>(key, value);
  } else if (key == "heavy_hitter_ratio") {
    d.heavy_hitter_ratio = parse_double(key, value);
  } else if (key == "auth_burst_min") {
    d.auth_burst_min = parse_int<std::int64_t>(key, value);
  } else if (key == "latency_bound_ms") {
    p.latency_bound_ms = parse_double(key, value);
  } else if (key == "loss_bound_pct") {
    p.loss_bound_pct = parse_double(key, value);
  } else if (key == "capacity_days") {
    p.capacity_days = parse_int<int>(key, value);
  } else {
    throw std::invalid_argument("unknown config key: " + std::string(key));
  }
}

Json config_to_json(const PipelineConfig& c) {
  const auto& d = c.detection;
  const auto& p = c.prescriptive;
  return Json{{"zone_offset_minutes", c.descriptive.zone.offset_minutes},
              {"overload_threshold", c.descriptive.overload_threshold},
              {"unexpected_disconnect_minutes", c.descriptive.unexpected_disconnect_minutes},
              {"window", d.window},
              {"k", d.k},
              {"max_concurrent", d.max_concurrent},
              {"n_trees", d.n_trees},
              {"subsample", d.subsample},
              {"seed", d.seed},
              {"iforest_floor", d.iforest_floor},
              {"dbscan_eps", d.dbscan_eps},
              {"dbscan_min_pts", d.dbscan_min_pts},
              {"dns_share_ratio", d.dns_share_ratio},
              {"dns_min_device_bytes", d.dns_min_device_bytes},
              {"heavy_hitter_ratio", d.heavy_hitter_ratio},
              {"auth_burst_min", d.auth_burst_min},
              {"latency_bound_ms", p.latency_bound_ms},
              {"loss_bound_pct", p.loss_bound_pct},
              {"flag_rule", to_string(p.rule)},
              {"capacity_days", p.capacity_days}};
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  for (const auto& [key, value] : j.items()) {
    c.set(key + "=" + (value.is_string() ? value.get<std::string>() : value.dump()));
  }
  return c;
}

std::string input_digest(std::span<const SessionRecord> records) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 unavailable");
  }
  for (const auto& r : records) {
    std::string line = encode_line(r);
    line += '\n';
    EVP_DigestUpdate(ctx, line.data(), line.size());
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  return hex(digest, len);
}

AnalysisRun run_pipeline(std::span<const SessionRecord> records, const PipelineConfig& config) {
  AnalysisRun run;
  run.config = config;
  run.record_count = records.size();
  const auto now = std::chrono::system_clock::now();
  run.created_at = format_rfc3339(
      Timestamp{std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()});

  Stopwatch clock;
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::invalid_argument& e) {
      throw StageError(name, e.what(), true);
    } catch (const std::exception& e) {
      throw StageError(name, e.what(), false);
    }
    run.timings.push_back({name, clock.lap()});
  };

  stage("digest", [&] {
    run.input_digest = input_digest(records);
    std::string stamp;
    for (char ch : run.created_at) {
      if (std::isdigit(static_cast<unsigned char>(ch))) stamp += ch;
    }
    run.run_id = stamp + "-" + run.input_digest.substr(0, 12);
  });

  const DetectionConfig& det = config.detection;
  stage("descriptive", [&] {
    const auto span = record_span(records, config.descriptive.zone);
    if (!span || span->size() < kMinPipelineDays) {
      throw InsufficientData("need at least " + std::to_string(kMinPipelineDays) + " days of records, got " +
                             std::to_string(span ? span->size() : 0));
    }
    run.aggregates = aggregate_days(records, config.descriptive);
    run.ap_stats = ap_load_stats(records, std::nullopt, config.descriptive);
    run.hourly = hourly_profile(records, config.descriptive.zone);
    run.baseline = build_baseline(run.aggregates);
  });

  std::vector<AnomalyEvent> detections;
  auto append = [&](std::vector<AnomalyEvent> events) {
    detections.insert(detections.end(), std::make_move_iterator(events.begin()),
                      std::make_move_iterator(events.end()));
  };

  std::vector<FeatureVector> features;
  stage("features", [&] {
    for (const auto& a : run.aggregates) features.push_back(feature_vector(a, run.baseline));
  });

  stage("isolation_forest", [&] {
    const Eigen::MatrixXd x = feature_matrix(features);
    run.model = fit_isolation_forest(x, det.n_trees, det.subsample, det.seed);
    append(isolation_forest_events(run.model, features));
  });

  stage("dbscan", [&] { append(dbscan_events(features, det.dbscan_eps, det.dbscan_min_pts)); });

  stage("thresholds", [&] {
    const std::array<std::pair<Metric, AnomalyType>, 3> watched = {{
        {Metric::AuthFailures, AnomalyType::AuthBurst},
        {Metric::TrafficGb, AnomalyType::TrafficSpike},
        {Metric::OverloadPct, AnomalyType::ApOverload},
    }};
    for (const auto& [metric, type] : watched) {
      try {
        append(dynamic_threshold_alerts(metric_series(run.aggregates, metric, type), det.window, det.k));
      } catch (const SeriesTooShort&) {
        // Too few days for a rolling band; the other detectors still run.
      }
    }
    for (const auto& a : run.aggregates) append(protocol_anomaly(a.day, a.proto_share, run.baseline, det.k));
  });

  stage("entities", [&] {
    append(detect_duplicate_devices(records, det.max_concurrent, det.zone));
    append(detect_auth_bursts(records, det));
    append(detect_dns_cohorts(records, det));
    append(detect_heavy_hitters(records, det));
  });

  stage("classify", [&] {
    run.anomalies = classify(std::move(detections), SeverityPolicy{det.k, det.iforest_floor, 3});
    std::map<Date, std::int64_t> counts;
    for (const auto& a : run.aggregates) counts[a.day] = 0;
    for (const auto& e : run.anomalies) ++counts[e.day];
    for (const auto& [day, n] : counts) run.daily_counts.push_back({day, n});
  });

  stage("prescriptive", [&] {
    run.recommendations =
        recommend(run.anomalies, run.ap_stats, config.prescriptive, run.aggregates, &run.baseline);
  });
  return run;
}

void save_run(const AnalysisRun& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  write_json(dir / "config.json", config_to_json(run.config));
  write_json(dir / "aggregates.json", Json(run.aggregates));
  write_json(dir / "baseline.json", Json(run.baseline));
  write_json(dir / "ap_stats.json", Json(run.ap_stats));

  Json hourly = Json::array();
  for (std::size_t h = 0; h < run.hourly.size(); ++h) {
    hourly.push_back(Json{{"hour", h}, {"mean_concurrent", run.hourly[h]}});
  }
  write_json(dir / "hourly_profile.json", hourly);
  write_json(dir / "model.json", model_to_json(run.model));

  Json counts = Json::array();
  for (const auto& c : run.daily_counts) counts.push_back(Json{{"day", c.day.iso()}, {"anomalies", c.anomalies}});
  write_json(dir / "anomalies.json", Json{{"daily_counts", counts}, {"events", Json(run.anomalies)}});
  write_json(dir / "recommendations.json", Json(run.recommendations));

  Json timings = Json::array();
  for (const auto& t : run.timings) timings.push_back(Json{{"stage", t.stage}, {"milliseconds", t.milliseconds}});
  write_json(dir / "manifest.json",
             Json{{"format", "wlan-analysis-run"},
                  {"version", 1},
                  {"run_id", run.run_id},
                  {"created_at", run.created_at},
                  {"input_digest", run.input_digest},
                  {"digest_algorithm", "sha256 of canonical JSONL, one LF-terminated line per record"},
                  {"record_count", run.record_count},
                  {"artifacts",
                   {"config.json", "aggregates.json", "baseline.json", "ap_stats.json", "hourly_profile.json",
                    "model.json", "anomalies.json", "recommendations.json"}},
                  {"timings", timings}});
}

AnalysisRun load_run(const std::filesystem::path& dir) {
  AnalysisRun run;
  const Json manifest = read_json(dir / "manifest.json");
  if (manifest.value("format", "") != "wlan-analysis-run") throw IoError(dir.string() + " is not a run directory");
  try {
    run.run_id = manifest.at("run_id").get<std::string>();
    run.created_at = manifest.at("created_at").get<std::string>();
    run.input_digest = manifest.at("input_digest").get<std::string>();
    run.record_count = manifest.at("record_count").get<std::size_t>();
    for (const auto& t : manifest.at("timings")) {
      run.timings.push_back({t.at("stage").get<std::string>(), t.at("milliseconds").get<double>()});
    }
    run.config = config_from_json(read_json(dir / "config.json"));
    run.aggregates = read_json(dir / "aggregates.json").get<std::vector<DailyAggregate>>();
    run.baseline = read_json(dir / "baseline.json").get<BaselineProfile>();
    run.ap_stats = read_json(dir / "ap_stats.json").get<std::vector<ApStats>>();
    const Json hourly = read_json(dir / "hourly_profile.json");
    for (const auto& h : hourly) {
      run.hourly.at(h.at("hour").get<std::size_t>()) = h.at("mean_concurrent").get<double>();
    }
    run.model = model_from_json(read_json(dir / "model.json"));
    const Json anomalies = read_json(dir / "anomalies.json");
    run.anomalies = anomalies.at("events").get<std::vector<AnomalyEvent>>();
    for (const auto& c : anomalies.at("daily_counts")) {
      const auto day = Date::parse(c.at("day").get<std::string>());
      if (!day) throw std::invalid_argument("bad day in daily_counts");
      run.daily_counts.push_back({*day, c.at("anomalies").get<std::int64_t>()});
    }
    run.recommendations = read_json(dir / "recommendations.json").get<std::vector<Recommendation>>();
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(dir.string() + ": malformed run artifact: " + e.what());
  }
  return run;
}

std::vector<LabeledInjection> anonymize_truth(const GroundTruth& truth, const Salt& salt) {
  Anonymizer anonymize(salt);
  std::vector<LabeledInjection> out;
  for (const auto& e : truth.entries) {
    LabeledInjection l;
    l.day = e.day;
    l.type = e.type;
    l.aps = e.aps;
    for (const auto& mac : e.devices) l.devices.push_back(anonymize(mac));
    out.push_back(std::move(l));
  }
  return out;
}

namespace {

bool matches(const AnomalyEvent& e, const LabeledInjection& l) {
  if (e.type != l.type || e.day != l.day) return false;
  if (e.device) return std::find(l.devices.begin(), l.devices.end(), *e.device) != l.devices.end();
  if (e.ap) return std::find(l.aps.begin(), l.aps.end(), *e.ap) != l.aps.end();
  return true;
}

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Evaluation evaluate(std::span<const AnomalyEvent> anomalies, std::span<const LabeledInjection> truth) {
  Evaluation ev;
  std::int64_t injected = 0, recalled = 0, detected = 0, confirmed = 0;
  for (AnomalyType type : kAnomalyTypes) {
    TypeScore s;
    s.type = type;
    for (const auto& l : truth) {
      if (l.type != type) continue;
      ++s.injected;
      if (std::any_of(anomalies.begin(), anomalies.end(), [&](const AnomalyEvent& e) { return matches(e, l); })) {
        ++s.recalled;
      }
    }
    for (const auto& e : anomalies) {
      if (e.type != type) continue;
      ++s.detected;
      if (std::any_of(truth.begin(), truth.end(), [&](const LabeledInjection& l) { return matches(e, l); })) {
        ++s.confirmed;
      }
    }
    s.precision = ratio(s.confirmed, s.detected);
    s.recall = ratio(s.recalled, s.injected);
    injected += s.injected;
    recalled += s.recalled;
    detected += s.detected;
    confirmed += s.confirmed;
    ev.per_type.push_back(s);
  }
  ev.overall_recall = ratio(recalled, injected);
  ev.overall_precision = ratio(confirmed, detected);
  return ev;
}

Json evaluation_to_json(const Evaluation& e) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json types = Json::array();
  for (const auto& s : e.per_type) {
    types.push_back(Json{{"type", to_string(s.type)},
                         {"injected", s.injected},
                         {"recalled", s.recalled},
                         {"detected", s.detected},
                         {"confirmed", s.confirmed},
                         {"precision", opt(s.precision)},
                         {"recall", opt(s.recall)}});
  }
  return Json{{"per_type", types},
              {"overall_recall", opt(e.overall_recall)},
              {"overall_precision", opt(e.overall_precision)}};
}

}  // namespace wlan
