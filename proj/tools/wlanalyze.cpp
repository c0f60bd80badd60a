// wlanalyze: command-line front end for simulation, ingest, analysis,
// detection, recommendations, reports and the metrics endpoint.
//
// Exit codes: 0 success, 1 bad input or usage, 2 internal failure.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wlan/pipeline.hpp"
#include "wlan/report.hpp"
#include "wlan/service.hpp"

namespace fs = std::filesystem;
using namespace wlan;

namespace {

/// Errors caused by what the user handed us.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  bool quiet = false;

  std::string in;
  std::string out;
  std::string labels;
  std::string run_dir;
  std::string ap_stats;
  std::optional<std::string> salt_file;
  bool pre_anonymized = false;
  bool strict = false;
  std::string format = "jsonl";

  std::optional<std::uint64_t> seed;
  int days = 30;
  std::vector<std::string> config;

  std::optional<int> overload_threshold;
  std::optional<int> window;
  std::optional<double> k;
  std::string flag_rule = "all";
  std::string addr = "127.0.0.1:9108";
  bool json = false;
};

void note(const Options& o, const std::string& msg) {
  if (!o.quiet) std::cerr << msg << '\n';
}

PipelineConfig pipeline_config(const Options& o) {
  PipelineConfig c;
  try {
    for (const auto& kv : o.config) c.set(kv);
    if (o.overload_threshold) c.descriptive.overload_threshold = *o.overload_threshold;
    if (o.window) c.detection.window = *o.window;
    if (o.k) c.detection.k = c.prescriptive.k = *o.k;
    if (o.seed) c.detection.seed = *o.seed;
    c.prescriptive.rule = *parse_flag_rule(o.flag_rule);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return c;
}

std::vector<SessionRecord> load_records(const Options& o) {
  IngestOptions opts;
  opts.strictness = o.strict ? Strictness::Strict : Strictness::Lenient;
  opts.pre_anonymized = o.pre_anonymized;
  const auto format = parse_log_format(o.format);
  if (!format) throw InputError("unknown --format " + o.format);
  opts.format = *format;

  std::optional<Salt> salt;
  if (!o.pre_anonymized) {
    try {
      salt = Salt::load(o.salt_file ? std::optional<fs::path>(*o.salt_file) : std::nullopt);
    } catch (const std::runtime_error& e) {
      throw InputError(e.what());
    }
  }
  IngestResult result = o.in == "-" ? ingest_stream(std::cin, salt, opts) : ingest_file(o.in, salt, opts);
  std::string summary = "ingest: " + std::to_string(result.stats.lines_read) + " lines, " +
                        std::to_string(result.stats.accepted) + " accepted, " +
                        std::to_string(result.stats.skipped) + " skipped";
  for (const auto& [kind, n] : result.stats.errors) summary += ", " + kind + "=" + std::to_string(n);
  note(o, summary);
  return std::move(result.records);
}

/// Writes to `path`, or stdout when empty or "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw InputError("cannot write " + path);
}

int cmd_simulate(const Options& o) {
  SimConfig cfg;
  try {
    cfg.days = o.days;
    for (const auto& kv : o.config) cfg.set(kv);
    cfg.validate();
  } catch (const InvalidConfig& e) {
    throw InputError(e.what());
  }
  const auto sim = generate_month(cfg, o.seed.value_or(42));
  if (o.out.empty() || o.out == "-") {
    write_traces(std::cout, sim.records);
  } else {
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + o.out);
    write_traces(out, sim.records);
  }
  if (!o.labels.empty()) emit(o.labels, truth_to_json(sim.truth).dump(2) + "\n");
  note(o, "simulate: " + std::to_string(sim.records.size()) + " records, " +
              std::to_string(sim.truth.entries.size()) + " injections");
  return 0;
}

int cmd_ingest(const Options& o) {
  const auto records = load_records(o);
  std::string content;
  for (const auto& r : records) content += encode_line(r) + "\n";
  emit(o.out, content);
  return 0;
}

int cmd_analyze(const Options& o) {
  const auto records = load_records(o);
  const auto cfg = pipeline_config(o);
  const auto aggregates = aggregate_days(records, cfg.descriptive);
  Json doc{{"aggregates", Json(aggregates)},
           {"ap_stats", Json(ap_load_stats(records, std::nullopt, cfg.descriptive))},
           {"hourly_profile", Json(hourly_profile(records, cfg.descriptive.zone))}};
  try {
    doc["baseline"] = Json(build_baseline(aggregates));
  } catch (const InsufficientData& e) {
    note(o, std::string("analyze: no baseline: ") + e.what());
    doc["baseline"] = nullptr;
  }
  emit(o.out, doc.dump(2) + "\n");
  return 0;
}

int cmd_detect(const Options& o) {
  const auto run = run_pipeline(load_records(o), pipeline_config(o));
  emit(o.out, Json(run.anomalies).dump(2) + "\n");
  note(o, "detect: " + std::to_string(run.anomalies.size()) + " anomalies");
  return 0;
}

int cmd_recommend(const Options& o) {
  auto cfg = pipeline_config(o);
  std::vector<AnomalyEvent> anomalies;
  std::vector<ApStats> stats;
  std::vector<DailyAggregate> aggregates;
  std::optional<BaselineProfile> baseline;
  if (!o.run_dir.empty()) {
    const auto run = load_run(o.run_dir);
    anomalies = run.anomalies;
    stats = run.ap_stats;
    aggregates = run.aggregates;
    baseline = run.baseline;
  }
  if (!o.ap_stats.empty()) {
    std::ifstream in(o.ap_stats);
    if (!in) throw InputError("cannot read " + o.ap_stats);
    try {
      stats = Json::parse(in).get<std::vector<ApStats>>();
    } catch (const std::exception& e) {
      throw InputError(o.ap_stats + ": " + e.what());
    }
  }
  if (o.run_dir.empty() && o.ap_stats.empty()) throw InputError("recommend needs --run or --ap-stats");
  const auto recs = recommend(anomalies, stats, cfg.prescriptive, aggregates, baseline ? &*baseline : nullptr);
  Json flagged = Json::array();
  for (const auto& ap : flag_aps(stats, cfg.prescriptive.latency_bound_ms, cfg.prescriptive.loss_bound_pct,
                                 cfg.prescriptive.rule)) {
    flagged.push_back(ap.str());
  }
  emit(o.out, Json{{"flagged_aps", flagged}, {"recommendations", Json(recs)}}.dump(2) + "\n");
  return 0;
}

int cmd_run(const Options& o) {
  if (o.out.empty()) throw InputError("run needs --out DIR");
  const auto run = run_pipeline(load_records(o), pipeline_config(o));
  save_run(run, o.out);
  if (!o.quiet) {
    std::cout << "run " << run.run_id << ": " << run.aggregates.size() << " days, " << run.anomalies.size()
              << " anomalies, " << run.recommendations.size() << " recommendations -> " << o.out << '\n';
  }
  return 0;
}

int cmd_evaluate(const Options& o) {
  const auto run = load_run(o.run_dir);
  std::ifstream in(o.labels);
  if (!in) throw InputError("cannot read " + o.labels);
  GroundTruth truth;
  try {
    truth = truth_from_json(Json::parse(in));
  } catch (const std::exception& e) {
    throw InputError(o.labels + ": " + e.what());
  }
  Salt salt = [&] {
    try {
      return Salt::load(o.salt_file ? std::optional<fs::path>(*o.salt_file) : std::nullopt);
    } catch (const std::runtime_error& e) {
      throw InputError(e.what());
    }
  }();
  const auto ev = evaluate(run.anomalies, anonymize_truth(truth, salt));
  if (o.json) {
    emit(o.out, evaluation_to_json(ev).dump(2) + "\n");
    return 0;
  }
  auto cell = [](const std::optional<double>& v) {
    char buf[32];
    if (!v) return std::string("     -");
    std::snprintf(buf, sizeof buf, "%6.3f", *v);
    return std::string(buf);
  };
  std::string table = "type                     injected recalled detected confirmed precision recall\n";
  for (const auto& s : ev.per_type) {
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %8lld %8lld %8lld %9lld    %s %s\n",
                  std::string(to_string(s.type)).c_str(), static_cast<long long>(s.injected),
                  static_cast<long long>(s.recalled), static_cast<long long>(s.detected),
                  static_cast<long long>(s.confirmed), cell(s.precision).c_str(), cell(s.recall).c_str());
    table += line;
  }
  table += "overall precision " + cell(ev.overall_precision) + ", recall " + cell(ev.overall_recall) + "\n";
  emit(o.out, table);
  return 0;
}

int cmd_report(const Options& o) {
  if (o.out.empty()) throw InputError("report needs --out DIR");
  write_report(render_report(load_run(o.run_dir)), o.out);
  note(o, "report written to " + o.out);
  return 0;
}

MetricsService* g_service = nullptr;

extern "C" void on_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const Options& o) {
  const auto colon = o.addr.rfind(':');
  if (colon == std::string::npos) throw InputError("--addr must be host:port");
  int port = 0;
  try {
    port = std::stoi(o.addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw InputError("bad port in --addr " + o.addr);
  }
  const std::string host = o.addr.substr(0, colon);
  MetricsService service(make_snapshot(load_run(o.run_dir)));
  try {
    port = service.bind(host, port);
  } catch (const ServiceError& e) {
    std::cerr << "serve: " << e.what() << '\n';
    return 2;
  }
  DirectoryWatcher watcher(service, o.run_dir);
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  note(o, "serving " + o.run_dir + " on " + host + ":" + std::to_string(port));
  service.serve();
  g_service = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WLAN controller log analytics"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_flag("-q,--quiet", o.quiet, "Only write the requested artifact to stdout");

  auto input = [&](CLI::App* c) {
    c->add_option("--in", o.in, "Input log (JSONL or CSV; - for stdin)")->required();
    c->add_option("--format", o.format, "Input format")->check(CLI::IsMember({"jsonl", "csv"}));
    c->add_option("--salt-file", o.salt_file, "File holding the 32-hex anonymization salt (else WLC_SALT_HEX)");
    c->add_flag("--pre-anonymized", o.pre_anonymized, "Device fields are already 32-hex anonymized ids");
    c->add_flag("--strict", o.strict, "Abort on the first malformed or invalid line");
  };
  auto tuning = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Isolation forest seed");
    c->add_option("--overload-threshold", o.overload_threshold, "Concurrent clients above which an AP is overloaded");
    c->add_option("--window", o.window, "Rolling window in days for dynamic thresholds");
    c->add_option("--k", o.k, "Band width in standard deviations");
    c->add_option("--flag-rule", o.flag_rule, "Combine latency and loss bounds with all (AND) or any (OR)")
        ->check(CLI::IsMember({"all", "any"}));
    c->add_option("--config", o.config, "Extra key=value settings");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate a labeled synthetic month of controller logs");
  simulate->add_option("--days", o.days, "Number of days")->check(CLI::Range(7, 3660));
  simulate->add_option("--seed", o.seed, "Random seed (default 42)");
  simulate->add_option("--out", o.out, "Trace output (JSONL; default stdout)");
  simulate->add_option("--labels", o.labels, "Ground-truth output (JSON)");
  simulate->add_option("--config", o.config, "Simulator key=value overrides");

  auto* ingest = app.add_subcommand("ingest", "Parse, anonymize and validate a log into canonical JSONL");
  input(ingest);
  ingest->add_option("--out", o.out, "Output JSONL (default stdout)");

  auto* analyze = app.add_subcommand("analyze", "Daily aggregates, AP statistics, hourly profile, baseline");
  input(analyze);
  tuning(analyze);
  analyze->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* detect = app.add_subcommand("detect", "Run all detectors and print the classified anomalies");
  input(detect);
  tuning(detect);
  detect->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* rec = app.add_subcommand("recommend", "Recommendations from a run and/or AP statistics");
  rec->add_option("--run", o.run_dir, "Run directory")->check(CLI::ExistingDirectory);
  rec->add_option("--ap-stats", o.ap_stats, "JSON array of AP statistics (replaces the run's)");
  tuning(rec);
  rec->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* run = app.add_subcommand("run", "Full pipeline; writes a run directory");
  input(run);
  tuning(run);
  run->add_option("--out", o.out, "Run directory")->required();

  auto* eval = app.add_subcommand("evaluate", "Precision and recall of a run against simulator labels");
  eval->add_option("--run", o.run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--labels", o.labels, "Ground-truth JSON from simulate")->required();
  eval->add_option("--salt-file", o.salt_file, "Salt used when the run was ingested (else WLC_SALT_HEX)");
  eval->add_flag("--json", o.json, "JSON instead of a table");
  eval->add_option("--out", o.out, "Output (default stdout)");

  auto* report = app.add_subcommand("report", "Render JSON, CSV and HTML reports for a run");
  report->add_option("--run", o.run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", o.out, "Report directory")->required();

  auto* serve = app.add_subcommand("serve", "Read-only /metrics, /alerts and /healthz over a run directory");
  serve->add_option("--run", o.run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--addr", o.addr, "Bind address host:port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*ingest) return cmd_ingest(o);
    if (*analyze) return cmd_analyze(o);
    if (*detect) return cmd_detect(o);
    if (*rec) return cmd_recommend(o);
    if (*run) return cmd_run(o);
    if (*eval) return cmd_evaluate(o);
    if (*report) return cmd_report(o);
    if (*serve) return cmd_serve(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const MalformedLine& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.bad_input() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
