#include "wlan/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace wlan {

namespace {

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct MetricRow {
  const char* label;
  int precision;
  std::function<double(std::size_t)> value;  // by day index
};

std::vector<MetricRow> metric_rows(const AnalysisRun& run) {
  const auto& a = run.aggregates;
  auto anomalies = [&run](std::size_t i) {
    const Date day = run.aggregates[i].day;
    const auto it = std::find_if(run.daily_counts.begin(), run.daily_counts.end(),
                                 [&](const DailyCount& c) { return c.day == day; });
    return it == run.daily_counts.end() ? 0.0 : static_cast<double>(it->anomalies);
  };
  return {
      {"Usuarios activos (conexiones totales)", 0, [&a](std::size_t i) { return double(a[i].connections); }},
      {"Duración promedio de sesión (minutos)", 1, [&a](std::size_t i) { return a[i].mean_session_minutes; }},
      {"Intentos fallidos de conexión", 0, [&a](std::size_t i) { return double(a[i].auth_failures); }},
      {"Tráfico total (GB/día)", 1, [&a](std::size_t i) { return a[i].traffic_gb; }},
      {"% de puntos de acceso sobrecargados", 1, [&a](std::size_t i) { return a[i].overload_pct; }},
      {"Anomalías detectadas", 1, anomalies},
  };
}

struct Summary {
  double mean = 0.0, min = 0.0, max = 0.0;
};

Summary summarize(const MetricRow& row, std::size_t days) {
  Summary s;
  if (days == 0) return s;
  s.min = s.max = row.value(0);
  for (std::size_t i = 0; i < days; ++i) {
    const double v = row.value(i);
    s.mean += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean /= static_cast<double>(days);
  return s;
}

std::string recommendation_line(const Recommendation& r) {
  std::string line = "[" + std::string(to_string(r.action)) + "] " +
                     (r.target ? r.target->str() : std::string("network")) + ": " + r.rationale;
  if (!r.linked_events.empty()) {
    line += " (events";
    for (auto id : r.linked_events) line += " #" + std::to_string(id);
    line += ")";
  }
  return line;
}

/// Inline SVG polyline over evenly spaced points.
std::string line_chart(const std::vector<double>& ys, const std::string& title, const std::string& colour) {
  const double w = 640, h = 180, pad = 30;
  std::ostringstream svg;
  svg << "<figure><figcaption>" << html_escape(title) << "</figcaption>"
      << "<svg viewBox=\"0 0 " << w << ' ' << h << "\" width=\"" << w << "\" height=\"" << h << "\">"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>";
  if (!ys.empty()) {
    const double lo = std::min(0.0, *std::min_element(ys.begin(), ys.end()));
    double hi = *std::max_element(ys.begin(), ys.end());
    if (hi <= lo) hi = lo + 1.0;
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double x = pad + (ys.size() == 1 ? 0.0 : (w - 2 * pad) * double(i) / double(ys.size() - 1));
      const double y = h - pad - (h - 2 * pad) * (ys[i] - lo) / (hi - lo);
      svg << fmt(x, 1) << ',' << fmt(y, 1) << ' ';
    }
    svg << "\"/><text x=\"4\" y=\"" << pad << "\" font-size=\"11\">" << fmt(hi, 0) << "</text>"
        << "<text x=\"4\" y=\"" << h - pad << "\" font-size=\"11\">" << fmt(lo, 0) << "</text>";
  }
  svg << "</svg></figure>\n";
  return svg.str();
}

std::string bar_chart(const HourlyProfile& hourly, const std::string& title) {
  const double w = 640, h = 180, pad = 20;
  const double hi = std::max(1.0, *std::max_element(hourly.begin(), hourly.end()));
  const double bw = (w - 2 * pad) / 24.0;
  std::ostringstream svg;
  svg << "<figure><figcaption>" << html_escape(title) << "</figcaption>"
      << "<svg viewBox=\"0 0 " << w << ' ' << h << "\" width=\"" << w << "\" height=\"" << h << "\">"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>";
  for (std::size_t i = 0; i < hourly.size(); ++i) {
    const double bh = (h - 2 * pad) * hourly[i] / hi;
    svg << "<rect x=\"" << fmt(pad + bw * double(i) + 1, 1) << "\" y=\"" << fmt(h - pad - bh, 1)
        << "\" width=\"" << fmt(bw - 2, 1) << "\" height=\"" << fmt(bh, 1) << "\" fill=\"#4a7ab5\"><title>"
        << i << ":00 " << fmt(hourly[i], 1) << "</title></rect>";
    if (i % 3 == 0) {
      svg << "<text x=\"" << fmt(pad + bw * double(i), 1) << "\" y=\"" << h - 4 << "\" font-size=\"10\">" << i
          << "h</text>";
    }
  }
  svg << "</svg></figure>\n";
  return svg.str();
}

}  // namespace

ReportDocuments render_report(const AnalysisRun& run) {
  ReportDocuments docs;
  const auto rows = metric_rows(run);
  const std::size_t days = run.aggregates.size();

  std::string metrics = "Métrica,Promedio Diario,Valor Mínimo,Valor Máximo\n";
  Json metric_json = Json::array();
  for (const auto& row : rows) {
    const Summary s = summarize(row, days);
    metrics += csv_field(row.label) + "," + fmt(s.mean, 1) + "," + fmt(s.min, row.precision) + "," +
               fmt(s.max, row.precision) + "\n";
    metric_json.push_back(Json{{"metric", row.label}, {"daily_mean", s.mean}, {"min", s.min}, {"max", s.max}});
  }
  docs.metrics_csv = metrics;

  std::vector<ApStats> aps = run.ap_stats;
  std::stable_sort(aps.begin(), aps.end(), [](const ApStats& a, const ApStats& b) {
    return a.monthly_connections > b.monthly_connections;
  });
  std::string ap_csv = "ID del AP,Conexiones Mensuales,Latencia Promedio (ms),Pérdida de Paquetes (%)\n";
  for (const auto& s : aps) {
    ap_csv += s.ap.str() + "," + std::to_string(s.monthly_connections) + "," +
              (s.mean_latency_ms ? fmt(*s.mean_latency_ms, 1) : "") + "," +
              (s.mean_loss_pct ? fmt(*s.mean_loss_pct, 2) : "") + "\n";
  }
  docs.aps_csv = ap_csv;

  const auto flagged = flag_aps(run.ap_stats, run.config.prescriptive.latency_bound_ms,
                                run.config.prescriptive.loss_bound_pct, run.config.prescriptive.rule);
  std::string text = "Recommendations\n===============\n";
  if (run.recommendations.empty()) text += "none\n";
  for (const auto& r : run.recommendations) text += "- " + recommendation_line(r) + "\n";
  docs.recommendations_txt = text;

  std::map<std::string, std::int64_t> by_type;
  for (const auto& e : run.anomalies) {
    ++by_type[std::string(to_string(e.type)) + "/" + std::string(to_string(e.severity))];
  }
  Json flagged_json = Json::array();
  for (const auto& ap : flagged) flagged_json.push_back(ap.str());
  Json counts = Json::array();
  for (const auto& c : run.daily_counts) counts.push_back(Json{{"day", c.day.iso()}, {"anomalies", c.anomalies}});
  Json hourly = Json::array();
  for (double v : run.hourly) hourly.push_back(v);
  docs.summary = Json{{"run_id", run.run_id},
                      {"input_digest", run.input_digest},
                      {"days", days},
                      {"metrics", metric_json},
                      {"hourly_profile", hourly},
                      {"top_aps", Json(std::vector<ApStats>(aps.begin(), aps.begin() + std::min<std::ptrdiff_t>(10, aps.size())))},
                      {"flagged_aps", flagged_json},
                      {"daily_anomaly_counts", counts},
                      {"anomalies_by_type_severity", by_type},
                      {"anomalies", Json(run.anomalies)},
                      {"recommendations", Json(run.recommendations)}};

  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>WLAN analysis "
       << html_escape(run.run_id) << "</title>\n<style>"
       << "body{font-family:sans-serif;margin:2em;max-width:60em}table{border-collapse:collapse;margin:1em 0}"
       << "td,th{border:1px solid #ccc;padding:.25em .6em;text-align:right}td:first-child,th:first-child{text-align:left}"
       << ".High{color:#b00}.Medium{color:#a60}.Low{color:#666}figure{margin:1em 0}"
       << "</style></head><body>\n<h1>WLAN analysis</h1>\n<p>Run " << html_escape(run.run_id) << ", " << days
       << " days, input digest <code>" << html_escape(run.input_digest.substr(0, 16)) << "</code></p>\n";

  html << "<h2>Daily metrics</h2>\n<table><tr><th>Métrica</th><th>Promedio Diario</th><th>Valor Mínimo</th>"
       << "<th>Valor Máximo</th></tr>\n";
  for (const auto& row : rows) {
    const Summary s = summarize(row, days);
    html << "<tr><td>" << html_escape(row.label) << "</td><td>" << fmt(s.mean, 1) << "</td><td>"
         << fmt(s.min, row.precision) << "</td><td>" << fmt(s.max, row.precision) << "</td></tr>\n";
  }
  html << "</table>\n";

  std::vector<double> conn, gb;
  for (const auto& a : run.aggregates) {
    conn.push_back(static_cast<double>(a.connections));
    gb.push_back(a.traffic_gb);
  }
  html << line_chart(conn, "Daily connections", "#4a7ab5") << line_chart(gb, "Daily traffic (GB)", "#b5714a")
       << bar_chart(run.hourly, "Mean concurrent sessions by local hour");

  html << "<h2>Top access points</h2>\n<table><tr><th>ID del AP</th><th>Conexiones Mensuales</th>"
       << "<th>Latencia Promedio (ms)</th><th>Pérdida de Paquetes (%)</th></tr>\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(10, aps.size()); ++i) {
    const auto& s = aps[i];
    html << "<tr><td>" << html_escape(s.ap.str()) << "</td><td>" << s.monthly_connections << "</td><td>"
         << (s.mean_latency_ms ? fmt(*s.mean_latency_ms, 1) : "") << "</td><td>"
         << (s.mean_loss_pct ? fmt(*s.mean_loss_pct, 2) : "") << "</td></tr>\n";
  }
  html << "</table>\n";

  html << "<h2>Anomalies</h2>\n";
  if (run.anomalies.empty()) {
    html << "<p>No anomalies detected.</p>\n";
  } else {
    html << "<table><tr><th>#</th><th>Day</th><th>Type</th><th>Severity</th><th>Detector</th><th>Scope</th>"
         << "<th>Score</th><th>Evidence</th></tr>\n";
    for (const auto& e : run.anomalies) {
      const std::string scope = e.device ? e.device->hex().substr(0, 12) : e.ap ? e.ap->str() : "network";
      html << "<tr><td>" << e.id << "</td><td>" << e.day.iso() << "</td><td>" << to_string(e.type)
           << "</td><td class=\"" << to_string(e.severity) << "\">" << to_string(e.severity) << "</td><td>"
           << to_string(e.detector) << "</td><td>" << html_escape(scope) << "</td><td>" << fmt(e.score, 2)
           << "</td><td style=\"text-align:left\">" << html_escape(e.evidence.text) << "</td></tr>\n";
    }
    html << "</table>\n";
  }

  html << "<h2>Recommendations</h2>\n";
  if (run.recommendations.empty()) {
    html << "<p>No recommendations.</p>\n";
  } else {
    html << "<ul>\n";
    for (const auto& r : run.recommendations) html << "<li>" << html_escape(recommendation_line(r)) << "</li>\n";
    html << "</ul>\n";
  }
  html << "</body></html>\n";
  docs.html = html.str();
  return docs;
}

void write_report(const ReportDocuments& docs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw IoError("cannot write " + (dir / name).string());
  };
  put("report.json", docs.summary.dump(2) + "\n");
  put("metrics.csv", docs.metrics_csv);
  put("aps.csv", docs.aps_csv);
  put("recommendations.txt", docs.recommendations_txt);
  put("report.html", docs.html);
}

}  // namespace wlan
