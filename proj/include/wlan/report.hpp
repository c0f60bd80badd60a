#pragma once

#include <filesystem>
#include <string>

#include "wlan/codec.hpp"
#include "wlan/pipeline.hpp"

namespace wlan {

struct ReportDocuments {
  Json summary;               // report.json
  std::string metrics_csv;    // daily metric table: mean, min, max
  std::string aps_csv;        // one row per AP, monthly connections descending
  std::string recommendations_txt;
  std::string html;           // static single-file report
};

ReportDocuments render_report(const AnalysisRun& run);

/// Writes report.json, metrics.csv, aps.csv, recommendations.txt and
/// report.html into `dir`.
void write_report(const ReportDocuments& docs, const std::filesystem::path& dir);

}  // namespace wlan
