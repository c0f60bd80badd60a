#pragma once

#include <string>

#include "json.hpp"
#include "wlan/domain.hpp"

namespace wlan {

using Json = nlohmann::ordered_json;

/// Canonical JSONL encoding: `ts, device, ap, kind`, then the fields that
/// apply to the kind, in wire order. No trailing newline.
std::string encode_line(const SessionRecord& record);
std::string encode_line(const TraceRecord& record);

void to_json(Json& j, const DailyAggregate& a);
void from_json(const Json& j, DailyAggregate& a);
void to_json(Json& j, const BaselineProfile& b);
void from_json(const Json& j, BaselineProfile& b);
void to_json(Json& j, const ApStats& s);
void from_json(const Json& j, ApStats& s);
void to_json(Json& j, const AnomalyEvent& e);
void from_json(const Json& j, AnomalyEvent& e);
void to_json(Json& j, const Recommendation& r);
void from_json(const Json& j, Recommendation& r);

}  // namespace wlan
