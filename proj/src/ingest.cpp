#include "wlan/ingest.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "json.hpp"

namespace wlan {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' ||
                        s.front() == '\n' || s.front() == '\xEF' || s.front() == '\xBB' ||
                        s.front() == '\xBF')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw MalformedLine(line_no, "unterminated quote");
  cells.push_back(std::move(cell));
  return cells;
}

constexpr std::array<std::string_view, 4> kRequiredFields = {"ts", "device", "ap", "kind"};

}  // namespace

std::optional<Salt> Salt::from_hex(std::string_view hex) {
  hex = trim(hex);
  if (hex.size() != 32) return std::nullopt;
  Bytes bytes{};
  for (std::size_t i = 0; i < 16; ++i) {
    unsigned v = 0;
    auto res = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, v, 16);
    if (res.ec != std::errc{} || res.ptr != hex.data() + 2 * i + 2) return std::nullopt;
    bytes[i] = static_cast<std::uint8_t>(v);
  }
  return Salt(bytes);
}

Salt Salt::load(const std::optional<std::filesystem::path>& salt_file) {
  if (salt_file) {
    std::ifstream in(*salt_file);
    if (!in) throw std::runtime_error("cannot read salt file " + salt_file->string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto salt = from_hex(text);
    if (!salt) throw std::runtime_error("salt file must hold 32 hex characters");
    return *salt;
  }
  if (const char* env = std::getenv("WLC_SALT_HEX")) {
    auto salt = from_hex(env);
    if (!salt) throw std::runtime_error("WLC_SALT_HEX must hold 32 hex characters");
    return *salt;
  }
  throw std::runtime_error("no anonymization salt: set WLC_SALT_HEX or pass --salt-file");
}

DeviceId anonymize_device(const MacAddress& mac, const Salt& salt) {
  const std::string normalized = mac.str();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  HMAC(EVP_sha256(), salt.bytes().data(), static_cast<int>(salt.bytes().size()),
       reinterpret_cast<const unsigned char*>(normalized.data()), normalized.size(), digest, &len);
  DeviceId::Bytes out{};
  std::copy(digest, digest + out.size(), out.begin());
  return DeviceId(out);
}

DeviceId anonymize_device(std::string_view mac, const Salt& salt) {
  auto parsed = MacAddress::parse(mac);
  if (!parsed) throw InvalidMacFormat("invalid MAC address format");
  return anonymize_device(*parsed, salt);
}

DeviceId Anonymizer::operator()(const MacAddress& mac) {
  auto it = cache_.find(mac);
  if (it != cache_.end()) return it->second;
  DeviceId id = anonymize_device(mac, salt_);
  cache_.emplace(mac, id);
  return id;
}

SessionRecord Anonymizer::operator()(const TraceRecord& t) {
  SessionRecord r;
  r.ts = t.ts;
  r.device = (*this)(t.device);
  r.ap = t.ap;
  r.kind = t.kind;
  r.session_minutes = t.session_minutes;
  r.bytes_up = t.bytes_up;
  r.bytes_down = t.bytes_down;
  r.proto = t.proto;
  r.latency_ms = t.latency_ms;
  r.loss_pct = t.loss_pct;
  return r;
}

std::optional<LogFormat> parse_log_format(std::string_view name) {
  if (name == "jsonl") return LogFormat::Jsonl;
  if (name == "csv") return LogFormat::Csv;
  return std::nullopt;
}

MalformedLine::MalformedLine(std::size_t line_no, const std::string& reason)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + reason), line_no_(line_no) {}

SessionLogReader::SessionLogReader(std::istream& in, LogFormat format) : in_(in), format_(format) {}

std::optional<RawRecord> SessionLogReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++physical_line_;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (format_ == LogFormat::Csv && header_.empty()) {
      header_ = split_csv(body, physical_line_);
      for (auto& h : header_) h = std::string(trim(h));
      continue;
    }
    ++lines_read_;
    return format_ == LogFormat::Jsonl ? parse_json(body, physical_line_)
                                       : parse_csv(body, physical_line_);
  }
  if (in_.bad()) throw IoError("read error");
  return std::nullopt;
}

RawRecord SessionLogReader::parse_json(std::string_view line, std::size_t line_no) const {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) throw MalformedLine(line_no, "invalid JSON");
  if (!j.is_object()) throw MalformedLine(line_no, "expected a JSON object");
  for (auto field : kRequiredFields) {
    if (!j.contains(field)) throw MalformedLine(line_no, "missing field '" + std::string(field) + "'");
  }
  RawRecord raw;
  raw.line_no = line_no;
  auto text = [&](const char* key, std::optional<std::string>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    if (!it->is_string()) throw MalformedLine(line_no, std::string("field '") + key + "' must be a string");
    out = it->get<std::string>();
  };
  auto number = [&](const char* key, std::optional<double>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    if (!it->is_number()) throw MalformedLine(line_no, std::string("field '") + key + "' must be a number");
    out = it->get<double>();
  };
  text("ts", raw.ts);
  text("device", raw.device);
  text("ap", raw.ap);
  text("kind", raw.kind);
  number("session_minutes", raw.session_minutes);
  number("bytes_up", raw.bytes_up);
  number("bytes_down", raw.bytes_down);
  text("proto", raw.proto);
  number("latency_ms", raw.latency_ms);
  number("loss_pct", raw.loss_pct);
  return raw;
}

RawRecord SessionLogReader::parse_csv(std::string_view line, std::size_t line_no) const {
  const auto cells = split_csv(line, line_no);
  if (cells.size() != header_.size()) {
    throw MalformedLine(line_no, "expected " + std::to_string(header_.size()) + " columns, got " +
                                     std::to_string(cells.size()));
  }
  RawRecord raw;
  raw.line_no = line_no;
  auto cell = [&](std::string_view name) -> std::optional<std::string_view> {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (header_[i] == name) {
        auto v = trim(cells[i]);
        if (v.empty()) return std::nullopt;
        return v;
      }
    }
    return std::nullopt;
  };
  for (auto field : kRequiredFields) {
    if (!cell(field)) throw MalformedLine(line_no, "missing field '" + std::string(field) + "'");
  }
  auto text = [&](std::string_view key, std::optional<std::string>& out) {
    if (auto v = cell(key)) out = std::string(*v);
  };
  auto number = [&](std::string_view key, std::optional<double>& out) {
    auto v = cell(key);
    if (!v) return;
    double d = 0.0;
    auto res = std::from_chars(v->data(), v->data() + v->size(), d);
    if (res.ec != std::errc{} || res.ptr != v->data() + v->size()) {
      throw MalformedLine(line_no, "field '" + std::string(key) + "' must be a number");
    }
    out = d;
  };
  text("ts", raw.ts);
  text("device", raw.device);
  text("ap", raw.ap);
  text("kind", raw.kind);
  number("session_minutes", raw.session_minutes);
  number("bytes_up", raw.bytes_up);
  number("bytes_down", raw.bytes_down);
  text("proto", raw.proto);
  number("latency_ms", raw.latency_ms);
  number("loss_pct", raw.loss_pct);
  return raw;
}

ParseResult parse_session_log(std::istream& in, LogFormat format, Strictness strictness) {
  ParseResult result;
  SessionLogReader reader(in, format);
  for (;;) {
    try {
      auto raw = reader.next();
      if (!raw) break;
      result.records.push_back(std::move(*raw));
    } catch (const MalformedLine& e) {
      if (strictness == Strictness::Strict) throw;
      result.errors.push_back(e);
    }
  }
  return result;
}

IngestResult ingest_stream(std::istream& in, const std::optional<Salt>& salt,
                           const IngestOptions& options) {
  if (!options.pre_anonymized && !salt) {
    throw std::invalid_argument("a salt is required unless input is pre-anonymized");
  }
  IngestResult result;
  SessionLogReader reader(in, options.format);
  std::optional<Anonymizer> anonymizer;
  if (salt) anonymizer.emplace(*salt);

  auto reject = [&](std::size_t line_no, const std::string& kind, const std::string& reason) {
    if (options.strictness == Strictness::Strict) throw MalformedLine(line_no, reason);
    ++result.stats.skipped;
    ++result.stats.errors[kind];
  };

  for (;;) {
    std::optional<RawRecord> raw;
    try {
      raw = reader.next();
    } catch (const MalformedLine& e) {
      if (options.strictness == Strictness::Strict) throw;
      reject(e.line_no(), "MalformedLine", e.what());
      continue;
    }
    if (!raw) break;
    try {
      if (!options.pre_anonymized && raw->device) {
        auto mac = MacAddress::parse(*raw->device);
        if (!mac) throw InvalidMacFormat("invalid MAC address format");
        raw->device = (*anonymizer)(*mac).hex();
      }
      result.records.push_back(validate(*raw, options.window));
      ++result.stats.accepted;
    } catch (const InvalidMacFormat& e) {
      reject(raw->line_no, "InvalidMacFormat", e.what());
    } catch (const ValidationError& e) {
      reject(raw->line_no, std::string(to_string(e.kind())), e.what());
    }
  }
  result.stats.lines_read = reader.lines_read();
  return result;
}

IngestResult ingest_file(const std::filesystem::path& path, const std::optional<Salt>& salt,
                         const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return ingest_stream(in, salt, options);
}

}  // namespace wlan
