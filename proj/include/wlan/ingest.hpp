#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wlan/domain.hpp"

namespace wlan {

/// 16-byte anonymization key. Never serialized.
class Salt {
 public:
  using Bytes = std::array<std::uint8_t, 16>;

  explicit Salt(const Bytes& bytes) : bytes_(bytes) {}
  static std::optional<Salt> from_hex(std::string_view hex);
  /// `--salt-file` (hex text) takes precedence over `WLC_SALT_HEX`.
  /// Throws std::runtime_error if neither yields a valid salt.
  static Salt load(const std::optional<std::filesystem::path>& salt_file);

  const Bytes& bytes() const { return bytes_; }

 private:
  Bytes bytes_;
};

class InvalidMacFormat : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// HMAC-SHA256(salt, lowercase MAC) truncated to 16 bytes.
DeviceId anonymize_device(const MacAddress& mac, const Salt& salt);
/// Throws InvalidMacFormat unless `mac` is six colon-separated hex octets.
DeviceId anonymize_device(std::string_view mac, const Salt& salt);

/// Memoizing wrapper for bulk anonymization of repeated identities.
class Anonymizer {
 public:
  explicit Anonymizer(Salt salt) : salt_(salt) {}

  DeviceId operator()(const MacAddress& mac);
  SessionRecord operator()(const TraceRecord& record);

 private:
  Salt salt_;
  std::unordered_map<MacAddress, DeviceId, MacAddressHash> cache_;
};

enum class LogFormat { Jsonl, Csv };
enum class Strictness { Lenient, Strict };

std::optional<LogFormat> parse_log_format(std::string_view name);

class MalformedLine : public std::runtime_error {
 public:
  MalformedLine(std::size_t line_no, const std::string& reason);
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Streaming line reader: holds one line at a time. Blank lines are ignored;
/// for CSV the first non-blank line is the header.
class SessionLogReader {
 public:
  SessionLogReader(std::istream& in, LogFormat format);

  /// Next record, or nullopt at end of stream. A bad line throws
  /// MalformedLine; the reader remains positioned after it.
  std::optional<RawRecord> next();

  /// Non-blank record lines consumed so far (CSV header excluded).
  std::size_t lines_read() const { return lines_read_; }

 private:
  RawRecord parse_json(std::string_view line, std::size_t line_no) const;
  RawRecord parse_csv(std::string_view line, std::size_t line_no) const;

  std::istream& in_;
  LogFormat format_;
  std::size_t physical_line_ = 0;
  std::size_t lines_read_ = 0;
  std::vector<std::string> header_;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::vector<MalformedLine> errors;
};

/// Reads the whole stream. Lenient mode collects MalformedLine errors and
/// continues; strict mode rethrows the first one.
ParseResult parse_session_log(std::istream& in, LogFormat format, Strictness strictness);

struct IngestStats {
  std::size_t lines_read = 0;
  std::size_t accepted = 0;
  std::size_t skipped = 0;
  std::map<std::string, std::size_t> errors;  // by error kind

  bool operator==(const IngestStats&) const = default;
};

struct IngestOptions {
  Strictness strictness = Strictness::Lenient;
  LogFormat format = LogFormat::Jsonl;
  bool pre_anonymized = false;
  ObservationWindow window;
};

struct IngestResult {
  std::vector<SessionRecord> records;
  IngestStats stats;
};

/// parse -> anonymize -> validate. In strict mode any rejected line aborts
/// with MalformedLine carrying its line number. `salt` may be empty only
/// when the input is pre-anonymized.
IngestResult ingest_stream(std::istream& in, const std::optional<Salt>& salt,
                           const IngestOptions& options);
IngestResult ingest_file(const std::filesystem::path& path, const std::optional<Salt>& salt,
                         const IngestOptions& options);

}  // namespace wlan
