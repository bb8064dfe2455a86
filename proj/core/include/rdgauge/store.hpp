#pragma once

// Append-only results store: one JSON object per line.
//
// Field names on disk: clip, family, preset, passes, tbr_kbps, kbps, vmaf,
// psnr_y, enc_s, bytes, tool, ts. Optional fields are omitted when absent.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace rdgauge {

struct MetricRecord {
  std::string clip_id;
  std::string family;
  std::string preset;  // config label; may carry extra options
  int passes = 1;
  int target_kbps = 0;
  double measured_kbps = 0.0;
  std::optional<double> vmaf;
  std::optional<double> psnr_y;
  std::optional<double> encode_seconds;
  std::int64_t output_bytes = 0;
  std::string tool_version;
  std::string created_at;  // ISO-8601 UTC, lexicographically ordered

  auto key() const { return std::tie(clip_id, family, preset, passes, target_kbps); }
  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

// Throws ValidationError with the reason when a record is not storable.
void validate(const MetricRecord& record);

std::string to_json_line(const MetricRecord& record);
MetricRecord parse_json_line(const std::string& line);

// Microsecond-resolution UTC timestamp, strictly increasing within a process.
std::string now_timestamp();

using RecordPredicate = std::function<bool(const MetricRecord&)>;

struct RecordFilter {
  std::optional<std::string> clip_id;
  std::optional<std::string> family;
  std::optional<std::string> preset;
  std::optional<int> passes;
  std::optional<int> target_kbps;

  bool operator()(const MetricRecord& r) const;
};

// Keep-latest by created_at (file order breaks ties), then sorted by key and
// created_at.
std::vector<MetricRecord> dedupe(std::vector<MetricRecord> records);

class ResultsStore {
 public:
  explicit ResultsStore(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }

  // Validates, then appends one line with a single write(2) on an O_APPEND
  // descriptor. A partial trailing line left by an interrupted writer is
  // truncated first.
  void append(const MetricRecord& record);

  // Deduplicated, filtered, ordered. A missing file loads as empty.
  std::vector<MetricRecord> load(const RecordPredicate& filter = {}) const;
  // Every parseable line in file order, no dedupe.
  std::vector<MetricRecord> load_raw() const;

  // Diagnostics from the most recent load (e.g. an ignored partial trailing line).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::filesystem::path path_;
  mutable std::vector<std::string> warnings_;
};

// Values used for columns a table does not carry.
struct ImportDefaults {
  std::string clip_id = "imported";
  std::string family = "imported";
  std::string preset_prefix;  // prepended to the label column; "Default" maps to the prefix alone
  int passes = 1;
  int target_kbps = 4000;
  std::string tool_version = "import";
};

// Header-driven CSV import. Recognized columns: clip, family, label|preset,
// passes, tbr_kbps|tbr, kbps|bitrate, vmaf, psnr_y|psnr, enc_s|time, bytes,
// tool. Rows are validated before anything is appended; returns the count.
std::size_t import_table(std::istream& csv, const ImportDefaults& defaults, ResultsStore& store);
std::vector<MetricRecord> parse_import_table(std::istream& csv, const ImportDefaults& defaults);

// Minimal RFC-4180 field splitter shared with other CSV readers.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace rdgauge
