#include "rdgauge/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "rdgauge/error.hpp"

namespace rdgauge {
namespace {

using nlohmann::ordered_json;

template <typename T>
T required(const ordered_json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw StoreError(fmt::format("missing field '{}'", field));
  return it->get<T>();
}

template <typename T>
std::optional<T> optional_field(const ordered_json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_number(const std::string& text, const std::string& column, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ImportError(fmt::format("line {}: column '{}' is not numeric: '{}'", line, column, text));
  return v;
}

int parse_integer(const std::string& text, const std::string& column, std::size_t line) {
  const double v = parse_number(text, column, line);
  if (v != std::floor(v)) throw ImportError(fmt::format("line {}: column '{}' must be an integer", line, column));
  return static_cast<int>(v);
}

// Cuts a partial trailing line (no newline) left by an interrupted append.
void repair_tail(int fd, const std::filesystem::path& path) {
  struct stat st {};
  if (::fstat(fd, &st) != 0 || st.st_size == 0) return;
  char last = 0;
  if (::pread(fd, &last, 1, st.st_size - 1) != 1 || last == '\n') return;
  off_t pos = st.st_size - 1;
  char c = 0;
  while (pos > 0) {
    if (::pread(fd, &c, 1, pos - 1) != 1) return;
    if (c == '\n') break;
    --pos;
  }
  if (::ftruncate(fd, pos) != 0)
    throw StoreError(fmt::format("{}: cannot truncate partial line: {}", path.string(), std::strerror(errno)));
}

}  // namespace

void validate(const MetricRecord& r) {
  if (r.clip_id.empty()) throw ValidationError("record: empty clip id");
  if (r.family.empty()) throw ValidationError("record: empty family");
  if (r.preset.empty()) throw ValidationError("record: empty preset");
  if (r.passes < 1) throw ValidationError(fmt::format("record: passes must be >= 1, got {}", r.passes));
  if (r.target_kbps <= 0) throw ValidationError(fmt::format("record: target bitrate {} not positive", r.target_kbps));
  if (!(r.measured_kbps > 0.0) || !std::isfinite(r.measured_kbps))
    throw ValidationError(fmt::format("record: measured bitrate {} not positive", r.measured_kbps));
  if (r.vmaf && !(*r.vmaf >= 0.0 && *r.vmaf <= 100.0))
    throw ValidationError(fmt::format("record: vmaf {} outside [0,100]", *r.vmaf));
  if (r.psnr_y && !std::isfinite(*r.psnr_y)) throw ValidationError("record: psnr_y not finite");
  if (r.encode_seconds && !(*r.encode_seconds >= 0.0))
    throw ValidationError(fmt::format("record: encode time {} negative", *r.encode_seconds));
  if (r.output_bytes < 0) throw ValidationError("record: negative byte count");
}

std::string to_json_line(const MetricRecord& r) {
  ordered_json j;
  j["clip"] = r.clip_id;
  j["family"] = r.family;
  j["preset"] = r.preset;
  j["passes"] = r.passes;
  j["tbr_kbps"] = r.target_kbps;
  j["kbps"] = r.measured_kbps;
  if (r.vmaf) j["vmaf"] = *r.vmaf;
  if (r.psnr_y) j["psnr_y"] = *r.psnr_y;
  if (r.encode_seconds) j["enc_s"] = *r.encode_seconds;
  j["bytes"] = r.output_bytes;
  j["tool"] = r.tool_version;
  j["ts"] = r.created_at;
  return j.dump();
}

MetricRecord parse_json_line(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw StoreError(e.what());
  }
  if (!j.is_object()) throw StoreError("line is not a JSON object");
  try {
    MetricRecord r;
    r.clip_id = required<std::string>(j, "clip");
    r.family = required<std::string>(j, "family");
    r.preset = required<std::string>(j, "preset");
    r.passes = required<int>(j, "passes");
    r.target_kbps = required<int>(j, "tbr_kbps");
    r.measured_kbps = required<double>(j, "kbps");
    r.vmaf = optional_field<double>(j, "vmaf");
    r.psnr_y = optional_field<double>(j, "psnr_y");
    r.encode_seconds = optional_field<double>(j, "enc_s");
    r.output_bytes = optional_field<std::int64_t>(j, "bytes").value_or(0);
    r.tool_version = optional_field<std::string>(j, "tool").value_or("");
    r.created_at = optional_field<std::string>(j, "ts").value_or("");
    return r;
  } catch (const ordered_json::type_error& e) {
    throw StoreError(e.what());
  }
}

std::string now_timestamp() {
  static std::atomic<long long> last{0};
  long long us = std::chrono::duration_cast<std::chrono::microseconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count();
  long long prev = last.load();
  while (true) {
    const long long next = std::max(us, prev + 1);
    if (last.compare_exchange_weak(prev, next)) {
      us = next;
      break;
    }
  }
  const std::time_t secs = static_cast<std::time_t>(us / 1000000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:06}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec, us % 1000000);
}

bool RecordFilter::operator()(const MetricRecord& r) const {
  return (!clip_id || r.clip_id == *clip_id) && (!family || r.family == *family) &&
         (!preset || r.preset == *preset) && (!passes || r.passes == *passes) &&
         (!target_kbps || r.target_kbps == *target_kbps);
}

std::vector<MetricRecord> dedupe(std::vector<MetricRecord> records) {
  using Key = std::tuple<std::string, std::string, std::string, int, int>;
  std::map<Key, std::size_t> latest;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    Key k{r.clip_id, r.family, r.preset, r.passes, r.target_kbps};
    auto [it, inserted] = latest.try_emplace(k, i);
    if (!inserted && records[it->second].created_at <= r.created_at) it->second = i;
  }
  std::vector<MetricRecord> out;
  out.reserve(latest.size());
  for (auto& [k, idx] : latest) out.push_back(std::move(records[idx]));
  // std::map iteration is already in key order, one record per key.
  return out;
}

ResultsStore::ResultsStore(std::filesystem::path path) : path_(std::move(path)) {}

void ResultsStore::append(const MetricRecord& record) {
  validate(record);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  const int fd = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError(fmt::format("{}: {}", path_.string(), std::strerror(errno)));
  try {
    if (::flock(fd, LOCK_EX) != 0) throw IoError(fmt::format("{}: lock failed: {}", path_.string(), std::strerror(errno)));
    repair_tail(fd, path_);
  } catch (...) {
    ::close(fd);
    throw;
  }
  const std::string line = to_json_line(record) + "\n";
  const ssize_t n = ::write(fd, line.data(), line.size());
  const int err = errno;
  ::close(fd);
  if (n != static_cast<ssize_t>(line.size()))
    throw IoError(fmt::format("{}: short write: {}", path_.string(), std::strerror(err)));
}

std::vector<MetricRecord> ResultsStore::load_raw() const {
  warnings_.clear();
  std::vector<MetricRecord> out;
  std::ifstream in(path_, std::ios::binary);
  if (!in) {
    if (std::filesystem::exists(path_)) throw IoError(fmt::format("cannot read {}", path_.string()));
    return out;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const bool terminated = !in.eof();
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_json_line(line));
    } catch (const StoreError& e) {
      if (!terminated) {
        warnings_.push_back(fmt::format("{}: line {}: ignoring partial trailing line", path_.string(), line_no));
        break;
      }
      throw StoreError(fmt::format("{}: line {}: malformed record: {}", path_.string(), line_no, e.what()));
    }
  }
  return out;
}

std::vector<MetricRecord> ResultsStore::load(const RecordPredicate& filter) const {
  auto all = dedupe(load_raw());
  if (!filter) return all;
  std::vector<MetricRecord> out;
  for (auto& r : all)
    if (filter(r)) out.push_back(std::move(r));
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<MetricRecord> parse_import_table(std::istream& csv, const ImportDefaults& d) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(csv, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    for (auto& h : split_csv_line(line)) header.push_back(trim(h));
  }
  std::vector<MetricRecord> rows;
  if (header.empty()) return rows;

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  auto find = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
    for (const char* n : names)
      if (auto it = col.find(n); it != col.end()) return it->second;
    return std::nullopt;
  };
  const auto c_clip = find({"clip"}), c_family = find({"family"}), c_label = find({"label", "preset"}),
             c_passes = find({"passes"}), c_tbr = find({"tbr_kbps", "tbr"}), c_kbps = find({"kbps", "bitrate"}),
             c_vmaf = find({"vmaf"}), c_psnr = find({"psnr_y", "psnr"}), c_time = find({"enc_s", "time"}),
             c_bytes = find({"bytes"}), c_tool = find({"tool"});
  if (!c_kbps) throw ImportError("import: table needs a 'kbps' or 'bitrate' column");
  if (!c_label && d.preset_prefix.empty()) throw ImportError("import: table needs a 'label' column");

  const std::string ts = now_timestamp();
  while (std::getline(csv, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw ImportError(fmt::format("line {}: expected {} fields, found {}", line_no, header.size(), f.size()));
    auto text = [&](std::optional<std::size_t> c) { return c ? trim(f[*c]) : std::string{}; };

    MetricRecord r;
    r.clip_id = c_clip ? text(c_clip) : d.clip_id;
    r.family = c_family ? text(c_family) : d.family;
    const std::string label = text(c_label);
    if (d.preset_prefix.empty())
      r.preset = label;
    else
      r.preset = (label.empty() || label == "Default") ? d.preset_prefix : d.preset_prefix + " " + label;
    r.passes = c_passes ? parse_integer(f[*c_passes], "passes", line_no) : d.passes;
    r.target_kbps = c_tbr ? parse_integer(f[*c_tbr], "tbr_kbps", line_no) : d.target_kbps;
    r.measured_kbps = parse_number(f[*c_kbps], header[*c_kbps], line_no);
    if (c_vmaf && !text(c_vmaf).empty()) r.vmaf = parse_number(f[*c_vmaf], "vmaf", line_no);
    if (c_psnr && !text(c_psnr).empty()) r.psnr_y = parse_number(f[*c_psnr], "psnr_y", line_no);
    if (c_time && !text(c_time).empty()) r.encode_seconds = parse_number(f[*c_time], "enc_s", line_no);
    if (c_bytes && !text(c_bytes).empty())
      r.output_bytes = static_cast<std::int64_t>(parse_number(f[*c_bytes], "bytes", line_no));
    r.tool_version = c_tool ? text(c_tool) : d.tool_version;
    r.created_at = ts;
    try {
      validate(r);
    } catch (const ValidationError& e) {
      throw ImportError(fmt::format("line {}: {}", line_no, e.what()));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::size_t import_table(std::istream& csv, const ImportDefaults& defaults, ResultsStore& store) {
  const auto rows = parse_import_table(csv, defaults);
  for (const auto& r : rows) store.append(r);
  return rows.size();
}

}  // namespace rdgauge
