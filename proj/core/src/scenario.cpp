#include "rdgauge/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "rdgauge/error.hpp"

namespace rdgauge {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string hours_text(const std::optional<double>& h) { return h ? fmt::format("{:.2f} h", *h) : "n/a h"; }

// Returns true when a ranks strictly ahead of b under the S1 ordering.
bool s1_better(const ConfigSummary& a, const ConfigSummary& b) {
  if (a.coverage_all != b.coverage_all) return a.coverage_all > b.coverage_all;
  if (a.coverage_checkpoint != b.coverage_checkpoint) return a.coverage_checkpoint > b.coverage_checkpoint;
  if (a.overshoot_count != b.overshoot_count) return a.overshoot_count < b.overshoot_count;
  const double ha = a.total_hours.value_or(INFINITY), hb = b.total_hours.value_or(INFINITY);
  if (ha != hb) return ha < hb;
  return a.config < b.config;
}

bool within_budget(const ConfigSummary& s, const ScenarioSpec& spec) {
  return s.total_hours && spec.time_budget_hours &&
         *s.total_hours <= *spec.time_budget_hours * (1.0 + spec.budget_tolerance);
}

bool within_slack(const ConfigSummary& s, const ConfigSummary& best, const ScenarioSpec& spec) {
  return best.coverage_fraction() * 100.0 - s.coverage_fraction() * 100.0 <= spec.coverage_slack_points + 1e-12;
}

const ConfigSummary* best_s1(const std::vector<const ConfigSummary*>& rows) {
  const ConfigSummary* best = nullptr;
  for (const auto* r : rows)
    if (!best || s1_better(*r, *best)) best = r;
  return best;
}

std::string summary_text(const ConfigSummary& s) {
  return fmt::format("{} coverage {}/{} ({:.1f}%), checkpoint {}/{}, overshoots {}, {}", s.config.label(),
                     s.coverage_all, s.total_all, 100.0 * s.coverage_fraction(), s.coverage_checkpoint,
                     s.total_checkpoint, s.overshoot_count, hours_text(s.total_hours));
}

std::string format_cell(const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : "NA"; }

}  // namespace

std::string ConfigKey::label() const { return fmt::format("{}:{}:{}", family, preset, passes); }

ConfigKey ConfigKey::parse(std::string_view text) {
  const auto first = text.find(':');
  const auto last = text.rfind(':');
  if (first == std::string_view::npos || first == last)
    throw ValidationError(fmt::format("config '{}' is not family:preset:passes", text));
  ConfigKey k;
  k.family = trim(text.substr(0, first));
  k.preset = trim(text.substr(first + 1, last - first - 1));
  const auto passes = trim(text.substr(last + 1));
  if (k.family.empty() || k.preset.empty() || !parse_number(passes, k.passes) || (k.passes != 1 && k.passes != 2))
    throw ValidationError(fmt::format("config '{}' is not family:preset:passes", text));
  return k;
}

ScenarioSpec ScenarioSpec::s1() {
  ScenarioSpec s;
  s.id = "S1";
  return s;
}

ScenarioSpec ScenarioSpec::s2() {
  ScenarioSpec s;
  s.id = "S2";
  s.objective = Objective::FastestWithinCoverage;
  return s;
}

ScenarioSpec ScenarioSpec::s3() {
  ScenarioSpec s;
  s.id = "S3";
  s.objective = Objective::MaxCoverageWithinBudget;
  s.time_budget_hours = 40.0;
  s.budget_tolerance = 0.01;
  return s;
}

std::optional<ScenarioSpec> ScenarioSpec::named(std::string_view id) {
  const auto l = lower(id);
  if (l == "s1") return s1();
  if (l == "s2") return s2();
  if (l == "s3") return s3();
  return std::nullopt;
}

void validate(const ScenarioSpec& spec) {
  if (!(spec.vmaf_threshold > 0.0)) throw ValidationError("vmaf threshold must be positive");
  if (spec.checkpoint_kbps <= 0) throw ValidationError("checkpoint bitrate must be positive");
  if (!(spec.overshoot_threshold > 0.0)) throw ValidationError("overshoot threshold must be positive");
  if (!(spec.coverage_slack_points >= 0.0)) throw ValidationError("coverage slack must be non-negative");
  if (!(spec.budget_tolerance >= 0.0)) throw ValidationError("budget tolerance must be non-negative");
  if (spec.objective == Objective::MaxCoverageWithinBudget && !spec.time_budget_hours)
    throw ValidationError("budgeted objective needs a time budget");
  if (spec.time_budget_hours && !(*spec.time_budget_hours > 0.0))
    throw ValidationError("time budget must be positive");
}

bool is_overshoot(const MetricRecord& r, double threshold) {
  return r.measured_kbps > (1.0 + threshold) * r.target_kbps;
}

std::vector<ConfigSummary> summarize(std::span<const MetricRecord> records, const ScenarioSpec& spec) {
  struct Acc {
    ConfigSummary s;
    std::vector<double> seconds;
    bool missing_time = false;
  };
  std::map<ConfigKey, Acc> groups;
  for (const auto& r : records) {
    auto& acc = groups[ConfigKey::of(r)];
    acc.s.config = ConfigKey::of(r);
    const bool covered = r.vmaf && *r.vmaf > spec.vmaf_threshold;
    ++acc.s.total_all;
    acc.s.coverage_all += covered;
    if (r.target_kbps == spec.checkpoint_kbps) {
      ++acc.s.total_checkpoint;
      acc.s.coverage_checkpoint += covered;
    }
    acc.s.overshoot_count += is_overshoot(r, spec.overshoot_threshold);
    if (r.encode_seconds)
      acc.seconds.push_back(*r.encode_seconds);
    else
      acc.missing_time = true;
  }
  std::vector<ConfigSummary> out;
  out.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    if (!acc.missing_time) {
      // Sorted summation keeps the total independent of record order.
      std::sort(acc.seconds.begin(), acc.seconds.end());
      double total = 0.0;
      for (double s : acc.seconds) total += s;
      acc.s.total_hours = total / 3600.0;
    }
    out.push_back(std::move(acc.s));
  }
  return out;
}

std::vector<ConfigSummary> import_summaries(std::istream& csv) {
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> col;
  while (std::getline(csv, line)) {
    ++line_no;
    if (!trim(line).empty() && trim(line)[0] != '#') break;
  }
  const auto header = split_csv_line(line);
  for (std::size_t i = 0; i < header.size(); ++i) col[lower(trim(header[i]))] = i;
  for (const char* req : {"family", "preset", "passes", "coverage_all", "total_all", "coverage_checkpoint",
                          "total_checkpoint", "overshoot_count"})
    if (!col.count(req)) throw ImportError(fmt::format("summary table: missing column '{}'", req));

  std::vector<ConfigSummary> out;
  while (std::getline(csv, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = split_csv_line(line);
    auto field = [&](const char* name) -> std::string {
      auto it = col.find(name);
      if (it == col.end() || it->second >= fields.size()) return {};
      return trim(fields[it->second]);
    };
    auto integer = [&](const char* name) {
      int v = 0;
      if (!parse_number(field(name), v) || v < 0)
        throw ImportError(fmt::format("summary table line {}: bad {} '{}'", line_no, name, field(name)));
      return v;
    };
    ConfigSummary s;
    s.config.family = field("family");
    s.config.preset = field("preset");
    s.config.passes = integer("passes");
    s.coverage_all = integer("coverage_all");
    s.total_all = integer("total_all");
    s.coverage_checkpoint = integer("coverage_checkpoint");
    s.total_checkpoint = integer("total_checkpoint");
    s.overshoot_count = integer("overshoot_count");
    if (const auto h = field("hours"); !h.empty()) {
      double v = 0.0;
      if (!parse_number(h, v) || v < 0.0)
        throw ImportError(fmt::format("summary table line {}: bad hours '{}'", line_no, h));
      s.total_hours = v;
    }
    s.source = field("source");
    if (s.config.family.empty() || s.config.preset.empty())
      throw ImportError(fmt::format("summary table line {}: family and preset are required", line_no));
    if (s.coverage_all > s.total_all || s.coverage_checkpoint > s.total_checkpoint ||
        s.coverage_checkpoint > s.coverage_all)
      throw ImportError(fmt::format("summary table line {}: counts exceed their totals", line_no));
    out.push_back(std::move(s));
  }
  return out;
}

std::string summaries_csv(std::span<const ConfigSummary> summaries) {
  std::string out =
      "family,preset,passes,coverage_all,total_all,coverage_checkpoint,total_checkpoint,overshoot_count,hours,source\n";
  for (const auto& s : summaries)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", s.config.family, s.config.preset, s.config.passes,
                       s.coverage_all, s.total_all, s.coverage_checkpoint, s.total_checkpoint, s.overshoot_count,
                       s.total_hours ? fmt::format("{:.4f}", *s.total_hours) : "", s.source);
  return out;
}

const FamilySelection* ScenarioReport::find(std::string_view family) const {
  for (const auto& s : selections)
    if (s.family == family) return &s;
  return nullptr;
}

ScenarioReport select_presets(std::span<const ConfigSummary> summaries, const ScenarioSpec& spec) {
  validate(spec);
  ScenarioReport report;
  report.scenario_id = spec.id;
  report.spec = spec;
  report.supporting.assign(summaries.begin(), summaries.end());

  std::vector<std::string> families;
  std::map<std::string, std::vector<const ConfigSummary*>> by_family;
  for (const auto& s : summaries) {
    if (!by_family.count(s.config.family)) families.push_back(s.config.family);
    by_family[s.config.family].push_back(&s);
  }

  for (const auto& family : families) {
    const auto& rows = by_family[family];
    FamilySelection sel;
    sel.family = family;
    switch (spec.objective) {
      case Objective::MaxCoverage: {
        const auto* best = best_s1(rows);
        sel.pick = *best;
        sel.rationale = fmt::format("max coverage (vmaf > {:g}); tie-break checkpoint {} kb/s, overshoots, hours: {}",
                                    spec.vmaf_threshold, spec.checkpoint_kbps, summary_text(*best));
        break;
      }
      case Objective::FastestWithinCoverage: {
        const auto* anchor = best_s1(rows);
        const ConfigSummary* pick = nullptr;
        for (const auto* r : rows) {
          if (!r->total_hours || !within_slack(*r, *anchor, spec)) continue;
          if (!pick || *r->total_hours < *pick->total_hours ||
              (*r->total_hours == *pick->total_hours && s1_better(*r, *pick)))
            pick = r;
        }
        if (!pick) {
          sel.rationale = fmt::format("infeasible: no config with encode hours within {:g} coverage points of {}",
                                      spec.coverage_slack_points, anchor->config.label());
          break;
        }
        sel.pick = *pick;
        const double saved = anchor->total_hours && *anchor->total_hours > 0.0
                                 ? 100.0 * (1.0 - *pick->total_hours / *anchor->total_hours)
                                 : 0.0;
        sel.rationale = fmt::format(
            "fastest config within {:g} coverage points of the max-coverage pick {} ({:.1f}%): {}; time reduction "
            "{:.2f}%",
            spec.coverage_slack_points, anchor->config.label(), 100.0 * anchor->coverage_fraction(),
            summary_text(*pick), saved);
        break;
      }
      case Objective::MaxCoverageWithinBudget: {
        std::vector<const ConfigSummary*> feasible;
        for (const auto* r : rows)
          if (within_budget(*r, spec)) feasible.push_back(r);
        const double limit = *spec.time_budget_hours * (1.0 + spec.budget_tolerance);
        if (feasible.empty()) {
          sel.rationale = fmt::format("infeasible: no config within {:g} h budget (limit {:.2f} h)",
                                      *spec.time_budget_hours, limit);
          break;
        }
        const auto* best = best_s1(feasible);
        sel.pick = *best;
        sel.rationale = fmt::format("max coverage within {:g} h budget (limit {:.2f} h): {}", *spec.time_budget_hours,
                                    limit, summary_text(*best));
        break;
      }
    }
    report.selections.push_back(std::move(sel));
  }
  return report;
}

bool satisfies_constraints(const ScenarioReport& report) {
  const auto& spec = report.spec;
  for (const auto& sel : report.selections) {
    if (!sel.pick) continue;
    const auto& pick = *sel.pick;
    if (pick.config.family != sel.family) return false;
    std::vector<const ConfigSummary*> rows;
    for (const auto& s : report.supporting)
      if (s.config.family == sel.family) rows.push_back(&s);
    if (std::none_of(rows.begin(), rows.end(), [&](const auto* r) { return r->config == pick.config; })) return false;
    switch (spec.objective) {
      case Objective::MaxCoverage:
        for (const auto* r : rows)
          if (r->coverage_all > pick.coverage_all) return false;
        break;
      case Objective::FastestWithinCoverage:
        if (!within_slack(pick, *best_s1(rows), spec)) return false;
        break;
      case Objective::MaxCoverageWithinBudget:
        if (!within_budget(pick, spec)) return false;
        for (const auto* r : rows)
          if (within_budget(*r, spec) && r->coverage_all > pick.coverage_all) return false;
        break;
    }
  }
  return true;
}

std::string_view to_string(BdMethod method) { return method == BdMethod::Smart ? "smart" : "classic"; }

ComparisonGrid bd_grid(std::span<const ConfigKey> configs, std::span<const MetricRecord> records,
                       const GridOptions& options) {
  const std::size_t n = configs.size();
  ComparisonGrid grid;
  grid.kind = ComparisonGrid::Kind::BdRate;
  grid.method = std::string(to_string(options.method));
  grid.cells.assign(n, std::vector<std::optional<double>>(n));

  std::vector<std::vector<MetricRecord>> slices(n);
  std::set<int> rungs;
  for (std::size_t i = 0; i < n; ++i) {
    grid.labels.push_back(configs[i].label());
    for (const auto& r : records)
      if (ConfigKey::of(r) == configs[i]) {
        slices[i].push_back(r);
        rungs.insert(r.target_kbps);
      }
  }
  const std::vector<int> ladder = options.ladder.empty() ? std::vector<int>(rungs.begin(), rungs.end()) : options.ladder;

  std::vector<std::string> notes(n * n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < n * n; idx = next++) {
      const std::size_t i = idx / n, j = idx % n;
      if (i == j) {
        grid.cells[i][j] = 0.0;
        continue;
      }
      try {
        const auto r = options.method == BdMethod::Smart
                           ? smart_bd_rate(slices[i], slices[j], ladder, options.metric, options.aggregation)
                           : classic_bd_rate(slices[i], slices[j], options.metric);
        grid.cells[i][j] = r.value;
      } catch (const DataError& e) {
        notes[idx] = fmt::format("{} -> {}: {}", grid.labels[i], grid.labels[j], e.what());
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n * n, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& note : notes)
    if (!note.empty()) grid.notes.push_back(std::move(note));
  return grid;
}

ComparisonGrid time_grid(std::span<const ConfigSummary> summaries) {
  const std::size_t n = summaries.size();
  ComparisonGrid grid;
  grid.kind = ComparisonGrid::Kind::EncodeTime;
  grid.method = "time";
  grid.cells.assign(n, std::vector<std::optional<double>>(n));
  for (const auto& s : summaries) grid.labels.push_back(s.config.label());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        grid.cells[i][j] = 0.0;
        continue;
      }
      const auto& hi = summaries[i].total_hours;
      const auto& hj = summaries[j].total_hours;
      if (hi && hj && *hi > 0.0)
        grid.cells[i][j] = (*hj - *hi) / *hi * 100.0;
      else
        grid.notes.push_back(fmt::format("{} -> {}: encode hours missing", grid.labels[i], grid.labels[j]));
    }
  return grid;
}

std::string grid_csv(const ComparisonGrid& grid) {
  std::string out = "anchor\\test";
  for (const auto& l : grid.labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < grid.labels.size(); ++i) {
    out += grid.labels[i];
    for (std::size_t j = 0; j < grid.labels.size(); ++j) out += "," + format_cell(grid.cells[i][j]);
    out += "\n";
  }
  return out;
}

}  // namespace rdgauge
