#pragma once

// Scenario gates, per-family preset recommendation and comparison grids.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "rdgauge/bd.hpp"
#include "rdgauge/store.hpp"

namespace rdgauge {

struct ConfigKey {
  std::string family;
  std::string preset;
  int passes = 1;

  // "family:preset:passes"
  std::string label() const;
  static ConfigKey parse(std::string_view text);
  static ConfigKey of(const MetricRecord& r) { return {r.family, r.preset, r.passes}; }
  auto tie() const { return std::tie(family, preset, passes); }
  friend bool operator==(const ConfigKey& a, const ConfigKey& b) { return a.tie() == b.tie(); }
  friend bool operator<(const ConfigKey& a, const ConfigKey& b) { return a.tie() < b.tie(); }
};

enum class Objective {
  MaxCoverage,              // S1
  FastestWithinCoverage,    // S2: fastest config within N coverage points of the S1 pick
  MaxCoverageWithinBudget,  // S3
};

struct ScenarioSpec {
  std::string id = "custom";
  double vmaf_threshold = 88.0;      // strict: vmaf > threshold counts
  int checkpoint_kbps = 4000;
  double overshoot_threshold = 0.15; // strict: measured > (1 + t) * target
  std::optional<double> time_budget_hours;
  // Budget check is hours <= budget * (1 + tolerance).
  double budget_tolerance = 0.0;
  double coverage_slack_points = 5.0;  // S2 trade rule, percentage points
  Objective objective = Objective::MaxCoverage;

  static ScenarioSpec s1();
  static ScenarioSpec s2();
  static ScenarioSpec s3();
  // "S1" / "S2" / "S3" (case-insensitive); nullopt otherwise.
  static std::optional<ScenarioSpec> named(std::string_view id);
};

// Throws ValidationError for non-positive thresholds or a budgeted objective
// without a budget.
void validate(const ScenarioSpec& spec);

struct ConfigSummary {
  ConfigKey config;
  int coverage_all = 0;
  int total_all = 0;
  int coverage_checkpoint = 0;
  int total_checkpoint = 0;
  int overshoot_count = 0;
  std::optional<double> total_hours;  // absent if any record lacks an encode time
  std::string source;                 // free-form provenance tag for imported rows

  double coverage_fraction() const { return total_all ? static_cast<double>(coverage_all) / total_all : 0.0; }
  double checkpoint_fraction() const {
    return total_checkpoint ? static_cast<double>(coverage_checkpoint) / total_checkpoint : 0.0;
  }
};

bool is_overshoot(const MetricRecord& r, double threshold);

// One summary per (family, preset, passes), key ordered.
std::vector<ConfigSummary> summarize(std::span<const MetricRecord> records, const ScenarioSpec& spec);

// CSV columns: family,preset,passes,coverage_all,total_all,coverage_checkpoint,
// total_checkpoint,overshoot_count,hours[,source]. Empty hours = absent.
std::vector<ConfigSummary> import_summaries(std::istream& csv);
std::string summaries_csv(std::span<const ConfigSummary> summaries);

struct FamilySelection {
  std::string family;
  std::optional<ConfigSummary> pick;  // nullopt when infeasible
  std::string rationale;
};

struct ScenarioReport {
  std::string scenario_id;
  ScenarioSpec spec;
  std::vector<FamilySelection> selections;  // family order
  std::vector<ConfigSummary> supporting;

  const FamilySelection* find(std::string_view family) const;
};

ScenarioReport select_presets(std::span<const ConfigSummary> summaries, const ScenarioSpec& spec);

// True when every pick satisfies the spec's hard constraints.
bool satisfies_constraints(const ScenarioReport& report);

// Rows are anchors, columns are tests. Diagonal cells are exactly 0.
struct ComparisonGrid {
  enum class Kind { BdRate, EncodeTime };
  Kind kind = Kind::BdRate;
  std::string method;  // "classic" | "smart" | "time"
  std::vector<std::string> labels;
  std::vector<std::vector<std::optional<double>>> cells;
  std::vector<std::string> notes;  // reasons for N/A cells

  std::optional<double> at(std::size_t anchor, std::size_t test) const { return cells[anchor][test]; }
};

enum class BdMethod { Classic, Smart };
std::string_view to_string(BdMethod method);

struct GridOptions {
  BdMethod method = BdMethod::Classic;
  MetricKind metric = MetricKind::VMAF;
  Aggregation aggregation = Aggregation::Harmonic;
  std::vector<int> ladder;  // empty: every target present in the records
  unsigned threads = 0;     // 0: hardware concurrency
};

ComparisonGrid bd_grid(std::span<const ConfigKey> configs, std::span<const MetricRecord> records,
                       const GridOptions& options = {});
// cell = (hours_test - hours_anchor) / hours_anchor * 100
ComparisonGrid time_grid(std::span<const ConfigSummary> summaries);

std::string grid_csv(const ComparisonGrid& grid);

}  // namespace rdgauge
