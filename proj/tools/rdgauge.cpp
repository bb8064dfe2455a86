// rdgauge: encoder benchmark planning, execution and rate-distortion analysis.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rdgauge/bd.hpp"
#include "rdgauge/complexity.hpp"
#include "rdgauge/encode_plan.hpp"
#include "rdgauge/error.hpp"
#include "rdgauge/quality.hpp"
#include "rdgauge/report.hpp"
#include "rdgauge/runner.hpp"
#include "rdgauge/scenario.hpp"
#include "rdgauge/store.hpp"

namespace fs = std::filesystem;
using namespace rdgauge;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kEnvironment = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string store = "results.jsonl";
  std::string out;
  std::string method = "classic";
  std::string ladder;
  double threshold = 88.0;
  std::optional<double> budget_hours;
  std::string binary_dir;
  std::string work_dir;
  unsigned jobs = 0;
  bool timing_strict = false;
  double maxrate_factor = kDefaultMaxrateFactor;
  bool force = false;
};

std::vector<int> parse_ladder(const std::string& text, const std::vector<int>& fallback) {
  if (text.empty()) return fallback;
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("--ladder: '{}' is not a positive integer", item));
    }
  }
  return out;
}

BdMethod parse_method(const std::string& m) {
  if (m == "classic") return BdMethod::Classic;
  if (m == "smart") return BdMethod::Smart;
  throw UsageError(fmt::format("--method must be classic or smart, got '{}'", m));
}

MetricKind parse_metric(const std::string& m) {
  if (m == "vmaf") return MetricKind::VMAF;
  if (m == "psnr" || m == "psnr_y") return MetricKind::PSNR_Y;
  throw UsageError(fmt::format("--metric must be vmaf or psnr, got '{}'", m));
}

Aggregation parse_aggregation(const std::string& a) {
  if (a == "harmonic") return Aggregation::Harmonic;
  if (a == "arithmetic") return Aggregation::Arithmetic;
  throw UsageError(fmt::format("--aggregate must be harmonic or arithmetic, got '{}'", a));
}

EncoderFamily family_arg(const std::string& f) {
  if (auto fam = parse_family(f)) return *fam;
  throw UsageError(fmt::format("unknown encoder family '{}'", f));
}

std::vector<ClipRef> collect_clips(const std::vector<std::string>& inputs) {
  std::vector<ClipRef> clips;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".y4m") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      for (const auto& f : found) clips.push_back({f.stem().string(), f});
    } else if (fs::is_regular_file(p)) {
      clips.push_back({p.stem().string(), p});
    } else {
      throw IoError(fmt::format("no such clip or directory: {}", in));
    }
  }
  if (clips.empty()) throw UsageError("no .y4m clips found");
  return clips;
}

ScenarioSpec scenario_spec(const std::string& id, const Globals& g) {
  auto spec = ScenarioSpec::named(id);
  if (!spec) throw UsageError(fmt::format("unknown scenario '{}' (expected S1, S2 or S3)", id));
  spec->vmaf_threshold = g.threshold;
  if (g.budget_hours && spec->objective == Objective::MaxCoverageWithinBudget) spec->time_budget_hours = g.budget_hours;
  return *spec;
}

std::vector<ConfigKey> config_args(const std::vector<std::string>& items) {
  std::vector<ConfigKey> out;
  for (const auto& i : items) out.push_back(ConfigKey::parse(i));
  return out;
}

std::vector<MetricRecord> records_for(const ResultsStore& store, const ConfigKey& key) {
  return store.load([&](const MetricRecord& r) { return ConfigKey::of(r) == key; });
}

void write_or_print(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError(fmt::format("cannot write {}", path));
}

std::vector<ConfigSummary> load_summaries(const std::string& summaries_path, const ResultsStore& store,
                                          const ScenarioSpec& spec) {
  if (!summaries_path.empty()) {
    std::ifstream in(summaries_path);
    if (!in) throw IoError(fmt::format("cannot read {}", summaries_path));
    return import_summaries(in);
  }
  const auto records = store.load();
  for (const auto& w : store.warnings()) std::cerr << "warning: " << w << "\n";
  return summarize(records, spec);
}

std::vector<ConfigSummary> filter_source(std::vector<ConfigSummary> rows, const std::string& source) {
  if (source.empty()) return rows;
  std::erase_if(rows, [&](const ConfigSummary& s) { return s.source != source; });
  return rows;
}

// "S3=s3" -> {"S3": "s3"}
std::map<std::string, std::string> parse_shortlists(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& i : items) {
    const auto eq = i.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("--shortlist expects SCENARIO=SOURCE, got '{}'", i));
    out[i.substr(0, eq)] = i.substr(eq + 1);
  }
  return out;
}

void print_report(const ScenarioReport& r) {
  std::cout << fmt::format("scenario {}\n", r.scenario_id);
  for (const auto& s : r.selections) {
    if (s.pick)
      std::cout << fmt::format("  {}: {} {}-pass\n    {}\n", s.family, s.pick->config.preset, s.pick->config.passes,
                               s.rationale);
    else
      std::cout << fmt::format("  {}: infeasible\n    {}\n", s.family, s.rationale);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encoder benchmark planning, execution and rate-distortion analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--store", g.store, "Results store (JSON lines)")->envname("RDGAUGE_STORE");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--method", g.method, "BD-Rate method: classic or smart");
  app.add_option("--ladder", g.ladder, "Comma-separated target bitrates in kb/s");
  app.add_option("--threshold", g.threshold, "VMAF coverage threshold (strict)");
  app.add_option("--budget-hours", g.budget_hours, "Encode-time budget for budgeted scenarios");
  app.add_option("--binary-dir", g.binary_dir, "Directory holding encoder binaries")->envname("RDGAUGE_BIN_DIR");
  app.add_option("--work-dir", g.work_dir, "Directory for encoded outputs")->envname("RDGAUGE_WORK_DIR");
  app.add_option("--jobs", g.jobs, "Concurrent encodes (0 = all cores)");
  app.add_flag("--timing-strict", g.timing_strict, "Run one encode at a time");
  app.add_option("--maxrate-factor", g.maxrate_factor, "maxrate = factor x target");
  app.add_flag("--force", g.force, "Re-run jobs already in the store");

  // Planning options shared by plan and encode.
  std::vector<std::string> clips, families, presets, toggles;
  std::vector<int> pass_modes{1, 2};
  bool print_commands = false, count_only = false;
  auto add_plan_options = [&](CLI::App* sub) {
    sub->add_option("--clips", clips, "Y4M files or directories")->required();
    sub->add_option("--family", families, "Encoder families (x264, x265, svt-av1, nvenc-av1)");
    sub->add_option("--preset", presets, "Presets (default: full vocabulary)");
    sub->add_option("--passes", pass_modes, "Pass modes")->check(CLI::IsMember({1, 2}));
    sub->add_option("--toolsweep", toggles, "Tool-off toggles, e.g. \"--enable-tf 0\"");
  };

  auto* plan = app.add_subcommand("plan", "Print the job matrix");
  add_plan_options(plan);
  plan->add_flag("--commands", print_commands, "Print full command lines");
  plan->add_flag("--count", count_only, "Print only the job count");

  bool no_quality = false;
  auto* encode = app.add_subcommand("encode", "Run encodes and record results");
  add_plan_options(encode);
  encode->add_flag("--no-quality", no_quality, "Skip VMAF measurement");

  std::string distorted, reference, metric_style = "ffmpeg";
  auto* vmaf = app.add_subcommand("vmaf", "Measure VMAF and PSNR-Y of one encode");
  vmaf->add_option("--distorted", distorted)->required();
  vmaf->add_option("--reference", reference)->required();
  vmaf->add_option("--tool", metric_style, "ffmpeg (libvmaf filter) or vmaf (standalone)");

  std::string scatter_csv;
  unsigned complexity_threads = 1;
  auto* complexity = app.add_subcommand("complexity", "Spatial/temporal energy per clip");
  complexity->add_option("--clips", clips, "Y4M files or directories")->required();
  complexity->add_option("--scatter", scatter_csv, "Write clip_id,clip_se,clip_te CSV");
  complexity->add_option("--threads", complexity_threads);

  std::string table;
  ImportDefaults defaults;
  auto* import = app.add_subcommand("import", "Import a CSV table into the store");
  import->add_option("table", table, "CSV file")->required();
  import->add_option("--clip", defaults.clip_id);
  import->add_option("--as-family", defaults.family);
  import->add_option("--preset-prefix", defaults.preset_prefix);
  import->add_option("--as-passes", defaults.passes);
  import->add_option("--tbr", defaults.target_kbps);

  std::vector<std::string> configs;
  std::string metric = "vmaf", aggregate = "harmonic";
  bool per_clip = false;
  auto* curves = app.add_subcommand("curves", "Print RD curves as CSV");
  curves->add_option("--config", configs, "family:preset:passes")->required();
  curves->add_option("--metric", metric);
  curves->add_option("--aggregate", aggregate);
  curves->add_flag("--per-clip", per_clip, "Per-clip curves instead of aggregate");

  std::string anchor, test;
  auto* bdrate = app.add_subcommand("bdrate", "BD-Rate between two configurations");
  bdrate->add_option("--anchor", anchor, "family:preset:passes")->required();
  bdrate->add_option("--test", test, "family:preset:passes")->required();
  bdrate->add_option("--metric", metric);
  bdrate->add_option("--aggregate", aggregate);

  std::string summaries_path, grid_kind = "bd", source;
  auto* grid = app.add_subcommand("grid", "BD-Rate or encode-time comparison grid");
  grid->add_option("--config", configs, "family:preset:passes");
  grid->add_option("--kind", grid_kind, "bd or time");
  grid->add_option("--summaries", summaries_path, "Summary CSV for time grids");
  grid->add_option("--metric", metric);
  grid->add_option("--aggregate", aggregate);

  std::vector<std::string> scenarios{"S1", "S2", "S3"}, shortlists;
  auto* scenario = app.add_subcommand("scenario", "Per-family preset recommendation");
  scenario->add_option("--scenario", scenarios, "S1, S2, S3");
  scenario->add_option("--summaries", summaries_path, "Summary CSV instead of the store");
  scenario->add_option("--source", source, "Only summary rows with this source tag");
  scenario->add_option("--shortlist", shortlists, "SCENARIO=SOURCE candidate restriction");

  auto* report = app.add_subcommand("report", "Write recommendations, grids and plots");
  report->add_option("--scenario", scenarios, "S1, S2, S3");
  report->add_option("--summaries", summaries_path, "Summary CSV instead of the store");
  report->add_option("--shortlist", shortlists, "SCENARIO=SOURCE candidate restriction");
  report->add_option("--metric", metric);
  report->add_option("--aggregate", aggregate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    ResultsStore store(g.store);
    const auto ladder = parse_ladder(g.ladder, {});
    JobOverrides overrides;
    overrides.maxrate_factor = g.maxrate_factor;

    auto build_plan = [&] {
      const auto refs = collect_clips(clips);
      if (!toggles.empty()) {
        std::vector<EncodeJob> jobs;
        for (const auto& c : refs) {
          const auto part = plan_toolsweep(c, toggles, ladder.empty() ? default_toolsweep_ladder() : ladder,
                                           EncoderFamily::SVT_AV1, presets.empty() ? "10" : presets.front(),
                                           overrides);
          jobs.insert(jobs.end(), part.begin(), part.end());
        }
        return jobs;
      }
      if (families.empty()) throw UsageError("--family is required unless --toolsweep is given");
      std::vector<EncoderSpec> specs;
      for (const auto& f : families) {
        auto spec = EncoderSpec::defaults(family_arg(f), g.binary_dir);
        if (!presets.empty()) spec.presets = presets;
        specs.push_back(std::move(spec));
      }
      return plan_matrix(refs, specs, ladder.empty() ? default_ladder() : ladder, pass_modes, overrides);
    };

    if (*plan) {
      const auto jobs = build_plan();
      if (count_only) {
        std::cout << jobs.size() << "\n";
        return kOk;
      }
      RunnerConfig cfg = RunnerConfig::from_environment();
      if (!g.binary_dir.empty()) cfg.bin_dir = g.binary_dir;
      if (!g.work_dir.empty()) cfg.work_dir = g.work_dir;
      for (const auto& j : jobs) {
        std::cout << j.key() << "\n";
        if (print_commands)
          for (const auto& argv_ : build_commands(j, paths_for(j, cfg))) std::cout << "  " << join_command(argv_) << "\n";
      }
      return kOk;
    }

    if (*encode) {
      RunnerConfig cfg = RunnerConfig::from_environment();
      if (!g.binary_dir.empty()) {
        cfg.bin_dir = g.binary_dir;
        cfg.metric.ffmpeg = cfg.bin_dir / "ffmpeg";
        cfg.metric.vmaf = cfg.bin_dir / "vmaf";
      }
      if (!g.work_dir.empty()) cfg.work_dir = g.work_dir;
      cfg.jobs = g.jobs;
      cfg.timing_strict = g.timing_strict;
      cfg.force = g.force;
      cfg.measure_quality = !no_quality;
      const auto jobs = build_plan();
      std::size_t failed = 0;
      run_jobs(jobs, cfg, store, [&](const JobOutcome& o) {
        failed += o.status == JobStatus::Failed;
        std::cerr << fmt::format("[{}] {}", to_string(o.status), o.job.key());
        if (o.status == JobStatus::Ok)
          std::cerr << fmt::format(" {:.1f} kb/s {:.2f} s", o.measured_kbps, o.wall_seconds);
        if (o.quality) std::cerr << fmt::format(" vmaf {:.3f}", o.quality->vmaf_mean);
        std::cerr << "\n";
        if (!o.error.empty()) std::cerr << "  " << o.error << "\n";
        for (const auto& w : o.warnings) std::cerr << "  warning: " << w << "\n";
      });
      std::cerr << fmt::format("{} jobs, {} failed\n", jobs.size(), failed);
      return failed ? kData : kOk;
    }

    if (*vmaf) {
      MetricTool tool;
      if (metric_style == "vmaf")
        tool.style = MetricToolStyle::VmafCli;
      else if (metric_style != "ffmpeg")
        throw UsageError("--tool must be ffmpeg or vmaf");
      if (!g.binary_dir.empty()) {
        tool.ffmpeg = fs::path(g.binary_dir) / "ffmpeg";
        tool.vmaf = fs::path(g.binary_dir) / "vmaf";
      }
      const auto clip = probe_clip(reference);
      const auto scratch = g.work_dir.empty() ? fs::temp_directory_path() / "rdgauge-vmaf" : fs::path(g.work_dir);
      const auto q = measure_quality(distorted, reference, tool, scratch, clip.frame_count);
      std::cout << fmt::format("vmaf={:.6f} psnr_y={:.6f} frames={}\n", q.vmaf_mean, q.psnr_y, q.frames);
      return kOk;
    }

    if (*complexity) {
      const auto refs = collect_clips(clips);
      const fs::path out_path = g.out.empty() ? fs::path(g.store).parent_path() / "complexity.jsonl" : fs::path(g.out);
      std::ofstream out(out_path, std::ios::app);
      if (!out) throw IoError(fmt::format("cannot open {}", out_path.string()));
      std::string scatter = "clip_id,clip_se,clip_te\n";
      for (const auto& c : refs) {
        auto rec = analyze_clip(c.path, {.threads = complexity_threads});
        rec.clip_id = c.id;
        out << to_json_line(rec) << "\n";
        scatter += fmt::format("{},{:.6f},{:.6f}\n", rec.clip_id, rec.clip_se, rec.clip_te);
        std::cout << fmt::format("{}: se={:.4f} te={:.4f}\n", rec.clip_id, rec.clip_se, rec.clip_te);
      }
      if (!scatter_csv.empty()) write_or_print(scatter, scatter_csv);
      return kOk;
    }

    if (*import) {
      std::ifstream in(table);
      if (!in) throw IoError(fmt::format("cannot read {}", table));
      const auto n = import_table(in, defaults, store);
      std::cout << fmt::format("imported {} rows into {}\n", n, g.store);
      return kOk;
    }

    if (*curves) {
      const auto kind = parse_metric(metric);
      std::string csv = curve_csv_header() + "\n";
      for (const auto& key : config_args(configs)) {
        const auto recs = records_for(store, key);
        if (per_clip) {
          for (auto c : per_clip_curves(recs, kind)) {
            c.id = key.label() + "/" + c.id;
            csv += curve_csv_rows(c);
          }
        } else {
          std::set<int> rungs;
          for (const auto& r : recs) rungs.insert(r.target_kbps);
          const std::vector<int> l = ladder.empty() ? std::vector<int>(rungs.begin(), rungs.end()) : ladder;
          csv += curve_csv_rows(aggregate_curve(recs, l, key.label(), kind, parse_aggregation(aggregate)));
        }
      }
      write_or_print(csv, g.out);
      return kOk;
    }

    if (*bdrate) {
      const auto kind = parse_metric(metric);
      const auto a = ConfigKey::parse(anchor), t = ConfigKey::parse(test);
      const auto ra = records_for(store, a), rt = records_for(store, t);
      if (ra.empty() || rt.empty()) throw ValidationError("no records for anchor or test configuration");
      std::set<int> rungs;
      for (const auto& r : ra) rungs.insert(r.target_kbps);
      const std::vector<int> l = ladder.empty() ? std::vector<int>(rungs.begin(), rungs.end()) : ladder;
      const auto result = parse_method(g.method) == BdMethod::Smart
                              ? smart_bd_rate(ra, rt, l, kind, parse_aggregation(aggregate))
                              : classic_bd_rate(ra, rt, kind);
      std::cout << bd_csv_header() << "\n" << bd_csv_row(a.label(), t.label(), kind, result) << "\n";
      if (!result.method_note.empty()) std::cerr << "note: " << result.method_note << "\n";
      return kOk;
    }

    if (*grid) {
      ComparisonGrid out;
      if (grid_kind == "time") {
        auto spec = ScenarioSpec::s1();
        spec.vmaf_threshold = g.threshold;
        auto rows = load_summaries(summaries_path, store, spec);
        if (!configs.empty()) {
          const auto keys = config_args(configs);
          std::vector<ConfigSummary> picked;
          for (const auto& k : keys)
            for (const auto& r : rows)
              if (r.config == k) picked.push_back(r);
          rows = std::move(picked);
        }
        out = time_grid(rows);
      } else if (grid_kind == "bd") {
        if (configs.empty()) throw UsageError("bd grid needs --config");
        const auto keys = config_args(configs);
        const auto records = store.load();
        out = bd_grid(keys, records,
                      {parse_method(g.method), parse_metric(metric), parse_aggregation(aggregate), ladder, 0});
      } else {
        throw UsageError("--kind must be bd or time");
      }
      write_or_print(grid_csv(out), g.out);
      for (const auto& n : out.notes) std::cerr << "N/A " << n << "\n";
      return kOk;
    }

    if (*scenario || *report) {
      const auto lists = parse_shortlists(shortlists);
      ReportInputs inputs;
      for (const auto& id : scenarios) {
        const auto spec = scenario_spec(id, g);
        auto rows = load_summaries(summaries_path, store, spec);
        if (!source.empty()) rows = filter_source(std::move(rows), source);
        if (auto it = lists.find(spec.id); it != lists.end()) rows = filter_source(std::move(rows), it->second);
        inputs.reports.push_back(select_presets(rows, spec));
      }
      if (*scenario) {
        for (const auto& r : inputs.reports) print_report(r);
        return kOk;
      }

      if (g.out.empty()) throw UsageError("report needs --out DIR");
      const auto kind = parse_metric(metric);
      const auto agg = parse_aggregation(aggregate);
      const auto records = store.load();
      std::vector<ConfigKey> picks;
      std::vector<ConfigSummary> pick_rows;
      for (const auto& r : inputs.reports) {
        ScenarioCurves sc{r.scenario_id, {}};
        for (const auto& sel : r.selections) {
          if (!sel.pick) continue;
          if (std::find(picks.begin(), picks.end(), sel.pick->config) == picks.end()) {
            picks.push_back(sel.pick->config);
            pick_rows.push_back(*sel.pick);
          }
          std::vector<MetricRecord> recs;
          for (const auto& rec : records)
            if (ConfigKey::of(rec) == sel.pick->config) recs.push_back(rec);
          if (recs.empty()) continue;
          std::set<int> rungs;
          for (const auto& rec : recs) rungs.insert(rec.target_kbps);
          const std::vector<int> l = ladder.empty() ? std::vector<int>(rungs.begin(), rungs.end()) : ladder;
          try {
            sc.curves.push_back(aggregate_curve(recs, l, sel.pick->config.label(), kind, agg));
          } catch (const DataError& e) {
            std::cerr << fmt::format("warning: no curve for {}: {}\n", sel.pick->config.label(), e.what());
          }
        }
        if (!sc.curves.empty()) inputs.curves.push_back(std::move(sc));
      }
      if (!records.empty() && picks.size() > 1)
        inputs.grids.push_back({fmt::format("bd_{}", g.method),
                                bd_grid(picks, records, {parse_method(g.method), kind, agg, ladder, 0})});
      if (pick_rows.size() > 1) inputs.grids.push_back({"time", time_grid(pick_rows)});
      for (const auto& m : emit_report(inputs, g.out))
        std::cout << fmt::format("{} {}\n", to_string(m.kind), m.path.string());
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const EnvironmentError& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return kEnvironment;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return kEnvironment;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
