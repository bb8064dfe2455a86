#include "rdgauge/report.hpp"

#include <cctype>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "rdgauge/error.hpp"
#include "svg.hpp"

namespace rdgauge {
namespace {

std::string file_stem(std::string_view s) {
  std::string out;
  for (unsigned char c : s) out.push_back(std::isalnum(c) || c == '-' || c == '_' ? static_cast<char>(c) : '_');
  return out.empty() ? "unnamed" : out;
}

std::string signed_pct(double v) { return fmt::format("{:+.2f}%", v); }

void grid_section(std::string& out, const NamedGrid& g) {
  const bool time = g.grid.kind == ComparisonGrid::Kind::EncodeTime;
  out += fmt::format("\n== {} grid '{}' ({}) ==\n", time ? "Encode-time" : "BD-Rate", g.name, g.grid.method);
  const auto& labels = g.grid.labels;
  for (std::size_t a = 0; a < labels.size(); ++a)
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (a == t) continue;
      const auto& v = g.grid.cells[a][t];
      if (!v) {
        out += fmt::format("If I switch from {} to {}: N/A\n", labels[a], labels[t]);
        continue;
      }
      if (time)
        out += fmt::format("If I switch from {} to {}: encode time {} ({})\n", labels[a], labels[t], signed_pct(*v),
                           *v < 0 ? "faster pipeline" : "slower pipeline");
      else
        out += fmt::format("If I switch from {} to {}: BD-Rate {} ({})\n", labels[a], labels[t], signed_pct(*v),
                           *v < 0 ? "bitrate savings" : "bitrate increase");
    }
  for (const auto& n : g.grid.notes) out += fmt::format("note: {}\n", n);
}

}  // namespace

std::string_view to_string(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::ReportText: return "report";
    case ArtifactKind::CurvesCsv: return "curves-csv";
    case ArtifactKind::RdSvg: return "rd-svg";
    case ArtifactKind::GridCsv: return "grid-csv";
    case ArtifactKind::GridSvg: return "grid-svg";
    case ArtifactKind::CoverageSvg: return "coverage-svg";
  }
  return "?";
}

std::string recommendation_text(const ReportInputs& inputs) {
  std::string out = "Encoder preset recommendations\n";
  for (const auto& r : inputs.reports) {
    const auto& s = r.spec;
    out += fmt::format("\n== Scenario {} ==\n", r.scenario_id);
    out += fmt::format("gates: vmaf > {:g}, checkpoint {} kb/s, overshoot > {:g}%", s.vmaf_threshold,
                       s.checkpoint_kbps, 100.0 * s.overshoot_threshold);
    if (s.time_budget_hours)
      out += fmt::format(", budget {:g} h (tolerance {:g}%)", *s.time_budget_hours, 100.0 * s.budget_tolerance);
    if (s.objective == Objective::FastestWithinCoverage)
      out += fmt::format(", coverage slack {:g} points", s.coverage_slack_points);
    out += "\n";
    for (const auto& sel : r.selections) {
      if (sel.pick)
        out += fmt::format("{}: preset {} at {}-pass\n  {}\n", sel.family, sel.pick->config.preset,
                           sel.pick->config.passes, sel.rationale);
      else
        out += fmt::format("{}: no recommendation\n  {}\n", sel.family, sel.rationale);
    }
  }
  for (const auto& g : inputs.grids) grid_section(out, g);
  return out;
}

std::vector<RenderedFile> render_report(const ReportInputs& inputs) {
  std::vector<RenderedFile> files;
  files.push_back({ArtifactKind::ReportText, "report.txt", recommendation_text(inputs)});

  if (!inputs.curves.empty()) {
    std::string csv = "scenario," + curve_csv_header() + "\n";
    for (const auto& sc : inputs.curves)
      for (const auto& c : sc.curves) {
        const auto rows = curve_csv_rows(c);
        std::size_t pos = 0;
        while (pos < rows.size()) {
          const auto nl = rows.find('\n', pos);
          const auto end = nl == std::string::npos ? rows.size() : nl;
          if (end > pos) csv += sc.scenario_id + "," + rows.substr(pos, end - pos) + "\n";
          pos = end + 1;
        }
      }
    files.push_back({ArtifactKind::CurvesCsv, "curves.csv", std::move(csv)});
    for (const auto& sc : inputs.curves)
      files.push_back({ArtifactKind::RdSvg, fmt::format("rd_{}.svg", file_stem(sc.scenario_id)),
                       svg::rd_plot(fmt::format("RD curves, scenario {}", sc.scenario_id), sc.curves)});
  }

  for (const auto& g : inputs.grids) {
    const auto stem = "grid_" + file_stem(g.name);
    files.push_back({ArtifactKind::GridCsv, stem + ".csv", grid_csv(g.grid)});
    const auto title = g.grid.kind == ComparisonGrid::Kind::EncodeTime
                           ? fmt::format("Encode time difference (%): {}", g.name)
                           : fmt::format("BD-Rate (%) grid, {}: {}", g.grid.method, g.name);
    files.push_back({ArtifactKind::GridSvg, stem + ".svg", svg::heatmap(title, g.grid)});
  }

  std::vector<svg::ScatterPoint> points;
  std::set<std::string> seen;
  std::set<std::string> picked;
  for (const auto& r : inputs.reports)
    for (const auto& sel : r.selections)
      if (sel.pick) picked.insert(sel.pick->config.label());
  for (const auto& r : inputs.reports)
    for (const auto& s : r.supporting)
      if (s.total_hours && *s.total_hours > 0 && seen.insert(s.config.label()).second)
        points.push_back({s.config.label(), *s.total_hours, 100.0 * s.coverage_fraction(),
                          picked.count(s.config.label()) > 0});
  if (!points.empty())
    files.push_back({ArtifactKind::CoverageSvg, "coverage_time.svg",
                     svg::scatter("Coverage vs encode time", "encode time (hours, log scale)",
                                  "clips above VMAF threshold (%)", points)});

  std::set<std::string> names;
  for (const auto& f : files)
    if (!names.insert(f.name).second) throw ValidationError(fmt::format("duplicate report file name {}", f.name));
  return files;
}

std::vector<ManifestEntry> emit_report(const ReportInputs& inputs, const std::filesystem::path& out_dir) {
  const auto files = render_report(inputs);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError(fmt::format("cannot create output directory {}: {}", out_dir.string(), ec.message()));

  std::vector<std::filesystem::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) std::filesystem::remove(t, ec);
  };
  for (const auto& f : files) {
    const auto tmp = out_dir / ("." + f.name + ".tmp");
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
    out.close();
    if (!out) {
      cleanup();
      throw IoError(fmt::format("cannot write {}", (out_dir / f.name).string()));
    }
  }
  for (const auto& f : files) {
    const auto target = out_dir / f.name;
    if (std::filesystem::exists(target) && !std::filesystem::is_regular_file(target)) {
      cleanup();
      throw IoError(fmt::format("cannot replace {}: not a regular file", target.string()));
    }
  }
  std::vector<ManifestEntry> manifest;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto target = out_dir / files[i].name;
    std::filesystem::rename(temps[i], target, ec);
    if (ec) {
      cleanup();
      throw IoError(fmt::format("cannot rename into {}: {}", target.string(), ec.message()));
    }
    manifest.push_back({files[i].kind, target});
  }
  return manifest;
}

}  // namespace rdgauge
