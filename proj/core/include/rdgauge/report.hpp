#pragma once

// Report emission: recommendation text, CSV tables and SVG plots.

#include <filesystem>
#include <string>
#include <vector>

#include "rdgauge/bd.hpp"
#include "rdgauge/scenario.hpp"

namespace rdgauge {

struct NamedGrid {
  std::string name;  // file stem suffix: grid_<name>.csv / .svg
  ComparisonGrid grid;
};

// RD curves drawn on one plot per scenario.
struct ScenarioCurves {
  std::string scenario_id;
  std::vector<RDCurve> curves;
};

struct ReportInputs {
  std::vector<ScenarioReport> reports;
  std::vector<NamedGrid> grids;
  std::vector<ScenarioCurves> curves;
};

enum class ArtifactKind { ReportText, CurvesCsv, RdSvg, GridCsv, GridSvg, CoverageSvg };
std::string_view to_string(ArtifactKind kind);

struct ManifestEntry {
  ArtifactKind kind;
  std::filesystem::path path;
};

struct RenderedFile {
  ArtifactKind kind;
  std::string name;
  std::string content;
};

// Files, in emission order:
//   report.txt                       always
//   curves.csv, rd_<scenario>.svg    when curves are given (one SVG per scenario)
//   grid_<name>.csv, grid_<name>.svg per grid
//   coverage_time.svg                when any supporting summary has hours
std::vector<RenderedFile> render_report(const ReportInputs& inputs);

std::string recommendation_text(const ReportInputs& inputs);

// Renders everything in memory, writes each file to a temporary sibling and
// renames once all writes succeeded. Throws IoError; existing files are left
// untouched on failure.
std::vector<ManifestEntry> emit_report(const ReportInputs& inputs, const std::filesystem::path& out_dir);

}  // namespace rdgauge
