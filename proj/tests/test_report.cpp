#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "rdgauge/error.hpp"
#include "rdgauge/report.hpp"
#include "support.hpp"

using namespace rdgauge;
using testing_support::record;
using testing_support::TempDir;

namespace {

std::vector<ConfigSummary> rows() {
  std::ifstream in(testing_support::fixture("scenario_summaries.csv"));
  return import_summaries(in);
}

// Three scenarios with curves from a synthetic store, one BD grid and one time grid.
ReportInputs full_inputs() {
  ReportInputs in;
  const auto all = rows();
  for (auto spec : {ScenarioSpec::s1(), ScenarioSpec::s2(), ScenarioSpec::s3()}) in.reports.push_back(select_presets(all, spec));

  std::vector<MetricRecord> recs;
  const std::vector<std::pair<std::string, double>> presets{{"slow", 1.0}, {"fast", 1.3}};
  for (const auto& [preset, scale] : presets)
    for (int c = 0; c < 3; ++c)
      for (int tbr : {500, 1000, 2000, 4000})
        recs.push_back(record("c" + std::to_string(c), "X264", preset, 1, tbr, tbr * scale, 60 + 8 * std::log2(tbr / 250.0) + c));
  const std::vector<int> ladder{500, 1000, 2000, 4000};
  for (const char* id : {"S1", "S2", "S3"}) {
    ScenarioCurves sc{id, {}};
    for (const auto& [preset, scale] : presets) {
      std::vector<MetricRecord> slice;
      for (const auto& r : recs)
        if (r.preset == preset) slice.push_back(r);
      sc.curves.push_back(aggregate_curve(slice, ladder, "X264:" + preset + ":1"));
    }
    in.curves.push_back(std::move(sc));
  }
  const std::vector<ConfigKey> keys{{"X264", "slow", 1}, {"X264", "fast", 1}};
  in.grids.push_back({"bd", bd_grid(keys, recs)});
  in.grids.push_back({"time", time_grid(in.reports[0].supporting)});
  return in;
}

std::map<ArtifactKind, int> count(const std::vector<ManifestEntry>& m) {
  std::map<ArtifactKind, int> out;
  for (const auto& e : m) ++out[e.kind];
  return out;
}

}  // namespace

TEST(Report, ThreeScenarioArtifactCounts) {
  TempDir dir;
  const auto manifest = emit_report(full_inputs(), dir / "out");
  auto c = count(manifest);
  EXPECT_EQ(c[ArtifactKind::ReportText], 1);
  EXPECT_EQ(c[ArtifactKind::RdSvg], 3);
  EXPECT_EQ(c[ArtifactKind::GridCsv], 2);
  EXPECT_EQ(c[ArtifactKind::GridSvg], 2);
  EXPECT_EQ(c[ArtifactKind::CurvesCsv], 1);
  for (const auto& e : manifest) EXPECT_TRUE(std::filesystem::exists(e.path)) << e.path;
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "out")) ++files;
  EXPECT_EQ(files, manifest.size());
}

TEST(Report, Deterministic) {
  TempDir a, b;
  const auto ma = emit_report(full_inputs(), a / "r");
  const auto mb = emit_report(full_inputs(), b / "r");
  ASSERT_EQ(ma.size(), mb.size());
  for (std::size_t i = 0; i < ma.size(); ++i) {
    EXPECT_EQ(ma[i].path.filename(), mb[i].path.filename());
    EXPECT_EQ(testing_support::slurp(ma[i].path), testing_support::slurp(mb[i].path)) << ma[i].path;
  }
}

TEST(Report, EmptyGridsGiveTextAndCurvesOnly) {
  auto in = full_inputs();
  in.grids.clear();
  for (auto& r : in.reports) r.supporting.clear();
  const auto files = render_report(in);
  for (const auto& f : files)
    EXPECT_TRUE(f.kind == ArtifactKind::ReportText || f.kind == ArtifactKind::CurvesCsv || f.kind == ArtifactKind::RdSvg)
        << f.name;
  EXPECT_EQ(files.front().name, "report.txt");
}

TEST(Report, RecommendationText) {
  ReportInputs in;
  in.reports.push_back(select_presets(rows(), ScenarioSpec::s1()));
  in.grids.push_back({"time", time_grid(in.reports[0].supporting)});
  const auto text = recommendation_text(in);
  EXPECT_NE(text.find("SVT_AV1:2:1"), std::string::npos);
  EXPECT_NE(text.find("If I switch from"), std::string::npos);
  EXPECT_NE(text.find("encode time"), std::string::npos) << text;
}

TEST(Report, UnwritableDestinationLeavesExistingFiles) {
  TempDir dir;
  const auto out = dir / "out";
  const auto first = emit_report(full_inputs(), out);
  const auto before = testing_support::slurp(out / "report.txt");

  // A regular file where the output directory should be.
  const auto blocked = dir / "blocked";
  std::ofstream(blocked) << "keep";
  EXPECT_THROW(emit_report(full_inputs(), blocked / "sub"), IoError);
  EXPECT_EQ(testing_support::slurp(blocked), "keep");

  // A grid that fails to write after some files are staged.
  auto in = full_inputs();
  in.grids.push_back({"x", in.grids[0].grid});
  std::filesystem::create_directory(out / "grid_x.csv");
  EXPECT_THROW(emit_report(in, out), IoError);
  EXPECT_EQ(testing_support::slurp(out / "report.txt"), before);
  for (const auto& e : std::filesystem::directory_iterator(out))
    EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos) << e.path();
}
