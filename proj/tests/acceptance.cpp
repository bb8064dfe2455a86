// Acceptance runner: one PASS/FAIL/SKIP line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "rdgauge/bd.hpp"
#include "rdgauge/complexity.hpp"
#include "rdgauge/encode_plan.hpp"
#include "rdgauge/error.hpp"
#include "rdgauge/process.hpp"
#include "rdgauge/runner.hpp"
#include "rdgauge/scenario.hpp"
#include "rdgauge/y4m.hpp"
#include "support.hpp"

using namespace rdgauge;
namespace ts = testing_support;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass(std::string d) { return {Verdict::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Verdict::Fail, std::move(d)}; }

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<RDPoint> base_curve() { return {{1000, 80}, {2000, 86}, {4000, 91}, {8000, 95}}; }

Outcome c1_scaling() {
  const auto t0 = Clock::now();
  double worst = 0;
  for (double s : {0.5, 0.8, 1.1, 1.25}) {
    auto scaled = base_curve();
    for (auto& p : scaled) p.rate_kbps *= s;
    const double got = bd_rate(ts::curve(base_curve()), ts::curve(scaled)).value;
    worst = std::max(worst, std::abs(got - (s - 1) * 100));
  }
  const double t = since(t0);
  const auto d = fmt::format("max error {:.3g}, {:.3f} s", worst, t);
  return worst <= 1e-9 && t < 1 ? pass(d) : fail(d);
}

struct Pair {
  std::vector<RDPoint> a, b;
};

std::vector<Pair> random_pairs() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n(4, 8);
  std::vector<Pair> out;
  while (out.size() < 200) out.push_back({ts::random_curve(rng, n(rng), 40, 90), ts::random_curve(rng, n(rng), 45, 95)});
  return out;
}

Outcome c2_oracle() {
  const auto t0 = Clock::now();
  double worst = 0;
  for (const auto& p : random_pairs()) {
    const double lib = bd_rate(ts::curve(p.a), ts::curve(p.b)).value;
    worst = std::max(worst, std::abs(lib - ts::oracle_bd_rate(p.a, p.b)));
  }
  const double t = since(t0);
  const auto d = fmt::format("200 pairs, max |diff| {:.3g} pp, {:.2f} s", worst, t);
  return worst <= 0.01 && t < 10 ? pass(d) : fail(d);
}

Outcome c3_antisymmetry() {
  double worst = 0;
  for (const auto& p : random_pairs()) {
    const double ab = bd_rate(ts::curve(p.a), ts::curve(p.b)).value;
    const double ba = bd_rate(ts::curve(p.b), ts::curve(p.a)).value;
    worst = std::max(worst, std::abs((1 + ab / 100) * (1 + ba / 100) - 1));
  }
  const auto d = fmt::format("max |product - 1| {:.3g}", worst);
  return worst <= 1e-6 ? pass(d) : fail(d);
}

Outcome c4_degenerate() {
  const std::vector<std::pair<int, std::pair<double, double>>> a{
      {500, {480, 72}}, {1000, {990, 80}}, {2000, {1950, 87}}, {4000, {4100, 93}}};
  std::vector<MetricRecord> anchor, test;
  std::vector<RDPoint> pa, pt;
  for (const auto& [tbr, rq] : a) {
    pa.push_back({rq.first, rq.second});
    pt.push_back({rq.first * 0.83, rq.second + 0.4});
  }
  for (int c = 0; c < 7; ++c)
    for (std::size_t i = 0; i < a.size(); ++i) {
      anchor.push_back(ts::record("clip" + std::to_string(c), "A", "p", 1, a[i].first, pa[i].rate_kbps, pa[i].quality));
      test.push_back(ts::record("clip" + std::to_string(c), "B", "p", 1, a[i].first, pt[i].rate_kbps, pt[i].quality));
    }
  const double single = bd_rate(ts::curve(pa), ts::curve(pt)).value;
  const std::vector<int> ladder{500, 1000, 2000, 4000};
  const double smart = smart_bd_rate(anchor, test, ladder).value;
  const double classic = classic_bd_rate(anchor, test).value;
  const double worst = std::max(std::abs(smart - single), std::abs(classic - single));
  const auto d = fmt::format("single {:.6f}, smart {:.6f}, classic {:.6f}", single, smart, classic);
  return worst <= 1e-9 ? pass(d) : fail(d);
}

Outcome c5_scenarios() {
  std::ifstream in(ts::fixture("scenario_summaries.csv"));
  const auto rows = import_summaries(in);
  std::vector<ConfigSummary> shortlist;
  for (const auto& r : rows)
    if (r.source == "s3") shortlist.push_back(r);
  struct Want {
    const ScenarioReport* report;
    const char* family;
    const char* preset;
    int passes;
  };
  const auto s1 = select_presets(rows, ScenarioSpec::s1());
  const auto s3 = select_presets(shortlist, ScenarioSpec::s3());
  const std::vector<Want> wants{{&s1, "SVT_AV1", "2", 1},       {&s1, "X264", "veryslow", 2},
                                {&s1, "X265", "veryslow", 2},   {&s1, "NVENC_AV1", "P7", 2},
                                {&s3, "SVT_AV1", "10", 2},      {&s3, "X264", "veryfast", 1},
                                {&s3, "X265", "ultrafast", 1}};
  int ok = 0;
  std::string misses;
  for (const auto& w : wants) {
    const auto* sel = w.report->find(w.family);
    if (sel && sel->pick && sel->pick->config.preset == w.preset && sel->pick->config.passes == w.passes)
      ++ok;
    else
      misses += fmt::format(" {}/{}", w.report->scenario_id, w.family);
  }
  const auto d = fmt::format("{}/{} picks reproduced{}", ok, wants.size(), misses);
  return ok == static_cast<int>(wants.size()) ? pass(d) : fail(d);
}

Outcome c6_time_grid() {
  ConfigSummary a, b;
  a.config = {"X264", "veryslow", 2};
  a.total_hours = 51.18;
  b.config = {"X265", "ultrafast", 1};
  b.total_hours = 40.38;
  const auto g = time_grid(std::vector{a, b});
  const auto cell = g.at(0, 1);
  if (!cell) return fail("cell is N/A");
  const auto d = fmt::format("cell {:.3f}%", *cell);
  return std::abs(*cell + 21.1) <= 0.05 ? pass(d) : fail(d);
}

Outcome c7_commands() {
  struct Case {
    EncoderFamily family;
    int passes;
    std::string file;
  };
  std::vector<Case> cases;
  for (auto [f, stem] : {std::pair{EncoderFamily::X264, "x264"}, {EncoderFamily::X265, "x265"},
                         {EncoderFamily::SVT_AV1, "svt_av1"}, {EncoderFamily::NVENC_AV1, "nvenc_av1"}})
    for (int p : {1, 2}) cases.push_back({f, p, fmt::format("{}_{}pass.txt", stem, p)});
  int ok = 0;
  std::string misses;
  for (const auto& c : cases) {
    EncodeJob j;
    j.clip_id = "clip";
    j.input = "in.y4m";
    j.family = c.family;
    j.preset = c.family == EncoderFamily::SVT_AV1 ? "2" : c.family == EncoderFamily::NVENC_AV1 ? "P7" : "veryslow";
    j.passes = c.passes;
    j.target_kbps = 4000;
    const bool svt = c.family == EncoderFamily::SVT_AV1;
    CommandPaths paths{svt ? "SvtAv1EncApp" : "ffmpeg", svt ? "out.ivf" : "out.mp4", "passfile.log"};
    std::string text;
    for (const auto& argv : build_commands(j, paths)) text += join_command(argv) + "\n";
    if (text == ts::slurp(ts::golden(c.file)))
      ++ok;
    else
      misses += " " + c.file;
  }
  const auto d = fmt::format("{}/{} golden files match{}", ok, cases.size(), misses);
  return ok == static_cast<int>(cases.size()) ? pass(d) : fail(d);
}

Outcome c8_cardinality() {
  std::vector<ClipRef> clips;
  for (int i = 0; i < 62; ++i) clips.push_back({"clip" + std::to_string(i), "clip.y4m"});
  const std::vector<int> passes{1, 2};
  std::vector<std::size_t> got;
  for (auto f : {EncoderFamily::X264, EncoderFamily::X265, EncoderFamily::SVT_AV1, EncoderFamily::NVENC_AV1}) {
    const std::vector<EncoderSpec> specs{EncoderSpec::defaults(f)};
    got.push_back(plan_matrix(clips, specs, default_ladder(), passes).size());
  }
  const std::vector<std::string> toggles{"--enable-dlf 0", "--enable-cdef 0", "--enable-restoration 1",
                                         "--enable-tpl-la 0", "--enable-mfmv 1", "--enable-dg 0",
                                         "--fast-decode 1", "--enable-tf 0", "--enable-overlays 1"};
  const auto sweep = plan_toolsweep({"stem", "stem.y4m"}, toggles).size();
  const auto d = fmt::format("x264 {} x265 {} svt {} nvenc {} toolsweep {}", got[0], got[1], got[2], got[3], sweep);
  return got[0] == 8928 && got[1] == 8928 && got[2] == 8928 && got[3] == 7440 && sweep == 90 ? pass(d) : fail(d);
}

Outcome c9_y4m() {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> dim(1, 12), frames(1, 4), depth(0, 1);
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    VideoHeader h;
    h.width = 2 * dim(rng);
    h.height = 2 * dim(rng);
    h.bit_depth = depth(rng) ? 10 : 8;
    h.chroma = h.bit_depth == 10 ? Chroma::C420p10 : Chroma::C420;
    std::uniform_int_distribution<int> sample(0, h.max_sample());
    std::vector<Frame> clip;
    for (int f = frames(rng); f > 0; --f) {
      auto fr = Frame::filled(h, 0, 0);
      for (auto* p : {&fr.y, &fr.u, &fr.v})
        for (auto& s : p->samples) s = static_cast<std::uint16_t>(sample(rng));
      clip.push_back(std::move(fr));
    }
    std::stringstream buf;
    write_clip(h, clip, buf);
    Y4mReader reader(buf);
    std::vector<Frame> back;
    while (auto f = reader.next()) back.push_back(std::move(*f));
    if (reader.header().same_format(h) && back == clip) ++ok;
  }
  VideoHeader uhd;
  uhd.width = 3840;
  uhd.height = 2160;
  uhd.bit_depth = 10;
  uhd.chroma = Chroma::C420p10;
  const auto bytes = uhd.frame_payload_bytes();
  const auto d = fmt::format("{}/100 round trips, 4K 10-bit payload {} bytes", ok, bytes);
  return ok == 100 && bytes == 24883200 ? pass(d) : fail(d);
}

Outcome c10_complexity() {
  VideoHeader h;
  h.width = 96;
  h.height = 64;
  auto flat = Frame::filled(h, 117, 128);
  std::vector<Frame> constant(4, flat);
  std::stringstream a;
  write_clip(h, constant, a);
  const auto rc = analyze_clip(a, "constant");

  std::mt19937 rng(3);
  std::uniform_int_distribution<int> v(20, 200);
  auto textured = Frame::filled(h, 0, 128);
  for (auto& s : textured.y.samples) s = static_cast<std::uint16_t>(v(rng));
  std::vector<Frame> still(5, textured);
  std::stringstream b;
  write_clip(h, still, b);
  const auto rs = analyze_clip(b, "static");

  auto shifted = textured;
  for (auto& s : shifted.y.samples) s = static_cast<std::uint16_t>(s + 37);
  const double se0 = frame_spatial_energy(textured, 8), se1 = frame_spatial_energy(shifted, 8);

  const bool ok = rc.clip_se == 0.0 && rc.clip_te == 0.0 && rs.clip_te == 0.0 && rs.clip_se > 0 &&
                  std::abs(se0 - se1) <= 1e-9;
  const auto d = fmt::format("constant SE {} TE {}, static TE {}, offset |dSE| {:.3g}", rc.clip_se, rc.clip_te,
                             rs.clip_te, std::abs(se0 - se1));
  return ok ? pass(d) : fail(d);
}

Outcome c11_live() {
  const auto ffmpeg = resolve_executable("ffmpeg");
  if (!ffmpeg) return {Verdict::Skip, "ffmpeg not found"};
  const auto probe = run_process({ffmpeg->string(), "-hide_banner", "-filters"}, {.capture_stdout = true});
  if (probe.stdout_text.find("libvmaf") == std::string::npos) return {Verdict::Skip, "ffmpeg lacks libvmaf"};
  const auto encoders = run_process({ffmpeg->string(), "-hide_banner", "-encoders"}, {.capture_stdout = true});
  if (encoders.stdout_text.find("libx264") == std::string::npos) return {Verdict::Skip, "ffmpeg lacks libx264"};

  const auto t0 = Clock::now();
  ts::TempDir dir("rdgauge-acceptance");
  const auto clip = dir / "smoke.y4m";
  ts::write_synthetic_clip(clip, 64, 64, 48, 8, 11, 60);
  RunnerConfig config;
  config.bin_dir = ffmpeg->parent_path();
  config.work_dir = dir / "work";
  config.metric.ffmpeg = *ffmpeg;
  config.jobs = 2;
  ResultsStore store(dir / "results.jsonl");
  auto spec = EncoderSpec::defaults(EncoderFamily::X264, ffmpeg->parent_path());
  spec.presets = {"ultrafast", "medium"};
  const std::vector<ClipRef> clips{{"smoke", clip}};
  const std::vector<EncoderSpec> specs{spec};
  const std::vector<int> ladder{50, 100, 200}, passes{1};
  const auto jobs = plan_matrix(clips, specs, ladder, passes);
  for (const auto& o : run_jobs(jobs, config, store))
    if (o.status != JobStatus::Ok) return fail(fmt::format("{} failed: {}", o.job.key(), o.error));

  std::vector<RDCurve> curves;
  for (const char* preset : {"ultrafast", "medium"}) {
    std::vector<RDPoint> raw;
    for (const auto& r : store.load(RecordFilter{.preset = preset}))
      if (r.vmaf) raw.push_back({r.measured_kbps, *r.vmaf});
    if (raw.size() != 3) return fail(fmt::format("{} has {} measured points", preset, raw.size()));
    auto c = clean_curve(raw, preset);
    if (c.points.size() < 2) return fail(fmt::format("{} cleans to {} points", preset, c.points.size()));
    for (std::size_t i = 1; i < c.points.size(); ++i)
      if (c.points[i].rate_kbps < c.points[i - 1].rate_kbps || c.points[i].quality < c.points[i - 1].quality)
        return fail(fmt::format("{} curve is not monotone", preset));
    curves.push_back(std::move(c));
  }
  double bd = 0;
  try {
    bd = bd_rate(curves[0], curves[1]).value;
  } catch (const DataError& e) {
    return fail(e.what());
  }
  const double t = since(t0);
  const auto d = fmt::format("x264 ultrafast -> medium BD-Rate {:.2f}%, {:.1f} s", bd, t);
  return std::isfinite(bd) && bd > -100 && t < 120 ? pass(d) : fail(d);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"bd-rate scaling exactness", c1_scaling},
      {"bd-rate oracle equivalence", c2_oracle},
      {"bd-rate antisymmetry", c3_antisymmetry},
      {"smart vs classic degenerate equality", c4_degenerate},
      {"scenario picks from summary tables", c5_scenarios},
      {"migration time cell", c6_time_grid},
      {"command golden files", c7_commands},
      {"plan cardinalities", c8_cardinality},
      {"y4m round trip", c9_y4m},
      {"complexity sanity", c10_complexity},
      {"live encode smoke", c11_live},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(fmt::format("exception: {}", e.what()));
    }
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    if (o.verdict == Verdict::Fail) ++failures;
    std::cout << fmt::format("[{}] {:2}. {}: {}\n", tag, i + 1, criteria[i].first, o.detail);
  }
  return failures == 0 ? 0 : 1;
}
