#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "rdgauge/complexity.hpp"
#include "rdgauge/error.hpp"
#include "support.hpp"

using namespace rdgauge;

namespace {

VideoHeader hdr(int w, int h, int bd = 8) {
  VideoHeader v;
  v.width = w;
  v.height = h;
  v.fps = {24, 1};
  v.bit_depth = bd;
  v.chroma = bd > 8 ? Chroma::C420p10 : Chroma::C420;
  return v;
}

Frame textured(const VideoHeader& h, unsigned seed, int offset = 0) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(20, 200);
  auto f = Frame::filled(h, 0, 128);
  for (auto& s : f.y.samples) s = static_cast<std::uint16_t>(d(rng) + offset);
  return f;
}

std::stringstream clip_of(const VideoHeader& h, const std::vector<Frame>& frames) {
  std::stringstream ss;
  write_clip(h, frames, ss);
  return ss;
}

// Direct evaluation of one orthonormal DCT-II coefficient.
double naive_dct(const LumaBlock& b, int u, int v) {
  const int n = kBlockSize;
  const double cu = u ? std::sqrt(2.0 / n) : std::sqrt(1.0 / n);
  const double cv = v ? std::sqrt(2.0 / n) : std::sqrt(1.0 / n);
  double sum = 0.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      sum += b[y * n + x] * std::cos((2 * y + 1) * u * std::numbers::pi / (2 * n)) *
             std::cos((2 * x + 1) * v * std::numbers::pi / (2 * n));
  return cu * cv * sum;
}

}  // namespace

TEST(Dct, MatchesDirectFormula) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(0, 255);
  LumaBlock b;
  for (auto& v : b) v = d(rng);
  const auto c = dct2d(b);
  for (auto [u, v] : {std::pair{0, 0}, {0, 5}, {3, 0}, {7, 11}, {31, 31}, {16, 1}})
    EXPECT_NEAR(c[u * kBlockSize + v], naive_dct(b, u, v), 1e-9) << u << "," << v;
}

TEST(Dct, InverseRoundTrips) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> d(-50, 300);
  LumaBlock b;
  for (auto& v : b) v = d(rng);
  const auto back = idct2d(dct2d(b));
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(back[i], b[i], 1e-9);
}

TEST(TextureEnergy, FlatBlockIsExactlyZero) {
  LumaBlock b;
  b.fill(173.0);
  EXPECT_EQ(block_texture_energy(b, 8), 0.0);
}

TEST(TextureEnergy, NonNegativeAndDepthNormalised) {
  const auto h8 = hdr(64, 64, 8), h10 = hdr(64, 64, 10);
  const auto f8 = textured(h8, 3);
  auto f10 = Frame::filled(h10, 0, 512);
  for (std::size_t i = 0; i < f8.y.samples.size(); ++i) f10.y.samples[i] = f8.y.samples[i] * 4;
  const double se8 = frame_spatial_energy(f8, 8), se10 = frame_spatial_energy(f10, 10);
  EXPECT_GT(se8, 0.0);
  EXPECT_NEAR(se8, se10, 1e-9 * se8);
}

TEST(TextureEnergy, InvariantUnderLumaOffset) {
  const auto h = hdr(96, 64);
  const auto a = textured(h, 11, 0), b = textured(h, 11, 40);
  EXPECT_NEAR(frame_spatial_energy(a, 8), frame_spatial_energy(b, 8), 1e-9);
}

TEST(ExtractBlock, ReplicatesEdges) {
  const auto h = hdr(40, 34);
  const auto f = textured(h, 5);
  const auto b = extract_block(f.y, 1, 1);
  // Block (1,1) covers x 32..63, y 32..63; the plane ends at x 39, y 33.
  EXPECT_EQ(b[0], f.y.at(32, 32));
  EXPECT_EQ(b[31], f.y.at(39, 32));
  EXPECT_EQ(b[5 * 32 + 20], f.y.at(39, 33));
}

TEST(TemporalEnergy, StaticPairIsZeroAndSymmetric) {
  const auto h = hdr(64, 48);
  const auto a = textured(h, 1), b = textured(h, 2);
  EXPECT_EQ(temporal_energy(a, a, 8), 0.0);
  EXPECT_GT(temporal_energy(a, b, 8), 0.0);
  EXPECT_DOUBLE_EQ(temporal_energy(a, b, 8), temporal_energy(b, a, 8));
  EXPECT_THROW(temporal_energy(a, textured(hdr(32, 48), 1), 8), ValidationError);
}

TEST(AnalyzeClip, ConstantClipIsExactlyZero) {
  const auto h = hdr(64, 64);
  std::vector<Frame> frames(6, Frame::filled(h, 90, 128));
  auto ss = clip_of(h, frames);
  const auto r = analyze_clip(ss, "flat");
  EXPECT_EQ(r.clip_se, 0.0);
  EXPECT_EQ(r.clip_te, 0.0);
  EXPECT_EQ(r.frame_te.size(), 5u);
}

TEST(AnalyzeClip, IdenticalFramesKeepFrameEnergy) {
  const auto h = hdr(64, 64);
  const auto f = textured(h, 21);
  std::vector<Frame> frames(10, f);
  auto ss = clip_of(h, frames);
  const auto r = analyze_clip(ss, "static");
  EXPECT_EQ(r.clip_te, 0.0);
  EXPECT_DOUBLE_EQ(r.clip_se, frame_spatial_energy(f, 8));
}

TEST(AnalyzeClip, SingleFrameHasNoPairs) {
  const auto h = hdr(32, 32);
  auto ss = clip_of(h, {textured(h, 4)});
  const auto r = analyze_clip(ss, "one");
  EXPECT_TRUE(r.frame_te.empty());
  EXPECT_EQ(r.clip_te, 0.0);
}

TEST(AnalyzeClip, AlternatingFramesGivePairEnergy) {
  const auto h = hdr(64, 32);
  const auto a = textured(h, 8), b = textured(h, 9);
  auto ss = clip_of(h, {a, b, a, b, a});
  const auto r = analyze_clip(ss, "alt");
  EXPECT_DOUBLE_EQ(r.clip_te, temporal_energy(b, a, 8));
  for (double te : r.frame_te) EXPECT_DOUBLE_EQ(te, r.clip_te);
}

TEST(AnalyzeClip, SummariesAndThreadingAreConsistent) {
  const auto h = hdr(96, 64, 10);
  std::vector<Frame> frames;
  for (unsigned i = 0; i < 7; ++i) {
    auto f = Frame::filled(h, 0, 512);
    const auto t = textured(hdr(96, 64), i);
    for (std::size_t k = 0; k < t.y.samples.size(); ++k) f.y.samples[k] = t.y.samples[k] * 4 + i;
    frames.push_back(f);
  }
  auto s1 = clip_of(h, frames), s4 = clip_of(h, frames);
  const auto one = analyze_clip(s1, "c", {.threads = 1});
  const auto four = analyze_clip(s4, "c", {.threads = 4});
  EXPECT_EQ(one.frame_se, four.frame_se);
  EXPECT_EQ(one.frame_te, four.frame_te);
  double sum = 0.0, max_se = 0.0;
  for (double v : one.frame_se) {
    EXPECT_GE(v, 0.0);
    sum += v;
    max_se = std::max(max_se, v);
  }
  EXPECT_NEAR(one.clip_se, sum / 7.0, 1e-12);
  EXPECT_LE(one.clip_se, max_se);
  EXPECT_EQ(one.clip_te, *std::max_element(one.frame_te.begin(), one.frame_te.end()));
  const auto line = to_json_line(one);
  EXPECT_NE(line.find("\"clip\":\"c\""), std::string::npos);
  EXPECT_EQ(line.find('\n'), std::string::npos);
}
