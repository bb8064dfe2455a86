#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "rdgauge/bd.hpp"
#include "rdgauge/store.hpp"
#include "rdgauge/y4m.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(RDGAUGE_FIXTURE_DIR) / name; }
inline std::filesystem::path golden(const std::string& name) { return std::filesystem::path(RDGAUGE_GOLDEN_DIR) / name; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "rdgauge-test") {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::permissions(path_, std::filesystem::perms::owner_all, std::filesystem::perm_options::add, ec);
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Shape-preserving Hermite interpolant written from the textbook recipe
// (weighted harmonic interior slopes, one-sided three-point ends), kept
// separate from the library so the two can be compared.
class OraclePchip {
 public:
  OraclePchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      del[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    if (n == 2) {
      d_[0] = d_[1] = del[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (del[k - 1] * del[k] <= 0.0) continue;
      const double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
    d_[0] = end_slope(h[0], h[1], del[0], del[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  }

  double operator()(double t) const {
    std::size_t k = 0;
    while (k + 2 < x_.size() && t > x_[k + 1]) ++k;
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
    const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
    return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
  }

  const std::vector<double>& slopes() const { return d_; }

 private:
  static double sign(double v) { return (v > 0) - (v < 0); }
  static double end_slope(double h0, double h1, double m0, double m1) {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (sign(d) != sign(m0))
      d = 0.0;
    else if (sign(m0) != sign(m1) && std::abs(d) > 3 * std::abs(m0))
      d = 3 * m0;
    return d;
  }

  std::vector<double> x_, y_, d_;
};

inline double trapezoid(const OraclePchip& f, double a, double b, int samples = 10001) {
  const double step = (b - a) / (samples - 1);
  double sum = 0.5 * (f(a) + f(b));
  for (int i = 1; i < samples - 1; ++i) sum += f(a + step * i);
  return sum * step;
}

// BD-Rate (%) by sampling: log10(rate) over quality, trapezoid on 10,001 points.
inline double oracle_bd_rate(const std::vector<rdgauge::RDPoint>& anchor, const std::vector<rdgauge::RDPoint>& test) {
  auto make = [](std::vector<rdgauge::RDPoint> pts) {
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.quality < b.quality; });
    std::vector<double> q, lr;
    for (const auto& p : pts) {
      q.push_back(p.quality);
      lr.push_back(std::log10(p.rate_kbps));
    }
    return std::make_pair(OraclePchip(q, lr), std::make_pair(q.front(), q.back()));
  };
  const auto [fa, ra] = make(anchor);
  const auto [ft, rt] = make(test);
  const double lo = std::max(ra.first, rt.first), hi = std::min(ra.second, rt.second);
  const double avg = (trapezoid(ft, lo, hi) - trapezoid(fa, lo, hi)) / (hi - lo);
  return (std::pow(10.0, avg) - 1.0) * 100.0;
}

// Monotone (rate up, quality up) curve with n >= 2 points.
inline std::vector<rdgauge::RDPoint> random_curve(std::mt19937_64& rng, int n, double q_lo, double q_hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> q(n), r(n);
  // Ends land within 10% of the range limits so curves drawn from
  // overlapping ranges overlap.
  const double span = q_hi - q_lo;
  for (auto& v : q) v = q_lo + span * u(rng);
  q[0] = q_lo + 0.1 * span * u(rng);
  q[n - 1] = q_hi - 0.1 * span * u(rng);
  std::sort(q.begin(), q.end());
  for (int i = 1; i < n; ++i)
    if (q[i] - q[i - 1] < 0.05) q[i] = q[i - 1] + 0.05;
  double lr = 2.3 + 0.5 * u(rng);
  std::vector<rdgauge::RDPoint> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({std::pow(10.0, lr), q[i]});
    lr += 0.05 + 0.4 * u(rng);
  }
  return out;
}

inline rdgauge::RDCurve curve(std::vector<rdgauge::RDPoint> pts, std::string id = "c") {
  return {std::move(id), rdgauge::MetricKind::VMAF, std::move(pts)};
}

inline rdgauge::MetricRecord record(std::string clip, std::string family, std::string preset, int passes, int tbr,
                                    double kbps, double vmaf, double seconds = 10.0) {
  rdgauge::MetricRecord r;
  r.clip_id = std::move(clip);
  r.family = std::move(family);
  r.preset = std::move(preset);
  r.passes = passes;
  r.target_kbps = tbr;
  r.measured_kbps = kbps;
  r.vmaf = vmaf;
  r.psnr_y = 40.0;
  r.encode_seconds = seconds;
  r.output_bytes = 1000;
  r.tool_version = "test";
  r.created_at = rdgauge::now_timestamp();
  return r;
}

// Moving gradient with noise; deterministic for a given seed.
inline void write_synthetic_clip(const std::filesystem::path& path, int w, int h, int frames, int bit_depth,
                                 unsigned seed = 1, int noise_amplitude = 6) {
  rdgauge::VideoHeader hdr;
  hdr.width = w;
  hdr.height = h;
  hdr.fps = {24, 1};
  hdr.chroma = bit_depth > 8 ? rdgauge::Chroma::C420p10 : rdgauge::Chroma::C420;
  hdr.bit_depth = bit_depth;
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> noise(-noise_amplitude, noise_amplitude);
  const int max = (1 << bit_depth) - 1;
  const int scale = 1 << (bit_depth - 8);
  std::vector<rdgauge::Frame> out;
  for (int f = 0; f < frames; ++f) {
    auto fr = rdgauge::Frame::filled(hdr, static_cast<std::uint16_t>(128 * scale), static_cast<std::uint16_t>(128 * scale));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int v = ((x * 3 + y * 2 + f * 4) % 200 + 20 + noise(rng)) * scale;
        fr.y.at(x, y) = static_cast<std::uint16_t>(std::clamp(v, 0, max));
      }
    for (int y = 0; y < h / 2; ++y)
      for (int x = 0; x < w / 2; ++x) {
        fr.u.at(x, y) = static_cast<std::uint16_t>(std::clamp((100 + x + f) * scale, 0, max));
        fr.v.at(x, y) = static_cast<std::uint16_t>(std::clamp((150 - y) * scale, 0, max));
      }
    out.push_back(std::move(fr));
  }
  std::ofstream os(path, std::ios::binary);
  rdgauge::write_clip(hdr, out, os);
}

}  // namespace testing_support
