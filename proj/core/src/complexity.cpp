#include "rdgauge/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "rdgauge/error.hpp"

namespace rdgauge {
namespace {

constexpr int N = kBlockSize;
constexpr double kArea = static_cast<double>(N * N);

struct DctBasis {
  std::array<double, N * N> c{};  // c[k * N + n]
  DctBasis() {
    for (int k = 0; k < N; ++k) {
      const double alpha = k == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N);
      for (int n = 0; n < N; ++n)
        c[k * N + n] = alpha * std::cos(std::numbers::pi * (2 * n + 1) * k / (2.0 * N));
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

double depth_scale(int bit_depth) { return std::ldexp(1.0, -(bit_depth - 8)); }

int blocks_across(int extent) { return (extent + N - 1) / N; }

// Runs fn(i) for i in [0, count) over `threads` contiguous chunks.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk, end = std::min(count, begin + chunk);
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

std::vector<double> block_energies(const Frame& frame, int bit_depth, unsigned threads) {
  const int bw = blocks_across(frame.y.width), bh = blocks_across(frame.y.height);
  std::vector<double> out(static_cast<std::size_t>(bw) * bh);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i] = block_texture_energy(extract_block(frame.y, static_cast<int>(i % bw), static_cast<int>(i / bw)),
                                  bit_depth);
  });
  return out;
}

// Mean over blocks of the per-block mean absolute luma difference, padded
// samples included.
double mean_abs_block_difference(const Plane& a, const Plane& b, unsigned threads) {
  const int bw = blocks_across(a.width), bh = blocks_across(a.height);
  std::vector<double> per_block(static_cast<std::size_t>(bw) * bh);
  parallel_for(per_block.size(), threads, [&](std::size_t i) {
    const auto ba = extract_block(a, static_cast<int>(i % bw), static_cast<int>(i / bw));
    const auto bb = extract_block(b, static_cast<int>(i % bw), static_cast<int>(i / bw));
    double sum = 0.0;
    for (int k = 0; k < N * N; ++k) sum += std::abs(ba[k] - bb[k]);
    per_block[i] = sum / kArea;
  });
  double total = 0.0;
  for (double v : per_block) total += v;
  return total / static_cast<double>(per_block.size());
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double pair_energy(const std::vector<double>& cur_e, const std::vector<double>& prev_e,
                   const Plane& cur, const Plane& prev, int bit_depth, unsigned threads) {
  double texture = 0.0;
  for (std::size_t i = 0; i < cur_e.size(); ++i) texture += std::abs(cur_e[i] - prev_e[i]);
  texture /= static_cast<double>(cur_e.size());
  return texture + mean_abs_block_difference(cur, prev, threads) * depth_scale(bit_depth);
}

}  // namespace

double ac_weight(int, int) { return 1.0; }

LumaBlock dct2d(const LumaBlock& x) {
  const auto& c = basis().c;
  LumaBlock tmp{}, out{};
  // tmp = C * X
  for (int k = 0; k < N; ++k)
    for (int col = 0; col < N; ++col) {
      double s = 0.0;
      for (int n = 0; n < N; ++n) s += c[k * N + n] * x[n * N + col];
      tmp[k * N + col] = s;
    }
  // out = tmp * C^T
  for (int row = 0; row < N; ++row)
    for (int k = 0; k < N; ++k) {
      double s = 0.0;
      for (int n = 0; n < N; ++n) s += tmp[row * N + n] * c[k * N + n];
      out[row * N + k] = s;
    }
  return out;
}

LumaBlock idct2d(const LumaBlock& y) {
  const auto& c = basis().c;
  LumaBlock tmp{}, out{};
  // tmp = C^T * Y
  for (int n = 0; n < N; ++n)
    for (int col = 0; col < N; ++col) {
      double s = 0.0;
      for (int k = 0; k < N; ++k) s += c[k * N + n] * y[k * N + col];
      tmp[n * N + col] = s;
    }
  // out = tmp * C
  for (int row = 0; row < N; ++row)
    for (int n = 0; n < N; ++n) {
      double s = 0.0;
      for (int k = 0; k < N; ++k) s += tmp[row * N + k] * c[k * N + n];
      out[row * N + n] = s;
    }
  return out;
}

double block_texture_energy(const LumaBlock& block, int bit_depth) {
  // Removing the mean only touches DC. It makes flat blocks transform to exact
  // zeros instead of rounding noise.
  double dc = 0.0;
  for (double s : block) dc += s;
  dc /= kArea;
  LumaBlock centered;
  for (std::size_t i = 0; i < block.size(); ++i) centered[i] = block[i] - dc;
  const LumaBlock coeffs = dct2d(centered);
  double energy = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (i != 0 || j != 0) energy += std::abs(coeffs[i * N + j]) * ac_weight(i, j);
  return energy / kArea * depth_scale(bit_depth);
}

LumaBlock extract_block(const Plane& luma, int bx, int by) {
  LumaBlock block{};
  for (int y = 0; y < N; ++y) {
    const int sy = std::min(by * N + y, luma.height - 1);
    for (int x = 0; x < N; ++x) {
      const int sx = std::min(bx * N + x, luma.width - 1);
      block[y * N + x] = luma.at(sx, sy);
    }
  }
  return block;
}

double frame_spatial_energy(const Frame& frame, int bit_depth) {
  return mean(block_energies(frame, bit_depth, 1));
}

double temporal_energy(const Frame& current, const Frame& previous, int bit_depth) {
  if (current.y.width != previous.y.width || current.y.height != previous.y.height)
    throw ValidationError(fmt::format("temporal energy: frame sizes differ ({}x{} vs {}x{})",
                                      current.y.width, current.y.height, previous.y.width,
                                      previous.y.height));
  return pair_energy(block_energies(current, bit_depth, 1), block_energies(previous, bit_depth, 1),
                     current.y, previous.y, bit_depth, 1);
}

ComplexityRecord analyze_clip(std::istream& y4m, std::string clip_id, const ComplexityOptions& options) {
  Y4mReader reader(y4m);
  const int depth = reader.header().bit_depth;

  ComplexityRecord rec;
  rec.clip_id = std::move(clip_id);
  std::optional<Frame> prev;
  std::vector<double> prev_energies;
  while (auto frame = reader.next()) {
    auto energies = block_energies(*frame, depth, options.threads);
    rec.frame_se.push_back(mean(energies));
    if (prev)
      rec.frame_te.push_back(
          pair_energy(energies, prev_energies, frame->y, prev->y, depth, options.threads));
    prev = std::move(frame);
    prev_energies = std::move(energies);
  }
  if (rec.frame_se.empty()) throw FormatError(fmt::format("complexity: clip '{}' has no frames", rec.clip_id));
  rec.clip_se = mean(rec.frame_se);
  rec.clip_te = rec.frame_te.empty() ? 0.0 : *std::max_element(rec.frame_te.begin(), rec.frame_te.end());
  return rec;
}

ComplexityRecord analyze_clip(const std::filesystem::path& path, const ComplexityOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("complexity: cannot open {}", path.string()));
  return analyze_clip(in, path.stem().string(), options);
}

std::string to_json_line(const ComplexityRecord& r) {
  nlohmann::ordered_json j;
  j["clip"] = r.clip_id;
  j["frames"] = r.frame_se.size();
  j["se"] = r.clip_se;
  j["te"] = r.clip_te;
  return j.dump();
}

}  // namespace rdgauge
