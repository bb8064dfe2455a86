#pragma once

// Spatial and temporal energy of luma content, computed from an orthonormal
// 32x32 DCT-II. Only AC magnitudes count towards texture energy, so a global
// luma offset leaves spatial energy unchanged.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdgauge/y4m.hpp"

namespace rdgauge {

inline constexpr int kBlockSize = 32;
using LumaBlock = std::array<double, kBlockSize * kBlockSize>;

// Weight applied to the magnitude of each AC coefficient. Uniform for now.
double ac_weight(int row, int col);

// Orthonormal 2-D DCT-II (and its inverse) of a 32x32 block, row-major.
LumaBlock dct2d(const LumaBlock& block);
LumaBlock idct2d(const LumaBlock& coeffs);

double block_texture_energy(const LumaBlock& block, int bit_depth);

// Extracts the block at (bx, by) in block units, replicating the last
// row/column past the plane edge.
LumaBlock extract_block(const Plane& luma, int bx, int by);

double frame_spatial_energy(const Frame& frame, int bit_depth);
double temporal_energy(const Frame& current, const Frame& previous, int bit_depth);

struct ComplexityRecord {
  std::string clip_id;
  std::vector<double> frame_se;
  std::vector<double> frame_te;  // one per consecutive pair
  double clip_se = 0.0;          // mean of frame_se
  double clip_te = 0.0;          // max of frame_te, 0 for single-frame clips
};

struct ComplexityOptions {
  // Worker threads used for per-frame block evaluation; 0 = hardware concurrency.
  unsigned threads = 1;
};

ComplexityRecord analyze_clip(std::istream& y4m, std::string clip_id, const ComplexityOptions& options = {});
ComplexityRecord analyze_clip(const std::filesystem::path& path, const ComplexityOptions& options = {});

// One JSON object per line: {"clip","frames","se","te"}.
std::string to_json_line(const ComplexityRecord& record);

}  // namespace rdgauge
