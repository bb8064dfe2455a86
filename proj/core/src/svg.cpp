#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace rdgauge::svg {
namespace {

constexpr double kWidth = 720, kHeight = 480, kLeft = 70, kRight = 200, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

std::string open(double w, double h, const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" viewBox=\"0 0 {0:.0f} "
      "{1:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      w, h, w / 2, escape(title));
}

struct Frame {
  Range x, y;
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }
};

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label, bool log_x) {
  std::string out = fmt::format(
      "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
      kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x.lo + (f.x.hi - f.x.lo) * i / 5.0;
    const double yv = f.y.lo + (f.y.hi - f.y.lo) * i / 5.0;
    const double shown = log_x ? std::pow(10.0, xv) : xv;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", f.px(xv),
                       kHeight - kBottom + 16, shown >= 100 ? fmt::format("{:.0f}", shown) : fmt::format("{:.2f}", shown));
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.1f}</text>\n", kLeft - 6,
                       f.py(yv) + 4, yv);
  }
  out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                     (kLeft + kWidth - kRight) / 2, kHeight - 18, escape(x_label));
  out += fmt::format(
      "<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1f})\">{1}</text>\n",
      (kTop + kHeight - kBottom) / 2, escape(y_label));
  return out;
}

std::string legend_entry(std::size_t i, const std::string& label, const char* colour) {
  const double y = kTop + 10 + 18.0 * static_cast<double>(i);
  return fmt::format(
      "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n"
      "<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n",
      kWidth - kRight + 12, y - 9, colour, kWidth - kRight + 28, y, escape(label));
}

// Diverging scale: green for negative (savings), red for positive.
std::string cell_colour(double v, double scale) {
  const double t = scale > 0 ? std::clamp(std::abs(v) / scale, 0.0, 1.0) : 0.0;
  const int fade = static_cast<int>(std::lround(255 - 175 * t));
  return v < 0 ? fmt::format("#{:02x}ff{:02x}", fade, fade) : fmt::format("#ff{:02x}{:02x}", fade, fade);
}

}  // namespace

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string rd_plot(const std::string& title, const std::vector<RDCurve>& curves) {
  Frame f;
  for (const auto& c : curves)
    for (const auto& p : c.points)
      if (p.rate_kbps > 0) {
        f.x.add(std::log10(p.rate_kbps));
        f.y.add(p.quality);
      }
  f.x.pad();
  f.y.pad();
  const std::string metric = curves.empty() ? "VMAF" : std::string(to_string(curves.front().metric));
  std::string out = open(kWidth, kHeight, title) + axes(f, "bitrate (kb/s, log scale)", metric, true);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* colour = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const auto& p : curves[i].points)
      if (p.rate_kbps > 0) pts += fmt::format("{:.2f},{:.2f} ", f.px(std::log10(p.rate_kbps)), f.py(p.quality));
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", colour, pts);
    for (const auto& p : curves[i].points)
      if (p.rate_kbps > 0)
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n",
                           f.px(std::log10(p.rate_kbps)), f.py(p.quality), colour);
    out += legend_entry(i, curves[i].id, colour);
  }
  return out + "</svg>\n";
}

std::string heatmap(const std::string& title, const ComparisonGrid& grid) {
  const std::size_t n = grid.labels.size();
  constexpr double cell = 64, left = 190, top = 50, bottom = 150;
  const double w = left + cell * static_cast<double>(n) + 20;
  const double h = top + cell * static_cast<double>(n) + bottom;
  double scale = 0.0;
  for (const auto& row : grid.cells)
    for (const auto& v : row)
      if (v) scale = std::max(scale, std::abs(*v));

  std::string out = open(std::max(w, 320.0), h, title);
  // Columns are anchors (x axis), rows are tests (y axis).
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t t = 0; t < n; ++t) {
      const double x = left + cell * static_cast<double>(a), y = top + cell * static_cast<double>(t);
      const auto& v = grid.cells[a][t];
      out += fmt::format(
          "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\" stroke=\"white\"/>\n", x, y,
          cell, cell, v ? cell_colour(*v, scale) : "#dddddd");
      out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
                         x + cell / 2, y + cell / 2 + 4, v ? fmt::format("{:.2f}", *v) : "N/A");
    }
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cell * static_cast<double>(i) + cell / 2;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", left - 6, top + c + 4,
                       escape(grid.labels[i]));
    out += fmt::format(
        "<text x=\"{0:.1f}\" y=\"{1:.1f}\" text-anchor=\"end\" transform=\"rotate(-45 {0:.1f} {1:.1f})\">{2}</text>\n",
        left + c, top + cell * static_cast<double>(n) + 12, escape(grid.labels[i]));
  }
  out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">anchor</text>\n",
                     left + cell * static_cast<double>(n) / 2, h - 12);
  out += fmt::format("<text x=\"14\" y=\"{0:.1f}\" transform=\"rotate(-90 14 {0:.1f})\">test</text>\n",
                     top + cell * static_cast<double>(n) / 2);
  return out + "</svg>\n";
}

std::string scatter(const std::string& title, const std::string& x_label, const std::string& y_label,
                    const std::vector<ScatterPoint>& points) {
  Frame f;
  for (const auto& p : points)
    if (p.x > 0) {
      f.x.add(std::log10(p.x));
      f.y.add(p.y);
    }
  f.x.pad();
  f.y.pad();
  std::string out = open(kWidth, kHeight, title) + axes(f, x_label, y_label, true);
  for (const auto& p : points) {
    if (p.x <= 0) continue;
    const char* colour = p.highlight ? "#2ca02c" : "#1f77b4";
    const double x = f.px(std::log10(p.x)), y = f.py(p.y);
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\"/>\n", x, y, p.highlight ? 6 : 4,
                       colour);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"9\">{}</text>\n", x + 6, y - 6,
                       escape(p.label));
  }
  out += legend_entry(0, "selected", "#2ca02c");
  out += legend_entry(1, "candidate", "#1f77b4");
  return out + "</svg>\n";
}

}  // namespace rdgauge::svg
