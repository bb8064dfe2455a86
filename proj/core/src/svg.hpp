#pragma once

// Minimal deterministic SVG plots used by the report writer.

#include <string>
#include <vector>

#include "rdgauge/bd.hpp"
#include "rdgauge/scenario.hpp"

namespace rdgauge::svg {

struct ScatterPoint {
  std::string label;
  double x = 0.0;
  double y = 0.0;
  bool highlight = false;
};

// Quality over log10(rate), one polyline per curve.
std::string rd_plot(const std::string& title, const std::vector<RDCurve>& curves);
std::string heatmap(const std::string& title, const ComparisonGrid& grid);
// Log-scaled x axis.
std::string scatter(const std::string& title, const std::string& x_label, const std::string& y_label,
                    const std::vector<ScatterPoint>& points);

std::string escape(const std::string& text);

}  // namespace rdgauge::svg
