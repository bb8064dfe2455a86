#pragma once

// Rate-distortion curves and Bjontegaard-delta metrics.
//
// BD-Rate interpolates log10(rate) as a function of quality with a monotone
// piecewise-cubic Hermite (PCHIP) interpolant and integrates it in closed form
// over the quality range both curves cover. Dataset-level numbers come in two
// flavours: "classic" averages per-clip BD-Rates, "smart" first collapses the
// clips into one aggregate point per ladder rung and computes a single BD-Rate.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdgauge/store.hpp"

namespace rdgauge {

enum class MetricKind { VMAF, PSNR_Y };
std::string_view to_string(MetricKind kind);

struct RDPoint {
  double rate_kbps = 0.0;
  double quality = 0.0;
  friend bool operator==(const RDPoint&, const RDPoint&) = default;
};

struct RDCurve {
  std::string id;
  MetricKind metric = MetricKind::VMAF;
  std::vector<RDPoint> points;  // quality ascending, rate ascending after cleaning
};

// Drops Pareto-dominated points: p goes if another point reaches at least p's
// quality at no more than p's rate. Throws CurveError if fewer than two survive.
RDCurve clean_curve(std::span<const RDPoint> raw, std::string id = {}, MetricKind metric = MetricKind::VMAF);

// Shape-preserving cubic Hermite interpolant over strictly increasing knots.
// Two knots degrade to a straight line.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;
  // Exact integral over [a, b] within the knot range.
  double integral(double a, double b) const;
  double x_min() const { return xs_.front(); }
  double x_max() const { return xs_.back(); }
  const std::vector<double>& slopes() const { return slopes_; }

 private:
  std::size_t segment(double x) const;
  double antiderivative(std::size_t seg, double s) const;

  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> slopes_;
};

// quality -> log10(rate)
MonotoneCubic interpolate(const RDCurve& curve);
// log10(rate) -> quality
MonotoneCubic interpolate_quality(const RDCurve& curve);

struct BDResult {
  enum class Kind { Rate, Quality };
  Kind kind = Kind::Rate;
  double value = 0.0;  // percent for Rate, quality units for Quality
  // Quality interval for Rate, log10(rate) interval for Quality.
  double overlap_low = 0.0;
  double overlap_high = 0.0;
  std::size_t anchor_points = 0;
  std::size_t test_points = 0;
  std::string method_note;
};

// Negative means the test curve needs less bitrate for the same quality.
BDResult bd_rate(const RDCurve& anchor, const RDCurve& test);
// Positive means the test curve reaches higher quality at the same bitrate.
BDResult bd_quality(const RDCurve& anchor, const RDCurve& test);

double harmonic_mean(std::span<const double> values);
double arithmetic_mean(std::span<const double> values);

enum class Aggregation { Harmonic, Arithmetic };

double record_quality(const MetricRecord& record, MetricKind metric);

// All records must share (family, preset, passes, target). Rate comes from
// measured_kbps.
RDPoint aggregate_points(std::span<const MetricRecord> records, MetricKind metric = MetricKind::VMAF,
                         Aggregation method = Aggregation::Harmonic);

// One aggregate point per ladder rung that has records, then cleaned.
RDCurve aggregate_curve(std::span<const MetricRecord> records, std::span<const int> ladder, std::string id,
                        MetricKind metric = MetricKind::VMAF, Aggregation method = Aggregation::Harmonic);

BDResult smart_bd_rate(std::span<const MetricRecord> anchor, std::span<const MetricRecord> test,
                       std::span<const int> ladder, MetricKind metric = MetricKind::VMAF,
                       Aggregation method = Aggregation::Harmonic);

// Per-clip raw curves keyed by clip id (not cleaned).
std::vector<RDCurve> per_clip_curves(std::span<const MetricRecord> records, MetricKind metric = MetricKind::VMAF);

// Mean of per-clip BD-Rates over clips present on both sides. Clips whose
// curves cannot be cleaned or do not overlap are excluded and counted in
// method_note. Curves are cleaned here.
BDResult classic_bd_rate(std::span<const RDCurve> anchor, std::span<const RDCurve> test);
BDResult classic_bd_rate(std::span<const MetricRecord> anchor, std::span<const MetricRecord> test,
                         MetricKind metric = MetricKind::VMAF);

// CSV rows: "id,q,rate_kbps" and
// "anchor,test,metric,bd_percent,q_low,q_high,n_anchor,n_test".
std::string curve_csv_header();
std::string curve_csv_rows(const RDCurve& curve);
std::string bd_csv_header();
std::string bd_csv_row(std::string_view anchor, std::string_view test, MetricKind metric, const BDResult& result);

}  // namespace rdgauge
