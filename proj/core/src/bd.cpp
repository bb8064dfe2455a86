#include "rdgauge/bd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "rdgauge/error.hpp"

namespace rdgauge {
namespace {

int sign(double v) { return (v > 0) - (v < 0); }

// One-sided three-point end slope with the usual PCHIP shape limits.
double edge_slope(double h0, double h1, double m0, double m1) {
  const double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
  if (sign(d) != sign(m0)) return 0.0;
  if (sign(m0) != sign(m1) && std::abs(d) > 3.0 * std::abs(m0)) return 3.0 * m0;
  return d;
}

std::string point_note(std::size_t n) {
  if (n == 2) return "2 pts (linear)";
  if (n < 4) return fmt::format("{} pts (<4)", n);
  return fmt::format("{} pts", n);
}

std::string describe(const RDCurve& anchor, const RDCurve& test) {
  return fmt::format("pchip closed-form; anchor {}, test {}", point_note(anchor.points.size()),
                     point_note(test.points.size()));
}

void check_pair(const RDCurve& anchor, const RDCurve& test) {
  if (anchor.metric != test.metric)
    throw CurveError(fmt::format("metric mismatch: {} vs {}", to_string(anchor.metric), to_string(test.metric)));
  if (anchor.points.size() < 2 || test.points.size() < 2) throw CurveError("curves need at least two points");
}

using GroupKey = std::tuple<std::string, std::string, int, int>;
GroupKey group_key(const MetricRecord& r) { return {r.family, r.preset, r.passes, r.target_kbps}; }

}  // namespace

std::string_view to_string(MetricKind kind) { return kind == MetricKind::VMAF ? "vmaf" : "psnr_y"; }

RDCurve clean_curve(std::span<const RDPoint> raw, std::string id, MetricKind metric) {
  if (raw.size() < 2) throw CurveError(fmt::format("curve '{}': need at least 2 points, got {}", id, raw.size()));
  for (const auto& p : raw) {
    if (!(p.rate_kbps > 0.0) || !std::isfinite(p.rate_kbps))
      throw CurveError(fmt::format("curve '{}': rate {} not positive", id, p.rate_kbps));
    if (!std::isfinite(p.quality)) throw CurveError(fmt::format("curve '{}': non-finite quality", id));
  }
  RDCurve curve{std::move(id), metric, {}};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < raw.size() && !dominated; ++j) {
      if (i == j) continue;
      const auto &p = raw[i], &o = raw[j];
      if (o.quality >= p.quality && o.rate_kbps <= p.rate_kbps) {
        const bool strictly = o.quality > p.quality || o.rate_kbps < p.rate_kbps;
        dominated = strictly || j < i;  // exact duplicates keep the first
      }
    }
    if (!dominated) curve.points.push_back(raw[i]);
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.quality < b.quality; });
  if (curve.points.size() < 2)
    throw CurveError(fmt::format("curve '{}': only {} point(s) left after cleaning", curve.id, curve.points.size()));
  return curve;
}

MonotoneCubic::MonotoneCubic(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
  const std::size_t n = xs_.size();
  if (n < 2 || ys_.size() != n) throw CurveError("interpolant needs at least two matching knots");
  for (std::size_t i = 1; i < n; ++i)
    if (!(xs_[i] > xs_[i - 1])) throw CurveError("interpolant knots must be strictly increasing");

  std::vector<double> h(n - 1), m(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = xs_[k + 1] - xs_[k];
    m[k] = (ys_[k + 1] - ys_[k]) / h[k];
  }
  slopes_.assign(n, 0.0);
  if (n == 2) {
    slopes_[0] = slopes_[1] = m[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (sign(m[k - 1]) != sign(m[k]) || m[k - 1] == 0.0 || m[k] == 0.0) continue;
    // Weighted harmonic mean of the neighbouring secants.
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    slopes_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
  }
  slopes_[0] = edge_slope(h[0], h[1], m[0], m[1]);
  slopes_[n - 1] = edge_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
}

std::size_t MonotoneCubic::segment(double x) const {
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t idx = it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
  return std::min(idx, xs_.size() - 2);
}

// Segment k as y0 + d0 s + c2 s^2 + c3 s^3, s = x - x_k.
double MonotoneCubic::antiderivative(std::size_t k, double s) const {
  const double h = xs_[k + 1] - xs_[k];
  const double delta = (ys_[k + 1] - ys_[k]) / h;
  const double d0 = slopes_[k], d1 = slopes_[k + 1];
  const double c2 = (3.0 * delta - 2.0 * d0 - d1) / h;
  const double c3 = (d0 + d1 - 2.0 * delta) / (h * h);
  return s * (ys_[k] + s * (d0 / 2.0 + s * (c2 / 3.0 + s * c3 / 4.0)));
}

double MonotoneCubic::operator()(double x) const {
  const std::size_t k = segment(x);
  const double h = xs_[k + 1] - xs_[k];
  const double delta = (ys_[k + 1] - ys_[k]) / h;
  const double d0 = slopes_[k], d1 = slopes_[k + 1];
  const double c2 = (3.0 * delta - 2.0 * d0 - d1) / h;
  const double c3 = (d0 + d1 - 2.0 * delta) / (h * h);
  const double s = x - xs_[k];
  return ys_[k] + s * (d0 + s * (c2 + s * c3));
}

double MonotoneCubic::integral(double a, double b) const {
  if (a > b) return -integral(b, a);
  double total = 0.0;
  const std::size_t first = segment(a), last = segment(b);
  for (std::size_t k = first; k <= last; ++k) {
    const double lo = std::max(a, xs_[k]) - xs_[k];
    const double hi = std::min(b, xs_[k + 1]) - xs_[k];
    if (hi > lo) total += antiderivative(k, hi) - antiderivative(k, lo);
  }
  return total;
}

MonotoneCubic interpolate(const RDCurve& curve) {
  std::vector<double> xs, ys;
  for (const auto& p : curve.points) {
    xs.push_back(p.quality);
    ys.push_back(std::log10(p.rate_kbps));
  }
  return {std::move(xs), std::move(ys)};
}

MonotoneCubic interpolate_quality(const RDCurve& curve) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : curve.points) pts.emplace_back(std::log10(p.rate_kbps), p.quality);
  std::sort(pts.begin(), pts.end());
  std::vector<double> xs, ys;
  for (auto& [x, y] : pts) {
    xs.push_back(x);
    ys.push_back(y);
  }
  return {std::move(xs), std::move(ys)};
}

BDResult bd_rate(const RDCurve& anchor, const RDCurve& test) {
  check_pair(anchor, test);
  const auto fa = interpolate(anchor), ft = interpolate(test);
  const double lo = std::max(fa.x_min(), ft.x_min());
  const double hi = std::min(fa.x_max(), ft.x_max());
  if (!(lo < hi))
    throw OverlapError(fmt::format("no quality overlap between '{}' [{}, {}] and '{}' [{}, {}]", anchor.id,
                                   fa.x_min(), fa.x_max(), test.id, ft.x_min(), ft.x_max()));
  const double avg_diff = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
  BDResult r;
  r.kind = BDResult::Kind::Rate;
  r.value = (std::pow(10.0, avg_diff) - 1.0) * 100.0;
  r.overlap_low = lo;
  r.overlap_high = hi;
  r.anchor_points = anchor.points.size();
  r.test_points = test.points.size();
  r.method_note = describe(anchor, test);
  return r;
}

BDResult bd_quality(const RDCurve& anchor, const RDCurve& test) {
  check_pair(anchor, test);
  const auto fa = interpolate_quality(anchor), ft = interpolate_quality(test);
  const double lo = std::max(fa.x_min(), ft.x_min());
  const double hi = std::min(fa.x_max(), ft.x_max());
  if (!(lo < hi))
    throw OverlapError(fmt::format("no bitrate overlap between '{}' and '{}'", anchor.id, test.id));
  BDResult r;
  r.kind = BDResult::Kind::Quality;
  r.value = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
  r.overlap_low = lo;
  r.overlap_high = hi;
  r.anchor_points = anchor.points.size();
  r.test_points = test.points.size();
  r.method_note = describe(anchor, test);
  return r;
}

double harmonic_mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("harmonic mean of an empty set");
  double inv = 0.0;
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(fmt::format("harmonic mean needs positive values, got {}", v));
    inv += 1.0 / v;
  }
  return static_cast<double>(values.size()) / inv;
}

double arithmetic_mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean of an empty set");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double record_quality(const MetricRecord& r, MetricKind metric) {
  const auto& q = metric == MetricKind::VMAF ? r.vmaf : r.psnr_y;
  if (!q)
    throw AggregationError(fmt::format("record {}/{}/{}/{}p/{}k has no {} value", r.clip_id, r.family, r.preset,
                                       r.passes, r.target_kbps, to_string(metric)));
  return *q;
}

RDPoint aggregate_points(std::span<const MetricRecord> records, MetricKind metric, Aggregation method) {
  if (records.empty()) throw AggregationError("no records to aggregate");
  const auto key = group_key(records.front());
  std::vector<double> rates, qualities;
  for (const auto& r : records) {
    if (group_key(r) != key)
      throw AggregationError(fmt::format("mixed configurations in one aggregate: {}/{}/{}p/{}k vs {}/{}/{}p/{}k",
                                         std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key),
                                         r.family, r.preset, r.passes, r.target_kbps));
    rates.push_back(r.measured_kbps);
    qualities.push_back(record_quality(r, metric));
  }
  if (method == Aggregation::Harmonic) return {harmonic_mean(rates), harmonic_mean(qualities)};
  return {arithmetic_mean(rates), arithmetic_mean(qualities)};
}

RDCurve aggregate_curve(std::span<const MetricRecord> records, std::span<const int> ladder, std::string id,
                        MetricKind metric, Aggregation method) {
  std::vector<RDPoint> raw;
  for (int rung : ladder) {
    std::vector<MetricRecord> at_rung;
    for (const auto& r : records)
      if (r.target_kbps == rung) at_rung.push_back(r);
    if (!at_rung.empty()) raw.push_back(aggregate_points(at_rung, metric, method));
  }
  return clean_curve(raw, std::move(id), metric);
}

BDResult smart_bd_rate(std::span<const MetricRecord> anchor, std::span<const MetricRecord> test,
                       std::span<const int> ladder, MetricKind metric, Aggregation method) {
  const auto a = aggregate_curve(anchor, ladder, "anchor", metric, method);
  const auto t = aggregate_curve(test, ladder, "test", metric, method);
  auto r = bd_rate(a, t);
  r.method_note = fmt::format("smart ({} mean per rung); {}", method == Aggregation::Harmonic ? "harmonic" : "arithmetic",
                              r.method_note);
  return r;
}

std::vector<RDCurve> per_clip_curves(std::span<const MetricRecord> records, MetricKind metric) {
  std::map<std::string, RDCurve> by_clip;
  for (const auto& r : records) {
    auto& c = by_clip[r.clip_id];
    c.id = r.clip_id;
    c.metric = metric;
    c.points.push_back({r.measured_kbps, record_quality(r, metric)});
  }
  std::vector<RDCurve> out;
  for (auto& [id, c] : by_clip) out.push_back(std::move(c));
  return out;
}

BDResult classic_bd_rate(std::span<const RDCurve> anchor, std::span<const RDCurve> test) {
  std::map<std::string, const RDCurve*> tests;
  for (const auto& t : test) tests[t.id] = &t;
  double sum = 0.0;
  std::size_t used = 0, unmatched = 0, curve_failures = 0, overlap_failures = 0;
  std::size_t anchor_pts = 0, test_pts = 0;
  double lo = 0.0, hi = 0.0;
  for (const auto& a : anchor) {
    auto it = tests.find(a.id);
    if (it == tests.end()) {
      ++unmatched;
      continue;
    }
    RDCurve ca, ct;
    try {
      ca = clean_curve(a.points, a.id, a.metric);
      ct = clean_curve(it->second->points, it->second->id, it->second->metric);
    } catch (const CurveError&) {
      ++curve_failures;
      continue;
    }
    try {
      const auto r = bd_rate(ca, ct);
      if (used == 0) {
        lo = r.overlap_low;
        hi = r.overlap_high;
      } else {
        lo = std::min(lo, r.overlap_low);
        hi = std::max(hi, r.overlap_high);
      }
      sum += r.value;
      anchor_pts += r.anchor_points;
      test_pts += r.test_points;
      ++used;
    } catch (const OverlapError&) {
      ++overlap_failures;
    }
  }
  unmatched += test.size() - (anchor.size() - unmatched);
  if (used == 0)
    throw AggregationError(fmt::format("classic BD-Rate: no clip produced a valid result ({} overlap failures, "
                                       "{} curve failures, {} unmatched)",
                                       overlap_failures, curve_failures, unmatched));
  BDResult r;
  r.kind = BDResult::Kind::Rate;
  r.value = sum / static_cast<double>(used);
  r.overlap_low = lo;
  r.overlap_high = hi;
  r.anchor_points = anchor_pts;
  r.test_points = test_pts;
  r.method_note = fmt::format("classic mean over {} clip(s); excluded: {} overlap, {} curve, {} unmatched", used,
                              overlap_failures, curve_failures, unmatched);
  return r;
}

BDResult classic_bd_rate(std::span<const MetricRecord> anchor, std::span<const MetricRecord> test,
                         MetricKind metric) {
  const auto a = per_clip_curves(anchor, metric);
  const auto t = per_clip_curves(test, metric);
  return classic_bd_rate(a, t);
}

std::string curve_csv_header() { return "id,q,rate_kbps"; }

std::string curve_csv_rows(const RDCurve& curve) {
  std::string out;
  for (const auto& p : curve.points) out += fmt::format("{},{},{}\n", curve.id, p.quality, p.rate_kbps);
  return out;
}

std::string bd_csv_header() { return "anchor,test,metric,bd_percent,q_low,q_high,n_anchor,n_test"; }

std::string bd_csv_row(std::string_view anchor, std::string_view test, MetricKind metric, const BDResult& r) {
  return fmt::format("{},{},{},{:.6f},{},{},{},{}\n", anchor, test, to_string(metric), r.value, r.overlap_low,
                     r.overlap_high, r.anchor_points, r.test_points);
}

}  // namespace rdgauge
