#pragma once

// Detection accuracy (IoU, all-point interpolated AP, mAP) and
// Bjontegaard delta-rate between two rate/quality curves.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vcmc/error.hpp"

namespace vcmc::det {

struct Box {
  double x = 0.0;  // top-left
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool valid() const { return w > 0.0 && h > 0.0; }
  double area() const { return w * h; }
  friend bool operator==(const Box&, const Box&) = default;
};

struct Detection {
  int64_t frame_id = 0;
  int class_id = 0;
  Box box;
  double score = 0.0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruthBox {
  int64_t frame_id = 0;
  int class_id = 0;
  Box box;
  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

inline double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// Keeps detections with score >= threshold, preserving order.
inline std::vector<Detection> filter_by_confidence(
    const std::vector<Detection>& dets, double threshold) {
  std::vector<Detection> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [threshold](const Detection& d) { return d.score >= threshold; });
  return out;
}

struct LabeledDetection {
  Detection detection;
  bool true_positive = false;
  int matched_gt = -1;  // index into the ground-truth input, or -1
};

struct MatchResult {
  std::vector<LabeledDetection> labeled;  // descending score, stable
  int64_t n_gt = 0;
};

// Greedy matching in descending score order (ties keep input order). A
// detection takes the unmatched ground-truth box of the same frame and class
// with the highest IoU, and is a TP when that IoU reaches the threshold.
inline MatchResult match_detections(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruthBox>& gts,
                                    double iou_threshold) {
  std::map<std::pair<int64_t, int>, std::vector<int>> gt_groups;
  for (size_t i = 0; i < gts.size(); ++i) {
    gt_groups[{gts[i].frame_id, gts[i].class_id}].push_back(static_cast<int>(i));
  }
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return dets[a].score > dets[b].score;
  });

  std::vector<bool> taken(gts.size(), false);
  MatchResult result;
  result.n_gt = static_cast<int64_t>(gts.size());
  result.labeled.reserve(dets.size());
  for (size_t idx : order) {
    const Detection& d = dets[idx];
    LabeledDetection ld{d, false, -1};
    auto it = gt_groups.find({d.frame_id, d.class_id});
    if (it != gt_groups.end()) {
      double best = -1.0;
      int best_gt = -1;
      for (int g : it->second) {
        if (taken[g]) continue;
        const double o = iou(d.box, gts[g].box);
        if (o > best) {
          best = o;
          best_gt = g;
        }
      }
      if (best_gt >= 0 && best >= iou_threshold) {
        taken[best_gt] = true;
        ld.true_positive = true;
        ld.matched_gt = best_gt;
      }
    }
    result.labeled.push_back(ld);
  }
  return result;
}

// All-point interpolated AP over a score-sorted TP/FP sequence. With no
// ground truth the result is 1 when there are also no detections, else 0.
inline double average_precision(const std::vector<bool>& tp_sequence,
                                int64_t n_gt) {
  if (n_gt <= 0) return tp_sequence.empty() ? 1.0 : 0.0;
  const size_t n = tp_sequence.size();
  std::vector<double> recall(n + 2), precision(n + 2);
  recall[0] = 0.0;
  precision[0] = 0.0;
  int64_t tp = 0;
  for (size_t i = 0; i < n; ++i) {
    if (tp_sequence[i]) ++tp;
    recall[i + 1] = static_cast<double>(tp) / static_cast<double>(n_gt);
    precision[i + 1] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  recall[n + 1] = 1.0;
  precision[n + 1] = 0.0;
  for (size_t i = n + 1; i-- > 0;) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double ap = 0.0;
  for (size_t i = 0; i + 1 < n + 2; ++i) {
    ap += (recall[i + 1] - recall[i]) * precision[i + 1];
  }
  return std::clamp(ap, 0.0, 1.0);
}

inline double average_precision(const MatchResult& match) {
  std::vector<bool> seq;
  seq.reserve(match.labeled.size());
  for (const auto& l : match.labeled) seq.push_back(l.true_positive);
  return average_precision(seq, match.n_gt);
}

inline double mean_ap(const std::map<int, double>& per_class_ap) {
  if (per_class_ap.empty()) {
    throw Error(ErrorCode::kArgument, "mAP over an empty class set");
  }
  double sum = 0.0;
  for (const auto& [cls, ap] : per_class_ap) sum += ap;
  return sum / static_cast<double>(per_class_ap.size());
}

struct Evaluation {
  std::map<int, double> per_class_ap;
  double map = 0.0;
};

// Confidence filter, per-class matching and AP, then mAP over the classes
// that occur in the ground truth.
inline Evaluation evaluate(const std::vector<GroundTruthBox>& gts,
                           const std::vector<Detection>& dets,
                           double iou_threshold, double confidence_threshold) {
  const std::vector<Detection> kept = filter_by_confidence(dets, confidence_threshold);
  std::map<int, std::vector<GroundTruthBox>> gt_by_class;
  for (const auto& g : gts) gt_by_class[g.class_id].push_back(g);
  std::map<int, std::vector<Detection>> det_by_class;
  for (const auto& d : kept) det_by_class[d.class_id].push_back(d);

  Evaluation ev;
  for (const auto& [cls, class_gts] : gt_by_class) {
    const auto it = det_by_class.find(cls);
    const std::vector<Detection> empty;
    const auto& class_dets = it == det_by_class.end() ? empty : it->second;
    ev.per_class_ap[cls] =
        average_precision(match_detections(class_dets, class_gts, iou_threshold));
  }
  ev.map = mean_ap(ev.per_class_ap);
  return ev;
}

// ---------------------------------------------------------------------------
// Rate/quality curves

struct RDPoint {
  int qp = 0;
  double bitrate_kbps = 0.0;
  std::optional<double> map;  // absent when no detections were supplied
  double psnr_db = 0.0;
  std::map<int, double> per_class_ap;
};

struct RDCurve {
  std::string label;
  std::vector<RDPoint> points;

  void SortByBitrate() {
    std::stable_sort(points.begin(), points.end(),
                     [](const RDPoint& a, const RDPoint& b) {
                       return a.bitrate_kbps < b.bitrate_kbps;
                     });
  }
  bool has_map() const {
    return !points.empty() &&
           std::all_of(points.begin(), points.end(),
                       [](const RDPoint& p) { return p.map.has_value(); });
  }
};

enum class QualityAxis { kMap, kPsnr };

namespace detail {

using Cubic = std::array<double, 4>;  // c0 + c1 t + c2 t^2 + c3 t^3

// Least-squares cubic through (t, y) via Householder QR.
inline Cubic FitCubic(const std::vector<double>& t, const std::vector<double>& y) {
  const size_t n = t.size();
  std::vector<std::array<double, 4>> a(n);
  std::vector<double> b = y;
  for (size_t i = 0; i < n; ++i) {
    a[i] = {1.0, t[i], t[i] * t[i], t[i] * t[i] * t[i]};
  }
  for (int k = 0; k < 4; ++k) {
    double norm = 0.0;
    for (size_t i = k; i < n; ++i) norm += a[i][k] * a[i][k];
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      throw Error(ErrorCode::kInsufficientPoints,
                  "fewer than 4 distinct quality values");
    }
    const double alpha = a[k][k] > 0 ? -norm : norm;
    std::vector<double> v(n, 0.0);
    for (size_t i = k; i < n; ++i) v[i] = a[i][k];
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 > 0.0) {
      for (int j = k; j < 4; ++j) {
        double dot = 0.0;
        for (size_t i = k; i < n; ++i) dot += v[i] * a[i][j];
        const double f = 2.0 * dot / vnorm2;
        for (size_t i = k; i < n; ++i) a[i][j] -= f * v[i];
      }
      double dot = 0.0;
      for (size_t i = k; i < n; ++i) dot += v[i] * b[i];
      const double f = 2.0 * dot / vnorm2;
      for (size_t i = k; i < n; ++i) b[i] -= f * v[i];
    }
  }
  double scale = 0.0;
  for (int k = 0; k < 4; ++k) scale = std::max(scale, std::abs(a[k][k]));
  Cubic c{};
  for (int k = 3; k >= 0; --k) {
    if (std::abs(a[k][k]) < 1e-10 * scale) {
      throw Error(ErrorCode::kInsufficientPoints,
                  "fewer than 4 distinct quality values");
    }
    double s = b[k];
    for (int j = k + 1; j < 4; ++j) s -= a[k][j] * c[j];
    c[k] = s / a[k][k];
  }
  return c;
}

inline double IntegrateCubic(const Cubic& c, double lo, double hi) {
  auto prim = [&c](double t) {
    return ((((c[3] / 4.0) * t + c[2] / 3.0) * t + c[1] / 2.0) * t + c[0]) * t;
  };
  return prim(hi) - prim(lo);
}

inline double Quality(const RDPoint& p, QualityAxis axis) {
  if (axis == QualityAxis::kPsnr) return p.psnr_db;
  if (!p.map) throw Error(ErrorCode::kArgument, "curve point lacks mAP");
  return *p.map;
}

}  // namespace detail

// Bjontegaard delta-rate in percent of `test` against `anchor`: cubic fits of
// log10(bitrate) over quality, averaged across the overlapping quality range.
// Negative means the test curve needs fewer bits for the same quality.
inline double bd_rate(const RDCurve& anchor, const RDCurve& test,
                      QualityAxis axis = QualityAxis::kMap) {
  constexpr size_t kMinPoints = 4;
  if (anchor.points.size() < kMinPoints || test.points.size() < kMinPoints) {
    throw Error(ErrorCode::kInsufficientPoints,
                "BD-rate needs >= 4 points per curve (anchor " +
                    std::to_string(anchor.points.size()) + ", test " +
                    std::to_string(test.points.size()) + ")");
  }
  auto extract = [axis](const RDCurve& c, std::vector<double>& q,
                        std::vector<double>& r) {
    for (const RDPoint& p : c.points) {
      if (!(p.bitrate_kbps > 0.0)) {
        throw Error(ErrorCode::kArgument, "BD-rate needs positive bitrates");
      }
      const double quality = detail::Quality(p, axis);
      if (!std::isfinite(quality)) {
        throw Error(ErrorCode::kArgument, "non-finite quality value");
      }
      q.push_back(quality);
      r.push_back(std::log10(p.bitrate_kbps));
    }
  };
  std::vector<double> qa, ra, qt, rt;
  extract(anchor, qa, ra);
  extract(test, qt, rt);

  const auto [amin, amax] = std::minmax_element(qa.begin(), qa.end());
  const auto [tmin, tmax] = std::minmax_element(qt.begin(), qt.end());
  const double lo = std::max(*amin, *tmin);
  const double hi = std::min(*amax, *tmax);
  if (!(hi > lo)) {
    throw Error(ErrorCode::kDisjointRange, "quality ranges do not overlap");
  }
  // Shared affine normalization keeps the Vandermonde system well scaled.
  const double center = 0.5 * (std::min(*amin, *tmin) + std::max(*amax, *tmax));
  double half = 0.5 * (std::max(*amax, *tmax) - std::min(*amin, *tmin));
  if (half <= 0.0) half = 1.0;
  auto normalize = [&](std::vector<double>& q) {
    for (double& v : q) v = (v - center) / half;
  };
  normalize(qa);
  normalize(qt);
  const detail::Cubic fa = detail::FitCubic(qa, ra);
  const detail::Cubic ft = detail::FitCubic(qt, rt);
  const double tlo = (lo - center) / half;
  const double thi = (hi - center) / half;
  const double avg_diff = (detail::IntegrateCubic(ft, tlo, thi) -
                           detail::IntegrateCubic(fa, tlo, thi)) /
                          (thi - tlo);
  return (std::pow(10.0, avg_diff) - 1.0) * 100.0;
}

}  // namespace vcmc::det
