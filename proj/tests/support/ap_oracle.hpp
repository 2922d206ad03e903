#ifndef VCMC_TESTS_SUPPORT_AP_ORACLE_HPP_
#define VCMC_TESTS_SUPPORT_AP_ORACLE_HPP_

// Brute-force reference for per-class average precision. Shares no code with
// the library: boxes are converted to corner form, ranking uses an explicit
// (score desc, index asc) comparison, and the area under the interpolated
// precision envelope is summed level by level.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "vcmc/detmetrics.hpp"

namespace vcmc::testing {

struct DetectionInstance {
  std::vector<det::GroundTruthBox> gts;
  std::vector<det::Detection> dets;
};

inline double CornerIou(const det::Box& a, const det::Box& b) {
  const double ax2 = a.x + a.w, ay2 = a.y + a.h, bx2 = b.x + b.w, by2 = b.y + b.h;
  const double ix = std::max(0.0, std::min(ax2, bx2) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(ay2, by2) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

// AP for one class given only that class's boxes.
inline double OracleAp(const std::vector<det::GroundTruthBox>& gts,
                       const std::vector<det::Detection>& dets, double iou_thr) {
  const size_t n_gt = gts.size();
  if (n_gt == 0) return dets.empty() ? 1.0 : 0.0;
  std::vector<size_t> order;
  for (size_t i = 0; i < dets.size(); ++i) {
    // Insertion keeps earlier indices ahead of later equal scores.
    size_t pos = order.size();
    while (pos > 0 && dets[order[pos - 1]].score < dets[i].score) --pos;
    order.insert(order.begin() + pos, i);
  }
  std::vector<bool> used(n_gt, false);
  std::vector<double> recall, precision;
  size_t tp = 0;
  for (size_t k = 0; k < order.size(); ++k) {
    const det::Detection& d = dets[order[k]];
    double best = -1.0;
    size_t best_j = n_gt;
    for (size_t j = 0; j < n_gt; ++j) {
      if (used[j] || gts[j].frame_id != d.frame_id) continue;
      const double o = CornerIou(d.box, gts[j].box);
      if (o > best) {
        best = o;
        best_j = j;
      }
    }
    if (best_j < n_gt && best >= iou_thr) {
      used[best_j] = true;
      ++tp;
    }
    recall.push_back(static_cast<double>(tp) / n_gt);
    precision.push_back(static_cast<double>(tp) / (k + 1));
  }
  std::set<double> levels(recall.begin(), recall.end());
  double area = 0.0, prev = 0.0;
  for (double level : levels) {
    double env = 0.0;
    for (size_t k = 0; k < recall.size(); ++k) {
      if (recall[k] >= level) env = std::max(env, precision[k]);
    }
    area += (level - prev) * env;
    prev = level;
  }
  return area;
}

// Per-class AP for classes 0..2.
inline std::map<int, double> OracleClassAps(const std::vector<det::GroundTruthBox>& gts,
                                            const std::vector<det::Detection>& dets,
                                            double iou_thr) {
  std::map<int, double> out;
  for (int cls = 0; cls < 3; ++cls) {
    std::vector<det::GroundTruthBox> g;
    std::vector<det::Detection> d;
    for (const auto& x : gts) {
      if (x.class_id == cls) g.push_back(x);
    }
    for (const auto& x : dets) {
      if (x.class_id == cls) d.push_back(x);
    }
    out[cls] = OracleAp(g, d, iou_thr);
  }
  return out;
}

// Up to 4 frames, 3 classes, a mix of jittered true boxes and clutter.
// Scores come from a coarse grid part of the time to exercise ties.
inline DetectionInstance RandomDetectionInstance(std::mt19937& rng) {
  std::uniform_int_distribution<int> n_gt(0, 8), n_clutter(0, 6), frame(0, 3), cls(0, 2);
  std::uniform_real_distribution<double> pos(0, 100), ext(5, 40), jitter(-4, 4), unit(0, 1);
  std::uniform_int_distribution<int> grid(1, 9);
  const bool coarse_scores = unit(rng) < 0.5;
  auto score = [&] { return coarse_scores ? grid(rng) / 10.0 : unit(rng); };

  DetectionInstance inst;
  const int g = n_gt(rng);
  for (int i = 0; i < g; ++i) {
    inst.gts.push_back({frame(rng), cls(rng), {pos(rng), pos(rng), ext(rng), ext(rng)}});
  }
  for (const auto& gt : inst.gts) {
    const int copies = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int c = 0; c < copies; ++c) {
      const det::Box b{gt.box.x + jitter(rng), gt.box.y + jitter(rng),
                       std::max(1.0, gt.box.w + jitter(rng)),
                       std::max(1.0, gt.box.h + jitter(rng))};
      inst.dets.push_back({gt.frame_id, gt.class_id, b, score()});
    }
  }
  const int clutter = n_clutter(rng);
  for (int i = 0; i < clutter; ++i) {
    inst.dets.push_back(
        {frame(rng), cls(rng), {pos(rng), pos(rng), ext(rng), ext(rng)}, score()});
  }
  std::shuffle(inst.dets.begin(), inst.dets.end(), rng);
  return inst;
}

}  // namespace vcmc::testing

#endif  // VCMC_TESTS_SUPPORT_AP_ORACLE_HPP_
