#pragma once

// Detection evaluation: IOU matching, a confidence-threshold sweep, and
// average precision as the trapezoidal area under the resulting PR polyline.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "detect_io.hpp"
#include "geometry.hpp"
#include "labels.hpp"
#include "stitch.hpp"
#include "text.hpp"

namespace sattile {

struct PRPoint {
  double threshold = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  /// 1 when nothing was predicted.
  double precision() const { return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
  /// 0 when there is nothing to find.
  double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
  std::size_t truths() const { return tp + fn; }

  friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  /// (detection index, truth index) for every true positive.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Greedy matching. Detections are taken best-first (see ranks_before); each
/// claims the unmatched same-class truth with the highest IOU, provided that
/// IOU reaches the threshold. Ties on IOU go to the lowest truth index.
inline MatchResult match(std::span<const Detection> dets, std::span<const LabeledObject> truths,
                         double iou_threshold = 0.5) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranks_before(dets[a], dets[b]); });

  std::vector<MergedClass> truth_cls;
  truth_cls.reserve(truths.size());
  for (const auto& t : truths) truth_cls.push_back(t.merged());

  MatchResult r;
  std::vector<bool> taken(truths.size(), false);
  for (std::size_t di : order) {
    const auto& d = dets[di];
    std::size_t best = truths.size();
    double best_iou = -1.0;
    for (std::size_t ti = 0; ti < truths.size(); ++ti) {
      if (taken[ti] || truth_cls[ti] != d.cls) continue;
      const double v = iou(d.box, truths[ti].box);
      if (v > best_iou) {
        best_iou = v;
        best = ti;
      }
    }
    if (best < truths.size() && best_iou >= iou_threshold) {
      taken[best] = true;
      ++r.tp;
      r.pairs.emplace_back(di, best);
    } else {
      ++r.fp;
    }
  }
  r.fn = truths.size() - r.tp;
  return r;
}

/// 0.01, 0.02, ..., 0.90.
inline std::vector<double> default_sweep() {
  std::vector<double> t;
  for (int k = 1; k <= 90; ++k) t.push_back(k / 100.0);
  return t;
}

/// Grid from `start` to `stop` inclusive in steps of `step`, each value
/// rounded to 12 decimals so 0.01 + 6 * 0.01 comes out as 0.07.
inline std::vector<double> make_sweep(double start, double stop, double step) {
  if (!(step > 0.0) || !(start > 0.0) || !(stop < 1.0) || stop < start)
    throw std::invalid_argument("sweep must satisfy 0 < start <= stop < 1 and step > 0");
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> t;
  for (long i = 0; i < n; ++i) t.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  return t;
}

inline void check_thresholds(std::span<const double> thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) throw std::invalid_argument("thresholds must lie in (0, 1)");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
      throw std::invalid_argument("thresholds must be strictly increasing");
  }
}

/// One scene worth of detections and truths.
struct EvalScene {
  std::string scene_id;
  std::vector<Detection> detections;
  std::vector<LabeledObject> truths;
};

/// PR points for class `cls`, with counts summed over every scene. At each
/// threshold t only detections with confidence >= t take part in matching.
inline std::vector<PRPoint> sweep_pr(std::span<const EvalScene> scenes, MergedClass cls,
                                     std::span<const double> thresholds, double iou_threshold = 0.5) {
  check_thresholds(thresholds);
  std::vector<PRPoint> points(thresholds.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) points[k].threshold = thresholds[k];
  for (const auto& s : scenes) {
    std::vector<LabeledObject> truths;
    for (const auto& t : s.truths)
      if (t.merged() == cls) truths.push_back(t);
    std::vector<Detection> dets;
    for (const auto& d : s.detections)
      if (d.cls == cls) dets.push_back(d);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      std::vector<Detection> subset;
      for (const auto& d : dets)
        if (d.confidence >= thresholds[k]) subset.push_back(d);
      const auto m = match(subset, truths, iou_threshold);
      points[k].tp += m.tp;
      points[k].fp += m.fp;
      points[k].fn += m.fn;
    }
  }
  return points;
}

/// Single-scene convenience overload.
inline std::vector<PRPoint> sweep_pr(std::span<const Detection> dets, std::span<const LabeledObject> truths,
                                     std::span<const double> thresholds, MergedClass cls = MergedClass::vehicle,
                                     double iou_threshold = 0.5) {
  EvalScene s{"", {dets.begin(), dets.end()}, {truths.begin(), truths.end()}};
  return sweep_pr(std::span<const EvalScene>(&s, 1), cls, thresholds, iou_threshold);
}

/// Trapezoidal area under the PR polyline. Points are ordered by recall
/// (ties: higher threshold first) and anchored at recall 0 with the precision
/// of the lowest-recall point. All points must describe the same truth set.
///
/// Recall steps are accumulated as integer true-positive counts and divided
/// once at the end, so a curve with precision 1 everywhere and full recall
/// integrates to exactly 1.
inline double average_precision(std::span<const PRPoint> points) {
  if (points.empty()) throw std::invalid_argument("average_precision needs at least one point");
  const std::size_t n = points.front().truths();
  for (const auto& p : points)
    if (p.truths() != n) throw std::invalid_argument("PR points disagree on the number of truths");
  if (n == 0) return 0.0;

  std::vector<PRPoint> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const PRPoint& a, const PRPoint& b) {
    if (a.tp != b.tp) return a.tp < b.tp;
    return a.threshold > b.threshold;
  });
  double sum = 0.0;
  std::size_t prev_tp = 0;
  double prev_p = sorted.front().precision();
  for (const auto& p : sorted) {
    const double cur_p = p.precision();
    sum += static_cast<double>(p.tp - prev_tp) * (prev_p + cur_p);
    prev_tp = p.tp;
    prev_p = cur_p;
  }
  return sum / (2.0 * static_cast<double>(n));
}

struct ClassCurve {
  MergedClass cls = MergedClass::vehicle;
  std::vector<PRPoint> points;
  double ap = 0.0;
  std::size_t n_truths = 0;
  std::size_t n_detections = 0;
};

struct EvalReport {
  double iou_threshold = 0.5;
  std::size_t n_scenes = 0;
  std::size_t n_truths = 0;
  std::size_t n_detections = 0;
  std::vector<ClassCurve> classes;

  const ClassCurve* find(MergedClass c) const {
    for (const auto& cc : classes)
      if (cc.cls == c) return &cc;
    return nullptr;
  }

  /// AP for `c`, or 0 when the class never appeared.
  double ap(MergedClass c) const {
    const auto* cc = find(c);
    return cc ? cc->ap : 0.0;
  }
};

/// Evaluates every merged class that appears in a truth or detection.
/// Vehicle is always reported, even when absent.
inline EvalReport evaluate(std::span<const EvalScene> scenes, std::span<const double> thresholds,
                           double iou_threshold = 0.5) {
  EvalReport r;
  r.iou_threshold = iou_threshold;
  r.n_scenes = scenes.size();
  std::set<MergedClass> present{MergedClass::vehicle};
  for (const auto& s : scenes) {
    r.n_truths += s.truths.size();
    r.n_detections += s.detections.size();
    for (const auto& t : s.truths) present.insert(t.merged());
    for (const auto& d : s.detections) present.insert(d.cls);
  }
  for (MergedClass c : present) {
    ClassCurve cc;
    cc.cls = c;
    cc.points = sweep_pr(scenes, c, thresholds, iou_threshold);
    cc.ap = average_precision(cc.points);
    for (const auto& s : scenes) {
      cc.n_truths += static_cast<std::size_t>(
          std::count_if(s.truths.begin(), s.truths.end(), [c](const LabeledObject& t) { return t.merged() == c; }));
      cc.n_detections += static_cast<std::size_t>(
          std::count_if(s.detections.begin(), s.detections.end(), [c](const Detection& d) { return d.cls == c; }));
    }
    r.classes.push_back(std::move(cc));
  }
  return r;
}

}  // namespace sattile
