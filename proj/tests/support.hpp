#pragma once

// Shared helpers for the test binaries: scratch directories, random
// fixtures, and reference implementations written independently of the
// library code they check.

#include <boost/rational.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "sattile/sattile.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = fs::temp_directory_path() / ("sattile_" + tag + "_" + std::to_string(gen()));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline sattile::PixelGrid random_grid(std::mt19937_64& g, int w, int h) {
  sattile::PixelGrid p(w, h);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& v : p.data()) v = static_cast<std::uint8_t>(byte(g));
  return p;
}

inline sattile::LabeledObject merged_object(const std::string& scene, sattile::MergedClass c, sattile::Box b) {
  sattile::LabeledObject o;
  o.scene_id = scene;
  o.class_id = static_cast<int>(c);
  o.space = sattile::ClassSpace::merged;
  o.box = b;
  return o;
}

// ---------------------------------------------------------------------------
// Reference: tile positions along one axis, enumerated from the stride rule.

inline std::vector<int> reference_positions(int dim, int tile, int overlap) {
  if (dim <= tile) return {0};
  std::vector<int> out;
  const int stride = tile - overlap;
  int p = 0;
  while (p + tile < dim) {
    out.push_back(p);
    p += stride;
  }
  out.push_back(dim - tile);
  return out;
}

// ---------------------------------------------------------------------------
// Reference ranking key; larger keys rank first.

inline auto rank_key(const sattile::Detection& d) {
  const double a = (d.box.xmax - d.box.xmin) * (d.box.ymax - d.box.ymin);
  return std::make_tuple(d.confidence, a, -d.box.xmin, -d.box.ymin, -d.box.xmax, -d.box.ymax,
                         -static_cast<int>(d.cls));
}

inline bool ref_before(const sattile::Detection& a, const sattile::Detection& b) {
  const auto ka = rank_key(a), kb = rank_key(b);
  if (ka != kb) return ka > kb;
  return a.tile_id < b.tile_id;
}

/// Intersection over min area, computed from clamped per-axis overlaps.
inline double ref_ioa(const sattile::Box& a, const sattile::Box& b) {
  const double w = std::max(0.0, std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin));
  const double h = std::max(0.0, std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin));
  const double amin = std::min((a.xmax - a.xmin) * (a.ymax - a.ymin), (b.xmax - b.xmin) * (b.ymax - b.ymin));
  return w * h / amin;
}

/// Suppression by repeated maximum selection: take the best remaining
/// detection, then delete every remaining same-class detection that overlaps
/// it by more than the threshold. Returns the surviving detections.
inline std::vector<sattile::Detection> reference_dedup(std::vector<sattile::Detection> pool, double threshold) {
  std::vector<sattile::Detection> kept;
  while (!pool.empty()) {
    auto best = pool.begin();
    for (auto it = pool.begin(); it != pool.end(); ++it)
      if (ref_before(*it, *best)) best = it;
    const sattile::Detection pick = *best;
    pool.erase(best);
    kept.push_back(pick);
    std::vector<sattile::Detection> rest;
    for (const auto& d : pool)
      if (d.cls != pick.cls || !(ref_ioa(d.box, pick.box) > threshold)) rest.push_back(d);
    pool = std::move(rest);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Reference AP over integer-coordinate boxes, in exact rational arithmetic.

using Q = boost::rational<std::int64_t>;

inline Q exact_iou(const sattile::Box& a, const sattile::Box& b) {
  const auto L = [](double v) { return static_cast<std::int64_t>(v); };
  const std::int64_t w = std::max<std::int64_t>(0, std::min(L(a.xmax), L(b.xmax)) - std::max(L(a.xmin), L(b.xmin)));
  const std::int64_t h = std::max<std::int64_t>(0, std::min(L(a.ymax), L(b.ymax)) - std::max(L(a.ymin), L(b.ymin)));
  const std::int64_t inter = w * h;
  const std::int64_t aa = (L(a.xmax) - L(a.xmin)) * (L(a.ymax) - L(a.ymin));
  const std::int64_t ab = (L(b.xmax) - L(b.xmin)) * (L(b.ymax) - L(b.ymin));
  return Q(inter, aa + ab - inter);
}

struct RefCounts {
  long tp = 0, fp = 0, fn = 0;
};

/// Counts at one threshold: detections with confidence >= t in best-first
/// order each claim the highest-IOU unclaimed truth (lowest index on ties)
/// when that IOU is at least 1/2.
inline RefCounts reference_counts(const std::vector<sattile::Detection>& dets,
                                  const std::vector<sattile::LabeledObject>& truths, double t) {
  std::vector<sattile::Detection> live;
  for (const auto& d : dets)
    if (d.confidence >= t) live.push_back(d);
  std::sort(live.begin(), live.end(), ref_before);
  std::vector<char> claimed(truths.size(), 0);
  RefCounts c;
  for (const auto& d : live) {
    long best = -1;
    Q best_iou(-1);
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (claimed[i]) continue;
      const Q v = exact_iou(d.box, truths[i].box);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<long>(i);
      }
    }
    if (best >= 0 && best_iou >= Q(1, 2)) {
      claimed[static_cast<std::size_t>(best)] = 1;
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  c.fn = static_cast<long>(truths.size()) - c.tp;
  return c;
}

/// Exact trapezoid over (recall, precision) points ordered by recall with
/// ties on recall taken from the highest threshold first, starting from
/// recall 0 at the first point's precision.
inline Q reference_ap(const std::vector<sattile::Detection>& dets, const std::vector<sattile::LabeledObject>& truths,
                      const std::vector<double>& thresholds) {
  if (truths.empty()) return Q(0);
  struct P {
    double t;
    long tp;
    Q prec;
  };
  std::vector<P> pts;
  for (double t : thresholds) {
    const auto c = reference_counts(dets, truths, t);
    pts.push_back({t, c.tp, c.tp + c.fp == 0 ? Q(1) : Q(c.tp, c.tp + c.fp)});
  }
  std::sort(pts.begin(), pts.end(), [](const P& a, const P& b) { return a.tp != b.tp ? a.tp < b.tp : a.t > b.t; });
  const auto n = static_cast<std::int64_t>(truths.size());
  Q sum(0), r_prev(0), p_prev = pts.front().prec;
  for (const auto& p : pts) {
    const Q r(p.tp, n);
    sum += (r - r_prev) * (p_prev + p.prec) / Q(2);
    r_prev = r;
    p_prev = p.prec;
  }
  return sum;
}

}  // namespace testing_support
