#pragma once

// Stitching: tile-local detections back into scene pixels, then duplicate
// suppression across overlapping tiles.

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "detect_io.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "tiling.hpp"

namespace sattile {

struct SceneDetections {
  std::string scene_id;
  std::vector<Detection> detections;
  /// Tile ids of the placement chain behind each detection, outermost first.
  std::vector<std::vector<std::string>> provenance;
};

/// Maps every detection through its tile's placement chain and clips it to
/// the scene rectangle. Detections that fall entirely outside are dropped.
inline SceneDetections localize(std::span<const Detection> dets, const SceneManifest& manifest) {
  SceneDetections sd;
  sd.scene_id = manifest.scene_id;
  const Box scene(0, 0, manifest.scene_w, manifest.scene_h);
  std::map<std::string, std::vector<TilePlacement>> chains;
  for (const auto& d : dets) {
    auto it = chains.find(d.tile_id);
    if (it == chains.end()) it = chains.emplace(d.tile_id, manifest.chain(d.tile_id)).first;
    const auto& chain = it->second;
    const auto clipped = clip_to(tile_to_scene(d.box, std::span<const TilePlacement>(chain)), scene);
    if (!clipped) continue;
    Detection s = d;
    s.box = *clipped;
    sd.detections.push_back(std::move(s));
    std::vector<std::string> ids;
    ids.reserve(chain.size());
    for (const auto& p : chain) ids.push_back(p.tile_id);
    sd.provenance.push_back(std::move(ids));
  }
  return sd;
}

enum class OverlapMetric { ioa, iou };

struct DedupOptions {
  double threshold = 0.75;
  OverlapMetric metric = OverlapMetric::ioa;
  /// Suppress across classes too. Off by default: a helicopter under a
  /// vehicle box should survive.
  bool class_agnostic = false;
};

/// Strict ranking used by dedup: confidence descending, then larger area,
/// then smaller box coordinates, class index and tile id. Any two distinct
/// detections compare unequal, so the outcome never depends on input order.
inline bool ranks_before(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  const double aa = area(a.box), ab = area(b.box);
  if (aa != ab) return aa > ab;
  return std::tie(a.box.xmin, a.box.ymin, a.box.xmax, a.box.ymax, a.cls, a.tile_id) <
         std::tie(b.box.xmin, b.box.ymin, b.box.xmax, b.box.ymax, b.cls, b.tile_id);
}

inline double overlap(const Box& a, const Box& b, OverlapMetric m) { return m == OverlapMetric::ioa ? ioa(a, b) : iou(a, b); }

/// Greedy keep-list: walk detections best-first and keep one iff its overlap
/// with every already-kept detection (of the same class, unless
/// class-agnostic) is at most the threshold. Output is in rank order.
inline SceneDetections dedup(const SceneDetections& sd, const DedupOptions& opt = {}) {
  if (!(opt.threshold > 0.0 && opt.threshold <= 1.0)) throw std::invalid_argument("dedup threshold must lie in (0, 1]");
  std::vector<std::size_t> order(sd.detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return ranks_before(sd.detections[i], sd.detections[j]); });

  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const auto& d = sd.detections[i];
    bool keep = true;
    for (std::size_t k : kept) {
      const auto& o = sd.detections[k];
      if (!opt.class_agnostic && o.cls != d.cls) continue;
      if (overlap(d.box, o.box, opt.metric) > opt.threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(i);
  }

  SceneDetections out;
  out.scene_id = sd.scene_id;
  const bool has_prov = sd.provenance.size() == sd.detections.size();
  for (std::size_t i : kept) {
    out.detections.push_back(sd.detections[i]);
    if (has_prov) out.provenance.push_back(sd.provenance[i]);
  }
  return out;
}

inline SceneDetections dedup_ioa(const SceneDetections& sd, double threshold = 0.75) {
  return dedup(sd, DedupOptions{threshold, OverlapMetric::ioa, false});
}

/// Scene-level detection file: same line format as tile files, scene pixels,
/// best-ranked first.
inline std::string format_scene_detections(const SceneDetections& sd) {
  std::vector<Detection> sorted = sd.detections;
  std::stable_sort(sorted.begin(), sorted.end(), ranks_before);
  return format_detections(sorted);
}

}  // namespace sattile
