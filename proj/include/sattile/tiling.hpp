#pragma once

// Overlapped tile planning, extraction, and the coordinate transforms that
// link a tile pixel back to its source scene through any number of
// tile -> upscale -> tile stages.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "raster.hpp"

namespace sattile {

/// Where a tile sits inside its parent raster. The parent is the scene for
/// stage-1 tiles and the upscaled parent tile for deeper stages, so offsets
/// and sizes are always in the parent's own pixel grid.
struct TilePlacement {
  std::string tile_id;
  std::string scene_id;
  int offset_x = 0;
  int offset_y = 0;
  int tile_w = 0;
  int tile_h = 0;
  /// Product of every upscale factor between the original scene and this tile.
  int cumulative_scale = 1;
  std::optional<std::string> parent_placement;

  friend bool operator==(const TilePlacement&, const TilePlacement&) = default;
};

/// Offsets along one axis. Stride is tile - overlap; the last tile is pulled
/// back to end flush with the parent edge so every tile keeps its full size.
inline std::vector<int> plan_axis(int parent, int tile, int overlap) {
  if (parent < 1) throw std::invalid_argument("parent extent must be positive");
  if (tile < 1 || overlap < 0 || tile <= overlap)
    throw std::invalid_argument("tile size must exceed overlap (got tile " + std::to_string(tile) + ", overlap " +
                                std::to_string(overlap) + ")");
  if (parent <= tile) return {0};
  const int stride = tile - overlap;
  std::vector<int> pos;
  for (int p = 0; p + tile <= parent; p += stride) pos.push_back(p);
  const int last = parent - tile;
  if (pos.back() != last) pos.push_back(last);
  return pos;
}

struct PlanNaming {
  std::string scene_id;
  std::string id_prefix = "t";
  std::optional<std::string> parent;
  int cumulative_scale = 1;
};

inline std::string numbered_id(const std::string& prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu", index);
  return prefix + buf;
}

/// Column-major placement list: top to bottom, then one column to the right.
/// A parent smaller than the tile on some axis yields one shrunken tile on
/// that axis.
inline std::vector<TilePlacement> plan_tiles(int parent_w, int parent_h, int tile_size, int overlap,
                                             const PlanNaming& naming = {}) {
  const auto xs = plan_axis(parent_w, tile_size, overlap);
  const auto ys = plan_axis(parent_h, tile_size, overlap);
  const int tw = std::min(tile_size, parent_w);
  const int th = std::min(tile_size, parent_h);
  std::vector<TilePlacement> out;
  out.reserve(xs.size() * ys.size());
  for (int x : xs) {
    for (int y : ys) {
      TilePlacement p;
      p.tile_id = numbered_id(naming.id_prefix, out.size());
      p.scene_id = naming.scene_id;
      p.offset_x = x;
      p.offset_y = y;
      p.tile_w = tw;
      p.tile_h = th;
      p.cumulative_scale = naming.cumulative_scale;
      p.parent_placement = naming.parent;
      out.push_back(std::move(p));
    }
  }
  return out;
}

inline PixelGrid extract_tile(const PixelGrid& src, const TilePlacement& p) {
  if (p.offset_x < 0 || p.offset_y < 0 || p.tile_w < 1 || p.tile_h < 1 || p.offset_x + p.tile_w > src.width() ||
      p.offset_y + p.tile_h > src.height())
    throw std::out_of_range("placement " + p.tile_id + " lies outside the " + std::to_string(src.width()) + "x" +
                            std::to_string(src.height()) + " parent");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(p.tile_w) * p.tile_h * PixelGrid::kChannels);
  const auto in = src.data();
  const std::size_t row_bytes = static_cast<std::size_t>(p.tile_w) * PixelGrid::kChannels;
  for (int y = 0; y < p.tile_h; ++y) {
    const auto* s = in.data() + src.offset(p.offset_x, p.offset_y + y);
    std::copy(s, s + row_bytes, data.data() + y * row_bytes);
  }
  return PixelGrid(p.tile_w, p.tile_h, std::move(data));
}

namespace detail {

// Upscale factor applied to the parent raster of chain[i] before it was tiled.
inline int level_factor(std::span<const TilePlacement> chain, std::size_t i) {
  const int outer = i == 0 ? 1 : chain[i - 1].cumulative_scale;
  const int inner = chain[i].cumulative_scale;
  if (outer < 1 || inner < 1 || inner % outer != 0)
    throw Error("placement " + chain[i].tile_id + ": cumulative scale " + std::to_string(inner) +
                " is not a multiple of its parent's " + std::to_string(outer));
  return inner / outer;
}

inline void check_links(std::span<const TilePlacement> chain) {
  if (chain.empty()) throw Error("empty placement chain");
  if (chain.front().parent_placement)
    throw Error("placement chain must start at a stage-1 tile, got " + chain.front().tile_id);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (chain[i].parent_placement != chain[i - 1].tile_id)
      throw Error("placement " + chain[i].tile_id + " does not link to " + chain[i - 1].tile_id);
  }
}

}  // namespace detail

/// Maps a box in the innermost tile of `chain` (ordered outermost first) to
/// original-scene pixels. Fractional results are kept as-is.
template <class T>
BasicBox<T> tile_to_scene(const BasicBox<T>& b, std::span<const TilePlacement> chain) {
  detail::check_links(chain);
  T x0 = b.xmin, y0 = b.ymin, x1 = b.xmax, y1 = b.ymax;
  for (std::size_t k = chain.size(); k-- > 0;) {
    const T ox(chain[k].offset_x), oy(chain[k].offset_y);
    const T f(detail::level_factor(chain, k));
    x0 = (x0 + ox) / f;
    y0 = (y0 + oy) / f;
    x1 = (x1 + ox) / f;
    y1 = (y1 + oy) / f;
  }
  return BasicBox<T>(x0, y0, x1, y1);
}

/// Inverse of tile_to_scene. The result may extend past the tile; clipping is
/// left to the caller.
template <class T>
BasicBox<T> scene_to_tile(const BasicBox<T>& b, std::span<const TilePlacement> chain) {
  detail::check_links(chain);
  T x0 = b.xmin, y0 = b.ymin, x1 = b.xmax, y1 = b.ymax;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const T ox(chain[k].offset_x), oy(chain[k].offset_y);
    const T f(detail::level_factor(chain, k));
    x0 = x0 * f - ox;
    y0 = y0 * f - oy;
    x1 = x1 * f - ox;
    y1 = y1 * f - oy;
  }
  return BasicBox<T>(x0, y0, x1, y1);
}

/// Every placement cut from one scene, across all stages.
struct SceneManifest {
  std::string scene_id;
  int scene_w = 0;
  int scene_h = 0;
  /// Centimetres per pixel of the original scene.
  double base_gsd = 30.0;
  std::vector<TilePlacement> placements;

  int max_scale() const {
    int s = 1;
    for (const auto& p : placements) s = std::max(s, p.cumulative_scale);
    return s;
  }

  double effective_gsd() const { return base_gsd / max_scale(); }

  const TilePlacement* find(const std::string& tile_id) const {
    for (const auto& p : placements)
      if (p.tile_id == tile_id) return &p;
    return nullptr;
  }

  /// Placement chain for `tile_id`, outermost first.
  std::vector<TilePlacement> chain(const std::string& tile_id) const {
    std::vector<TilePlacement> out;
    const TilePlacement* p = find(tile_id);
    if (!p) throw Error("unknown tile id " + tile_id + " in scene " + scene_id);
    while (p) {
      out.push_back(*p);
      if (out.size() > placements.size()) throw Error("cyclic placement chain at " + tile_id);
      if (!p->parent_placement) break;
      const auto* parent = find(*p->parent_placement);
      if (!parent) throw Error("placement " + p->tile_id + " has unresolved parent " + *p->parent_placement);
      p = parent;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  /// Tiles nothing else was cut from; these are what a detector sees.
  std::vector<const TilePlacement*> leaves() const {
    std::map<std::string, bool> has_child;
    for (const auto& p : placements)
      if (p.parent_placement) has_child[*p.parent_placement] = true;
    std::vector<const TilePlacement*> out;
    for (const auto& p : placements)
      if (!has_child.count(p.tile_id)) out.push_back(&p);
    return out;
  }

  /// Checks id uniqueness, parent linkage, scale divisibility and that every
  /// placement fits inside its parent raster.
  void validate() const {
    if (scene_w < 1 || scene_h < 1) throw Error("manifest " + scene_id + ": scene dimensions must be positive");
    if (!(base_gsd > 0)) throw Error("manifest " + scene_id + ": base_gsd must be positive");
    std::map<std::string, const TilePlacement*> by_id;
    for (const auto& p : placements) {
      if (!by_id.emplace(p.tile_id, &p).second) throw Error("manifest " + scene_id + ": duplicate tile id " + p.tile_id);
    }
    for (const auto& p : placements) {
      int parent_w = scene_w, parent_h = scene_h, parent_scale = 1;
      if (p.parent_placement) {
        auto it = by_id.find(*p.parent_placement);
        if (it == by_id.end()) throw Error("placement " + p.tile_id + " has unresolved parent " + *p.parent_placement);
        parent_scale = it->second->cumulative_scale;
        if (parent_scale < 1 || p.cumulative_scale % parent_scale != 0)
          throw Error("placement " + p.tile_id + ": scale not a multiple of its parent's");
        const int f = p.cumulative_scale / parent_scale;
        parent_w = it->second->tile_w * f;
        parent_h = it->second->tile_h * f;
      } else if (p.cumulative_scale < 1) {
        throw Error("placement " + p.tile_id + ": cumulative scale must be >= 1");
      }
      if (p.offset_x < 0 || p.offset_y < 0 || p.tile_w < 1 || p.tile_h < 1 || p.offset_x + p.tile_w > parent_w ||
          p.offset_y + p.tile_h > parent_h)
        throw Error("placement " + p.tile_id + " exceeds its parent extent");
    }
    for (const auto& p : placements) (void)chain(p.tile_id);
  }
};

}  // namespace sattile
