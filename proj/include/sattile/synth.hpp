#pragma once

// Synthetic overhead scenes with pixel-exact ground truth: scattered small
// rectangles plus parking-lot style grids whose spacing can shrink to zero.

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "labels.hpp"
#include "raster.hpp"
#include "rng.hpp"

namespace sattile {

struct SynthSpec {
  std::string scene_id = "synth";
  int scene_w = 600;
  int scene_h = 600;
  int object_w = 13;
  int object_h = 7;
  int n_scattered = 0;
  int n_clusters = 0;
  int cluster_rows = 4;
  int cluster_cols = 10;
  int cluster_gap = 2;
  /// Per-channel uniform noise amplitude added to every pixel.
  int background_noise = 8;
  std::uint64_t seed = 0;
  /// Type id written for every object (18 is "Small Car" in xView).
  int source_type_id = 18;
  int max_attempts = 1000;

  void validate() const {
    if (scene_w < 1 || scene_h < 1) throw std::invalid_argument("scene dimensions must be positive");
    if (object_w < 1 || object_h < 1) throw std::invalid_argument("object dimensions must be positive");
    if (n_scattered < 0 || n_clusters < 0) throw std::invalid_argument("object counts must be >= 0");
    if (n_clusters > 0 && (cluster_rows < 1 || cluster_cols < 1))
      throw std::invalid_argument("cluster rows and columns must be positive");
    if (cluster_gap < 0) throw std::invalid_argument("cluster_gap must be >= 0");
    if (background_noise < 0 || background_noise > 40) throw std::invalid_argument("background_noise must lie in [0, 40]");
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be positive");
  }
};

struct SynthScene {
  std::string scene_id;
  PixelGrid image;
  std::vector<LabeledObject> truths;
};

inline constexpr Rgb kSynthBackground{96, 104, 88};
inline constexpr std::array<Rgb, 6> kSynthPalette{
    Rgb{220, 40, 40}, Rgb{40, 70, 220}, Rgb{235, 235, 235}, Rgb{16, 16, 16}, Rgb{230, 200, 40}, Rgb{200, 60, 200}};

/// Extent of a rows x cols grid of objects separated by `gap` pixels.
inline std::pair<int, int> cluster_extent(const SynthSpec& s) {
  return {s.cluster_cols * (s.object_w + s.cluster_gap) - s.cluster_gap,
          s.cluster_rows * (s.object_h + s.cluster_gap) - s.cluster_gap};
}

/// Clusters are placed first, then scattered objects, each by rejection
/// sampling. Separate placements keep at least one pixel of background
/// between them; objects inside a cluster are exactly `cluster_gap` apart.
inline SynthScene generate_scene(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SynthScene out{spec.scene_id, PixelGrid(spec.scene_w, spec.scene_h, kSynthBackground), {}};

  struct Rect {
    int x0, y0, x1, y1;
  };
  std::vector<Rect> occupied;
  const auto place = [&](int w, int h, const char* what) -> Rect {
    if (w > spec.scene_w || h > spec.scene_h)
      throw Error(std::string("synthetic ") + what + " of " + std::to_string(w) + "x" + std::to_string(h) +
                  " does not fit the scene");
    for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
      const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.scene_w - w + 1)));
      const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.scene_h - h + 1)));
      const Rect r{x, y, x + w, y + h};
      const bool clash = std::any_of(occupied.begin(), occupied.end(), [&](const Rect& o) {
        return r.x0 < o.x1 + 1 && o.x0 < r.x1 + 1 && r.y0 < o.y1 + 1 && o.y0 < r.y1 + 1;
      });
      if (!clash) {
        occupied.push_back(r);
        return r;
      }
    }
    throw Error(std::string("could not place ") + what + " after " + std::to_string(spec.max_attempts) + " attempts");
  };

  const auto add_object = [&](int x, int y) {
    const Rgb color = kSynthPalette[rng.below(kSynthPalette.size())];
    for (int yy = y; yy < y + spec.object_h; ++yy)
      for (int xx = x; xx < x + spec.object_w; ++xx) out.image.set(xx, yy, color);
    LabeledObject o;
    o.scene_id = spec.scene_id;
    o.class_id = spec.source_type_id;
    o.space = ClassSpace::source;
    o.box = Box(x, y, x + spec.object_w, y + spec.object_h);
    out.truths.push_back(std::move(o));
  };

  const auto [cw, ch] = cluster_extent(spec);
  for (int c = 0; c < spec.n_clusters; ++c) {
    const Rect r = place(cw, ch, "cluster");
    for (int row = 0; row < spec.cluster_rows; ++row)
      for (int col = 0; col < spec.cluster_cols; ++col)
        add_object(r.x0 + col * (spec.object_w + spec.cluster_gap), r.y0 + row * (spec.object_h + spec.cluster_gap));
  }
  for (int i = 0; i < spec.n_scattered; ++i) {
    const Rect r = place(spec.object_w, spec.object_h, "object");
    add_object(r.x0, r.y0);
  }

  if (spec.background_noise > 0) {
    const auto span = static_cast<std::uint64_t>(2 * spec.background_noise + 1);
    for (auto& v : out.image.data()) {
      const int n = static_cast<int>(rng.below(span)) - spec.background_noise;
      v = static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + n, 0, 255));
    }
  }
  return out;
}

}  // namespace sattile
