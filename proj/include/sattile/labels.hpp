#pragma once

// Ground-truth objects, class merging, scene-level splits and tile-local
// label export.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "rng.hpp"
#include "text.hpp"
#include "tiling.hpp"

namespace sattile {

enum class MergedClass : int { vehicle = 0, airplane = 1, helicopter = 2 };

inline constexpr MergedClass kMergedClasses[] = {MergedClass::vehicle, MergedClass::airplane,
                                                 MergedClass::helicopter};

inline std::string_view class_name(MergedClass c) {
  switch (c) {
    case MergedClass::vehicle: return "vehicle";
    case MergedClass::airplane: return "airplane";
    case MergedClass::helicopter: return "helicopter";
  }
  return "?";
}

inline std::optional<MergedClass> merged_class_from_index(long long i) {
  if (i < 0 || i > 2) return std::nullopt;
  return static_cast<MergedClass>(i);
}

inline std::optional<MergedClass> merged_class_from_name(std::string_view s) {
  for (auto c : kMergedClasses)
    if (class_name(c) == s) return c;
  return std::nullopt;
}

/// Whether LabeledObject::class_id is a source-taxonomy type id or a
/// MergedClass index.
enum class ClassSpace { source, merged };

struct LabeledObject {
  std::string scene_id;
  int class_id = 0;
  ClassSpace space = ClassSpace::source;
  Box box;
  /// Fraction of the original box still inside the tile; 1 for scene labels.
  double visible_fraction = 1.0;

  MergedClass merged() const {
    if (space != ClassSpace::merged) throw Error("object in scene " + scene_id + " has not been class-mapped");
    return static_cast<MergedClass>(class_id);
  }

  friend bool operator==(const LabeledObject&, const LabeledObject&) = default;
};

// ---------------------------------------------------------------------------
// Class map

/// Source type id -> merged class, or nullopt for classes deliberately
/// ignored. Classes missing from the map entirely are an error when seen.
class ClassMap {
 public:
  void set(int source, std::optional<MergedClass> target) { entries_[source] = target; }

  bool contains(int source) const { return entries_.count(source) != 0; }

  std::optional<MergedClass> lookup(int source) const { return entries_.at(source); }

  std::size_t count(MergedClass c) const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                  [c](const auto& kv) { return kv.second == c; }));
  }

  const std::map<int, std::optional<MergedClass>>& entries() const { return entries_; }

  /// Two columns per line, `<source type id> <vehicle|airplane|helicopter|ignore>`;
  /// `#` starts a comment.
  static ClassMap parse(std::string_view text, const std::string& origin = "<class map>") {
    ClassMap m;
    std::size_t line_no = 0;
    while (!text.empty()) {
      const auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      const auto tok = split_ws(line);
      if (tok.empty()) continue;
      if (tok.size() != 2) throw ParseError(origin, line_no, "expected `<source id> <merged class>`");
      long long id;
      if (!parse_int(tok[0], id)) throw ParseError(origin, line_no, "bad source class id '" + std::string(tok[0]) + "'");
      if (m.contains(static_cast<int>(id)))
        throw ParseError(origin, line_no, "source class " + std::string(tok[0]) + " listed twice");
      if (tok[1] == "ignore") {
        m.set(static_cast<int>(id), std::nullopt);
      } else if (auto c = merged_class_from_name(tok[1])) {
        m.set(static_cast<int>(id), *c);
      } else {
        throw ParseError(origin, line_no, "unknown merged class '" + std::string(tok[1]) + "'");
      }
    }
    return m;
  }

  static ClassMap load(const std::string& path) { return parse(read_file(path), path); }

  static const ClassMap& xview_default();

 private:
  std::map<int, std::optional<MergedClass>> entries_;
};

/// Built-in copy of data/xview_class_map.txt (the two are kept identical by a
/// unit test).
inline constexpr std::string_view kXviewClassMapText = R"(# xView type id -> merged class
# vehicle family (22)
17 vehicle     # Passenger Vehicle
18 vehicle     # Small Car
19 vehicle     # Bus
20 vehicle     # Pickup Truck
21 vehicle     # Utility Truck
23 vehicle     # Truck
24 vehicle     # Cargo Truck
25 vehicle     # Truck w/Box
26 vehicle     # Truck Tractor
27 vehicle     # Trailer
28 vehicle     # Truck w/Flatbed
29 vehicle     # Truck w/Liquid
32 vehicle     # Crane Truck
53 vehicle     # Engineering Vehicle
59 vehicle     # Mobile Crane
60 vehicle     # Dump Truck
61 vehicle     # Haul Truck
62 vehicle     # Scraper/Tractor
63 vehicle     # Front loader/Bulldozer
64 vehicle     # Excavator
65 vehicle     # Cement Mixer
66 vehicle     # Ground Grader
# aircraft
11 airplane    # Fixed-wing Aircraft
12 airplane    # Small Aircraft
13 airplane    # Cargo Plane
15 helicopter  # Helicopter
# everything else is dropped
33 ignore      # Railway Vehicle
34 ignore      # Passenger Car
35 ignore      # Cargo Car
36 ignore      # Flat Car
37 ignore      # Tank car
38 ignore      # Locomotive
40 ignore      # Maritime Vessel
41 ignore      # Motorboat
42 ignore      # Sailboat
44 ignore      # Tugboat
45 ignore      # Barge
47 ignore      # Fishing Vessel
49 ignore      # Ferry
50 ignore      # Yacht
51 ignore      # Container Ship
52 ignore      # Oil Tanker
54 ignore      # Tower crane
55 ignore      # Container Crane
56 ignore      # Reach Stacker
57 ignore      # Straddle Carrier
71 ignore      # Hut/Tent
72 ignore      # Shed
73 ignore      # Building
74 ignore      # Aircraft Hangar
76 ignore      # Damaged Building
77 ignore      # Facility
79 ignore      # Construction Site
83 ignore      # Vehicle Lot
84 ignore      # Helipad
86 ignore      # Storage Tank
89 ignore      # Shipping container lot
91 ignore      # Shipping Container
93 ignore      # Pylon
94 ignore      # Tower
)";

inline const ClassMap& ClassMap::xview_default() {
  static const ClassMap m = parse(kXviewClassMapText, "<builtin xview map>");
  return m;
}

/// Relabels source-space objects into merged classes and drops ignored ones.
/// Objects already in merged space pass through, so mapping is idempotent.
inline std::vector<LabeledObject> apply_class_map(std::span<const LabeledObject> objs, const ClassMap& map) {
  std::set<int> unknown;
  for (const auto& o : objs)
    if (o.space == ClassSpace::source && !map.contains(o.class_id)) unknown.insert(o.class_id);
  if (!unknown.empty()) {
    std::string list;
    for (int c : unknown) list += (list.empty() ? "" : ", ") + std::to_string(c);
    throw Error("source classes missing from class map: " + list);
  }
  std::vector<LabeledObject> out;
  out.reserve(objs.size());
  for (const auto& o : objs) {
    if (o.space == ClassSpace::merged) {
      out.push_back(o);
      continue;
    }
    if (auto target = map.lookup(o.class_id)) {
      LabeledObject m = o;
      m.class_id = static_cast<int>(*target);
      m.space = ClassSpace::merged;
      out.push_back(std::move(m));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene split

struct SceneSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
};

/// Sorts and de-duplicates the ids, shuffles them with Rng(seed) (Fisher-Yates
/// over mt19937_64, see rng.hpp), then cuts at floor(n * fraction).
inline SceneSplit split_scenes(std::vector<std::string> scene_ids, double fraction, std::uint64_t seed) {
  if (scene_ids.empty()) throw Error("cannot split an empty scene list");
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split fraction must lie in (0, 1)");
  std::sort(scene_ids.begin(), scene_ids.end());
  scene_ids.erase(std::unique(scene_ids.begin(), scene_ids.end()), scene_ids.end());
  Rng rng(seed);
  rng.shuffle(scene_ids);
  // The epsilon keeps products like 100 * 0.29 from flooring one short.
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(scene_ids.size()) * fraction + 1e-9));
  SceneSplit s;
  s.train.assign(scene_ids.begin(), scene_ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(scene_ids.begin() + static_cast<std::ptrdiff_t>(n_train), scene_ids.end());
  return s;
}

// ---------------------------------------------------------------------------
// Tile-local labels

/// Drops scene objects that end up degenerate after clipping to the scene.
inline std::vector<LabeledObject> clip_to_scene(std::span<const LabeledObject> objs, int scene_w, int scene_h) {
  const Box bounds(0, 0, scene_w, scene_h);
  std::vector<LabeledObject> out;
  for (const auto& o : objs) {
    if (auto c = clip_to(o.box, bounds)) {
      LabeledObject k = o;
      k.box = *c;
      out.push_back(std::move(k));
    }
  }
  return out;
}

/// Maps scene labels into the innermost tile of `chain`, clips them to the
/// tile, and keeps those whose visible area is at least `min_visible_fraction`
/// of their full tile-space area.
inline std::vector<LabeledObject> export_tile_labels(std::span<const LabeledObject> objs,
                                                     std::span<const TilePlacement> chain,
                                                     double min_visible_fraction = 0.25) {
  if (!(min_visible_fraction >= 0.0 && min_visible_fraction <= 1.0))
    throw std::invalid_argument("min_visible_fraction must lie in [0, 1]");
  if (chain.empty()) throw Error("empty placement chain");
  const auto& leaf = chain.back();
  const Box bounds(0, 0, leaf.tile_w, leaf.tile_h);
  std::vector<LabeledObject> out;
  for (const auto& o : objs) {
    const Box local = scene_to_tile(o.box, chain);
    const auto clipped = clip_to(local, bounds);
    if (!clipped) continue;
    const double visible = area(*clipped) / area(local);
    if (visible < min_visible_fraction) continue;
    LabeledObject t = o;
    t.box = *clipped;
    t.visible_fraction = visible;
    out.push_back(std::move(t));
  }
  return out;
}

/// `<class_index> <xmin> <ymin> <xmax> <ymax>` per line, tile pixels.
inline std::string format_tile_labels(std::span<const LabeledObject> objs) {
  std::string s;
  for (const auto& o : objs) {
    s += std::to_string(static_cast<int>(o.merged()));
    for (double v : {o.box.xmin, o.box.ymin, o.box.xmax, o.box.ymax}) s += " " + format_real(v);
    s += "\n";
  }
  return s;
}

inline std::vector<LabeledObject> parse_tile_labels(std::string_view text, const std::string& origin,
                                                    const std::string& scene_id = {}) {
  std::vector<LabeledObject> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 5) throw ParseError(origin, line_no, "expected 5 fields, got " + std::to_string(tok.size()));
    long long cls;
    if (!parse_int(tok[0], cls) || !merged_class_from_index(cls))
      throw ParseError(origin, line_no, "bad class index '" + std::string(tok[0]) + "'");
    double v[4];
    for (int i = 0; i < 4; ++i)
      if (!parse_real(tok[1 + i], v[i])) throw ParseError(origin, line_no, "bad coordinate '" + std::string(tok[1 + i]) + "'");
    LabeledObject o;
    o.scene_id = scene_id;
    o.class_id = static_cast<int>(cls);
    o.space = ClassSpace::merged;
    try {
      o.box = Box(v[0], v[1], v[2], v[3]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(origin, line_no, e.what());
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace sattile
