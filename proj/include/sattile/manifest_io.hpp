#pragma once

// <scene_id>.manifest.json: one SceneManifest per scene, written next to the
// tiles so stitching can be rebuilt from disk alone.

#include <nlohmann/json.hpp>

#include <string>

#include "error.hpp"
#include "text.hpp"
#include "tiling.hpp"

namespace sattile {

inline nlohmann::ordered_json manifest_to_json(const SceneManifest& m) {
  nlohmann::ordered_json j;
  j["scene_id"] = m.scene_id;
  j["scene_w"] = m.scene_w;
  j["scene_h"] = m.scene_h;
  j["base_gsd"] = m.base_gsd;
  j["effective_gsd"] = m.effective_gsd();
  auto& arr = j["placements"] = nlohmann::ordered_json::array();
  for (const auto& p : m.placements) {
    nlohmann::ordered_json e;
    e["tile_id"] = p.tile_id;
    e["scene_id"] = p.scene_id;
    e["offset_x"] = p.offset_x;
    e["offset_y"] = p.offset_y;
    e["tile_w"] = p.tile_w;
    e["tile_h"] = p.tile_h;
    e["cumulative_scale"] = p.cumulative_scale;
    e["parent_placement"] = p.parent_placement ? nlohmann::ordered_json(*p.parent_placement) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(e));
  }
  return j;
}

inline std::string manifest_to_string(const SceneManifest& m) { return manifest_to_json(m).dump(2) + "\n"; }

inline SceneManifest manifest_from_string(const std::string& text, const std::string& origin = "<manifest>") {
  SceneManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.scene_id = j.at("scene_id").get<std::string>();
    m.scene_w = j.at("scene_w").get<int>();
    m.scene_h = j.at("scene_h").get<int>();
    m.base_gsd = j.at("base_gsd").get<double>();
    for (const auto& e : j.at("placements")) {
      TilePlacement p;
      p.tile_id = e.at("tile_id").get<std::string>();
      p.scene_id = e.at("scene_id").get<std::string>();
      p.offset_x = e.at("offset_x").get<int>();
      p.offset_y = e.at("offset_y").get<int>();
      p.tile_w = e.at("tile_w").get<int>();
      p.tile_h = e.at("tile_h").get<int>();
      p.cumulative_scale = e.at("cumulative_scale").get<int>();
      if (e.contains("parent_placement") && !e.at("parent_placement").is_null())
        p.parent_placement = e.at("parent_placement").get<std::string>();
      m.placements.push_back(std::move(p));
    }
    if (j.contains("effective_gsd") && j.at("effective_gsd").get<double>() != m.effective_gsd())
      throw Error("effective_gsd does not equal base_gsd / max cumulative_scale");
  } catch (const nlohmann::json::exception& e) {
    throw Error(origin + ": malformed manifest: " + e.what());
  }
  m.validate();
  return m;
}

inline void write_manifest(const std::string& path, const SceneManifest& m) { write_file(path, manifest_to_string(m)); }

inline SceneManifest read_manifest(const std::string& path) { return manifest_from_string(read_file(path), path); }

}  // namespace sattile
