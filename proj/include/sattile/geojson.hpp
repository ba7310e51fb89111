#pragma once

// xView-style ground truth: a GeoJSON FeatureCollection whose features carry
// `image_id`, an integer `type_id` and pixel bounds in `bounds_imcoords`
// ("xmin,ymin,xmax,ymax").

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "labels.hpp"
#include "text.hpp"

namespace sattile {

struct LabelParseResult {
  std::vector<LabeledObject> objects;
  /// One entry per skipped feature: "feature <index>: <reason>".
  std::vector<std::string> warnings;
};

/// Scene id for an xView image_id: the file name without its extension.
inline std::string scene_id_from_image_id(const std::string& image_id) {
  const auto slash = image_id.find_last_of('/');
  std::string base = slash == std::string::npos ? image_id : image_id.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

inline LabelParseResult parse_labels_text(const std::string& text, const std::string& origin = "<geojson>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(origin + ": not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("features") || !doc["features"].is_array())
    throw Error(origin + ": expected a FeatureCollection with a features array");

  LabelParseResult r;
  std::size_t index = 0;
  for (const auto& f : doc["features"]) {
    const std::string where = "feature " + std::to_string(index++);
    const auto skip = [&](const std::string& why) { r.warnings.push_back(where + ": " + why); };
    if (!f.is_object() || !f.contains("properties") || !f["properties"].is_object()) {
      skip("missing properties");
      continue;
    }
    const auto& props = f["properties"];
    if (!props.contains("bounds_imcoords") || !props["bounds_imcoords"].is_string()) {
      skip("missing bounds_imcoords");
      continue;
    }
    if (!props.contains("type_id") || !props["type_id"].is_number_integer()) {
      skip("missing integer type_id");
      continue;
    }
    if (!props.contains("image_id") || !props["image_id"].is_string()) {
      skip("missing image_id");
      continue;
    }
    const std::string bounds = props["bounds_imcoords"].get<std::string>();
    std::vector<double> v;
    std::size_t start = 0;
    bool ok = true;
    while (ok) {
      const auto comma = bounds.find(',', start);
      double x;
      ok = parse_real(trim(std::string_view(bounds).substr(start, comma - start)), x);
      if (ok) v.push_back(x);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!ok || v.size() != 4) {
      skip("malformed bounds_imcoords '" + bounds + "'");
      continue;
    }
    LabeledObject o;
    o.scene_id = scene_id_from_image_id(props["image_id"].get<std::string>());
    o.class_id = props["type_id"].get<int>();
    o.space = ClassSpace::source;
    try {
      o.box = Box(v[0], v[1], v[2], v[3]);
    } catch (const std::invalid_argument& e) {
      skip(std::string("degenerate box: ") + e.what());
      continue;
    }
    r.objects.push_back(std::move(o));
  }
  return r;
}

inline LabelParseResult parse_labels(const std::string& path) { return parse_labels_text(read_file(path), path); }

/// Writes source-space objects; image_id is `<scene_id>.png`.
inline std::string labels_to_geojson(std::span<const LabeledObject> objs) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  auto& features = doc["features"] = nlohmann::ordered_json::array();
  for (const auto& o : objs) {
    if (o.space != ClassSpace::source) throw Error("GeoJSON export needs source-space class ids");
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = nullptr;
    auto& p = f["properties"];
    p["image_id"] = o.scene_id + ".png";
    p["type_id"] = o.class_id;
    p["bounds_imcoords"] = format_real(o.box.xmin, 0) + "," + format_real(o.box.ymin, 0) + "," +
                           format_real(o.box.xmax, 0) + "," + format_real(o.box.ymax, 0);
    features.push_back(std::move(f));
  }
  return doc.dump(1) + "\n";
}

}  // namespace sattile
