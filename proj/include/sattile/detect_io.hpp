#pragma once

// Detector boundary: the per-tile detection text format, the external
// detector process adapter, and a seeded mock detector driven by ground truth.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "labels.hpp"
#include "process.hpp"
#include "rng.hpp"
#include "text.hpp"

namespace sattile {

struct Detection {
  MergedClass cls = MergedClass::vehicle;
  double confidence = 1.0;  // (0, 1]
  Box box;
  std::string tile_id;

  friend bool operator==(const Detection&, const Detection&) = default;
};

inline bool valid_confidence(double c) { return c > 0.0 && c <= 1.0; }

/// One detection per line: `<class_index> <confidence> <xmin> <ymin> <xmax> <ymax>`.
inline std::string format_detections(std::span<const Detection> dets) {
  std::string s;
  for (const auto& d : dets) {
    s += std::to_string(static_cast<int>(d.cls));
    s += ' ';
    s += format_real(d.confidence);
    for (double v : {d.box.xmin, d.box.ymin, d.box.xmax, d.box.ymax}) {
      s += ' ';
      s += format_real(v);
    }
    s += '\n';
  }
  return s;
}

inline std::vector<Detection> parse_detections(std::string_view text, const std::string& origin,
                                               const std::string& tile_id = {}) {
  std::vector<Detection> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 6) throw ParseError(origin, line_no, "expected 6 fields, got " + std::to_string(tok.size()));
    long long cls;
    if (!parse_int(tok[0], cls) || !merged_class_from_index(cls))
      throw ParseError(origin, line_no, "bad class index '" + std::string(tok[0]) + "'");
    double v[5];
    for (int i = 0; i < 5; ++i)
      if (!parse_real(tok[1 + i], v[i])) throw ParseError(origin, line_no, "bad number '" + std::string(tok[1 + i]) + "'");
    if (!valid_confidence(v[0]))
      throw ParseError(origin, line_no, "confidence " + std::string(tok[1]) + " outside (0, 1]");
    Detection d;
    d.cls = static_cast<MergedClass>(cls);
    d.confidence = v[0];
    d.tile_id = tile_id;
    try {
      d.box = Box(v[1], v[2], v[3], v[4]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(origin, line_no, e.what());
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Invokes `command <tiles_dir>` and collects `<tiles_dir>/detections/<tile_id>.txt`.
/// Files are read in tile-id order; each must name a `<tile_id>.png` present
/// in the tiles directory.
inline std::vector<Detection> run_external_detector(const std::filesystem::path& tiles_dir, const std::string& command) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(tiles_dir)) throw Error("tiles directory " + tiles_dir.string() + " does not exist");
  const fs::path det_dir = tiles_dir / "detections";
  fs::remove_all(det_dir);
  fs::create_directories(det_dir);

  const int status = run_command(command, tiles_dir.string());
  if (status != 0) throw ProtocolError("detector command exited with status " + std::to_string(status));

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(det_dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<Detection> out;
  for (const auto& f : files) {
    const std::string tile_id = f.stem().string();
    if (!fs::exists(tiles_dir / (tile_id + ".png")))
      throw ProtocolError(f.string() + ": no tile named " + tile_id + ".png");
    auto dets = parse_detections(read_file(f.string()), f.string(), tile_id);
    out.insert(out.end(), std::make_move_iterator(dets.begin()), std::make_move_iterator(dets.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mock detector

/// Stand-in detector noise model. Nothing here is calibrated against a real
/// network; the defaults only make the confidence sweep meaningful.
struct MockDetectorParams {
  /// Per-object miss probability.
  double miss_probability = 0.0;
  /// If positive, the miss probability decays with on-tile box area:
  /// p = miss_probability * exp(-area / miss_area_scale).
  double miss_area_scale = 0.0;
  /// Each corner moves by U(-jitter, +jitter) pixels.
  double localization_jitter = 0.0;
  /// Expected false positives per tile (Poisson).
  double false_positive_rate = 0.0;
  double fp_box_w = 13.0;
  double fp_box_h = 7.0;
  /// True positives draw confidence from (tp_conf_lo, tp_conf_hi], false
  /// positives from (fp_conf_lo, fp_conf_hi].
  double tp_conf_lo = 0.5;
  double tp_conf_hi = 1.0;
  double fp_conf_lo = 0.0;
  double fp_conf_hi = 0.5;
  /// Objects cut by the tile edge get confidence scaled by
  /// visible_fraction * truncated_confidence_scale.
  double truncated_confidence_scale = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    const auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(miss_probability)) throw std::invalid_argument("miss_probability must lie in [0, 1]");
    if (miss_area_scale < 0.0) throw std::invalid_argument("miss_area_scale must be >= 0");
    if (!(localization_jitter >= 0.0)) throw std::invalid_argument("localization_jitter must be >= 0");
    if (!(false_positive_rate >= 0.0)) throw std::invalid_argument("false_positive_rate must be >= 0");
    if (!(fp_box_w > 0.0) || !(fp_box_h > 0.0)) throw std::invalid_argument("false positive box size must be positive");
    if (!(tp_conf_lo >= 0.0 && tp_conf_lo < tp_conf_hi && tp_conf_hi <= 1.0))
      throw std::invalid_argument("true positive confidence range must satisfy 0 <= lo < hi <= 1");
    if (!(fp_conf_lo >= 0.0 && fp_conf_lo < fp_conf_hi && fp_conf_hi <= 1.0))
      throw std::invalid_argument("false positive confidence range must satisfy 0 <= lo < hi <= 1");
    if (!(truncated_confidence_scale > 0.0 && truncated_confidence_scale <= 1.0))
      throw std::invalid_argument("truncated_confidence_scale must lie in (0, 1]");
  }

  double miss_for_area(double a) const {
    if (miss_area_scale <= 0.0) return miss_probability;
    return miss_probability * std::exp(-a / miss_area_scale);
  }
};

namespace detail {

// Moves both ends of [lo, hi) by the given deltas, keeps them inside
// [0, limit] and at least one pixel apart.
inline std::pair<double, double> jitter_span(double lo, double hi, double d0, double d1, double limit) {
  double a = std::clamp(lo + d0, 0.0, limit);
  double b = std::clamp(hi + d1, 0.0, limit);
  if (b < a) std::swap(a, b);
  if (b - a < 1.0) {
    b = std::min(limit, a + 1.0);
    a = std::max(0.0, b - 1.0);
  }
  return {a, b};
}

}  // namespace detail

/// Simulated detections for one tile. Randomness comes from substreams keyed
/// by (seed, tile_id), so tiles are independent of each other and of the
/// order they are processed in. Miss, jitter, confidence and false-positive
/// draws use separate substreams, so e.g. changing the jitter never changes
/// which objects are missed.
inline std::vector<Detection> mock_detect(const std::string& tile_id, int tile_w, int tile_h,
                                          std::span<const LabeledObject> labels, const MockDetectorParams& params) {
  params.validate();
  Rng miss_rng = Rng::substream(params.seed, tile_id + "#miss");
  Rng jitter_rng = Rng::substream(params.seed, tile_id + "#jitter");
  Rng conf_rng = Rng::substream(params.seed, tile_id + "#conf");
  Rng fp_rng = Rng::substream(params.seed, tile_id + "#fp");
  const double j = params.localization_jitter;

  std::vector<Detection> out;
  for (const auto& o : labels) {
    const double u_miss = miss_rng.uniform();
    double d[4];
    for (auto& v : d) v = jitter_rng.uniform(-j, j);
    const double u_conf = conf_rng.uniform();
    if (u_miss < params.miss_for_area(area(o.box))) continue;

    Detection det;
    det.cls = o.merged();
    det.tile_id = tile_id;
    if (j > 0.0) {
      const auto [x0, x1] = detail::jitter_span(o.box.xmin, o.box.xmax, d[0], d[2], tile_w);
      const auto [y0, y1] = detail::jitter_span(o.box.ymin, o.box.ymax, d[1], d[3], tile_h);
      det.box = Box(x0, y0, x1, y1);
    } else {
      det.box = o.box;
    }
    double conf = params.tp_conf_hi - u_conf * (params.tp_conf_hi - params.tp_conf_lo);
    if (o.visible_fraction < 1.0) conf *= o.visible_fraction * params.truncated_confidence_scale;
    det.confidence = conf;
    out.push_back(std::move(det));
  }

  const unsigned n_fp = fp_rng.poisson(params.false_positive_rate);
  const double bw = std::min<double>(params.fp_box_w, tile_w);
  const double bh = std::min<double>(params.fp_box_h, tile_h);
  for (unsigned k = 0; k < n_fp; ++k) {
    const double x = fp_rng.uniform() * (tile_w - bw);
    const double y = fp_rng.uniform() * (tile_h - bh);
    const double u = fp_rng.uniform();
    Detection det;
    det.cls = MergedClass::vehicle;
    det.tile_id = tile_id;
    det.box = Box(x, y, x + bw, y + bh);
    det.confidence = params.fp_conf_hi - u * (params.fp_conf_hi - params.fp_conf_lo);
    out.push_back(std::move(det));
  }
  return out;
}

}  // namespace sattile
