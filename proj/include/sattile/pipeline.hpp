#pragma once

// End-to-end composition: tile -> upscale -> tile -> detect -> stitch ->
// dedup -> evaluate. The four named modes differ only in geometry and
// upscaling; detection, stitching and evaluation code paths are shared.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "detect_io.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "labels.hpp"
#include "manifest_io.hpp"
#include "parallel.hpp"
#include "png_io.hpp"
#include "raster.hpp"
#include "report.hpp"
#include "stitch.hpp"
#include "text.hpp"
#include "tiling.hpp"
#include "upscale_exchange.hpp"

namespace sattile {

enum class UpscaleEngine { nn, external };
enum class DetectorKind { mock, external };

struct SweepSpec {
  double start = 0.01;
  double stop = 0.90;
  double step = 0.01;

  std::vector<double> thresholds() const { return make_sweep(start, stop, step); }
};

struct PipelineConfig {
  std::string mode = "2stage-nn4";
  int stage1_size = 208;
  int stage1_overlap = 50;
  int factor = 4;
  UpscaleEngine engine = UpscaleEngine::nn;
  std::string upscale_command;
  /// 0 disables the second tiling stage.
  int stage2_size = 416;
  int stage2_overlap = 50;
  DetectorKind detector = DetectorKind::mock;
  std::string detector_command;
  DedupOptions dedup;
  double eval_iou = 0.5;
  SweepSpec sweep;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double min_visible_fraction = 0.25;
  double base_gsd = 30.0;
  /// Mock detector settings; its seed is derived per scene from `seed`.
  MockDetectorParams mock;

  void validate() const {
    (void)plan_axis(stage1_size, stage1_size, stage1_overlap);
    if (factor < 1) throw Error("factor must be >= 1");
    if (stage2_size != 0) (void)plan_axis(stage2_size, stage2_size, stage2_overlap);
    if (engine == UpscaleEngine::external && upscale_command.empty())
      throw Error("external upscale engine needs an upscale command");
    if (detector == DetectorKind::external && detector_command.empty())
      throw Error("external detector needs a detector command");
    if (!(dedup.threshold > 0.0 && dedup.threshold <= 1.0)) throw Error("dedup threshold must lie in (0, 1]");
    if (!(eval_iou > 0.0 && eval_iou <= 1.0)) throw Error("iou threshold must lie in (0, 1]");
    (void)sweep.thresholds();
    if (jobs < 1) throw Error("jobs must be >= 1");
    if (!(min_visible_fraction >= 0.0 && min_visible_fraction <= 1.0))
      throw Error("min_visible_fraction must lie in [0, 1]");
    if (!(base_gsd > 0.0)) throw Error("base_gsd must be positive");
    mock.validate();
  }
};

inline const std::vector<std::string>& pipeline_modes() {
  static const std::vector<std::string> modes{"1stage", "1stage-nn2", "2stage-nn4", "2stage-sr4"};
  return modes;
}

/// Sets tiling and upscaling for a named mode; every other setting is left
/// alone. Detector input is 416x416 in all four modes.
inline void apply_mode(PipelineConfig& c, const std::string& mode) {
  if (mode == "1stage") {
    c.stage1_size = 416;
    c.stage1_overlap = 50;
    c.factor = 1;
    c.engine = UpscaleEngine::nn;
    c.stage2_size = 0;
  } else if (mode == "1stage-nn2") {
    c.stage1_size = 208;
    c.stage1_overlap = 50;
    c.factor = 2;
    c.engine = UpscaleEngine::nn;
    c.stage2_size = 0;
  } else if (mode == "2stage-nn4") {
    c.stage1_size = 208;
    c.stage1_overlap = 50;
    c.factor = 4;
    c.engine = UpscaleEngine::nn;
    c.stage2_size = 416;
    c.stage2_overlap = 50;
  } else if (mode == "2stage-sr4") {
    c.stage1_size = 208;
    c.stage1_overlap = 50;
    c.factor = 4;
    c.engine = UpscaleEngine::external;
    c.stage2_size = 416;
    c.stage2_overlap = 50;
  } else {
    throw Error("unknown mode '" + mode + "' (expected 1stage, 1stage-nn2, 2stage-nn4 or 2stage-sr4)");
  }
  c.mode = mode;
}

// ---------------------------------------------------------------------------
// Flat key = value config

inline std::string_view metric_name(OverlapMetric m) { return m == OverlapMetric::ioa ? "ioa" : "iou"; }

/// Every setting that affects artifacts. `jobs` is deliberately absent: output
/// does not depend on it.
inline std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& c) {
  const auto r = [](double v) { return format_real(v, 0); };
  return {
      {"mode", c.mode},
      {"stage1_size", std::to_string(c.stage1_size)},
      {"stage1_overlap", std::to_string(c.stage1_overlap)},
      {"factor", std::to_string(c.factor)},
      {"engine", c.engine == UpscaleEngine::nn ? "nn" : "external"},
      {"upscale_command", c.upscale_command},
      {"stage2_size", std::to_string(c.stage2_size)},
      {"stage2_overlap", std::to_string(c.stage2_overlap)},
      {"detector", c.detector == DetectorKind::mock ? "mock" : "external"},
      {"detector_command", c.detector_command},
      {"dedup_threshold", r(c.dedup.threshold)},
      {"dedup_metric", std::string(metric_name(c.dedup.metric))},
      {"class_agnostic", c.dedup.class_agnostic ? "true" : "false"},
      {"iou", r(c.eval_iou)},
      {"sweep", r(c.sweep.start) + ":" + r(c.sweep.stop) + ":" + r(c.sweep.step)},
      {"seed", std::to_string(c.seed)},
      {"min_visible", r(c.min_visible_fraction)},
      {"base_gsd", r(c.base_gsd)},
      {"mock.miss", r(c.mock.miss_probability)},
      {"mock.miss_area_scale", r(c.mock.miss_area_scale)},
      {"mock.jitter", r(c.mock.localization_jitter)},
      {"mock.fp_rate", r(c.mock.false_positive_rate)},
      {"mock.fp_w", r(c.mock.fp_box_w)},
      {"mock.fp_h", r(c.mock.fp_box_h)},
      {"mock.tp_conf", r(c.mock.tp_conf_lo) + ":" + r(c.mock.tp_conf_hi)},
      {"mock.fp_conf", r(c.mock.fp_conf_lo) + ":" + r(c.mock.fp_conf_hi)},
      {"mock.truncated_scale", r(c.mock.truncated_confidence_scale)},
  };
}

inline std::string format_config(const PipelineConfig& c) {
  std::string s;
  for (const auto& [k, v] : config_entries(c)) s += k + " = " + v + "\n";
  return s;
}

/// Applies one setting. `mode` rewrites the geometry keys, so files list it first.
inline void set_config_value(PipelineConfig& c, const std::string& key, const std::string& value) {
  const auto real = [&](double& out) {
    if (!parse_real(value, out)) throw Error("config key " + key + ": expected a number, got '" + value + "'");
  };
  const auto integer = [&](auto& out) {
    long long v;
    if (!parse_int(value, v)) throw Error("config key " + key + ": expected an integer, got '" + value + "'");
    out = static_cast<std::remove_reference_t<decltype(out)>>(v);
  };
  const auto range = [&](double& lo, double& hi) {
    const auto colon = value.find(':');
    if (colon == std::string::npos || !parse_real(value.substr(0, colon), lo) || !parse_real(value.substr(colon + 1), hi))
      throw Error("config key " + key + ": expected lo:hi, got '" + value + "'");
  };
  if (key == "mode") {
    apply_mode(c, value);
  } else if (key == "stage1_size") {
    integer(c.stage1_size);
  } else if (key == "stage1_overlap") {
    integer(c.stage1_overlap);
  } else if (key == "factor") {
    integer(c.factor);
  } else if (key == "engine") {
    if (value == "nn") c.engine = UpscaleEngine::nn;
    else if (value == "external") c.engine = UpscaleEngine::external;
    else throw Error("engine must be nn or external");
  } else if (key == "upscale_command") {
    c.upscale_command = value;
  } else if (key == "stage2_size") {
    integer(c.stage2_size);
  } else if (key == "stage2_overlap") {
    integer(c.stage2_overlap);
  } else if (key == "detector") {
    if (value == "mock") c.detector = DetectorKind::mock;
    else if (value == "external") c.detector = DetectorKind::external;
    else throw Error("detector must be mock or external");
  } else if (key == "detector_command") {
    c.detector_command = value;
  } else if (key == "dedup_threshold") {
    real(c.dedup.threshold);
  } else if (key == "dedup_metric") {
    if (value == "ioa") c.dedup.metric = OverlapMetric::ioa;
    else if (value == "iou") c.dedup.metric = OverlapMetric::iou;
    else throw Error("dedup_metric must be ioa or iou");
  } else if (key == "class_agnostic") {
    if (value != "true" && value != "false") throw Error("class_agnostic must be true or false");
    c.dedup.class_agnostic = value == "true";
  } else if (key == "iou") {
    real(c.eval_iou);
  } else if (key == "sweep") {
    const auto a = value.find(':');
    const auto b = a == std::string::npos ? a : value.find(':', a + 1);
    if (b == std::string::npos || !parse_real(value.substr(0, a), c.sweep.start) ||
        !parse_real(value.substr(a + 1, b - a - 1), c.sweep.stop) || !parse_real(value.substr(b + 1), c.sweep.step))
      throw Error("sweep must look like start:stop:step");
  } else if (key == "seed") {
    integer(c.seed);
  } else if (key == "jobs") {
    integer(c.jobs);
  } else if (key == "min_visible") {
    real(c.min_visible_fraction);
  } else if (key == "base_gsd") {
    real(c.base_gsd);
  } else if (key == "mock.miss") {
    real(c.mock.miss_probability);
  } else if (key == "mock.miss_area_scale") {
    real(c.mock.miss_area_scale);
  } else if (key == "mock.jitter") {
    real(c.mock.localization_jitter);
  } else if (key == "mock.fp_rate") {
    real(c.mock.false_positive_rate);
  } else if (key == "mock.fp_w") {
    real(c.mock.fp_box_w);
  } else if (key == "mock.fp_h") {
    real(c.mock.fp_box_h);
  } else if (key == "mock.tp_conf") {
    range(c.mock.tp_conf_lo, c.mock.tp_conf_hi);
  } else if (key == "mock.fp_conf") {
    range(c.mock.fp_conf_lo, c.mock.fp_conf_hi);
  } else if (key == "mock.truncated_scale") {
    real(c.mock.truncated_confidence_scale);
  } else {
    throw Error("unknown config key '" + key + "'");
  }
}

inline void parse_config(PipelineConfig& c, std::string_view text, const std::string& origin = "<config>") {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(origin, line_no, "expected key = value");
    try {
      set_config_value(c, std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(origin, line_no, e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Running

struct SceneInput {
  std::string scene_id;
  PixelGrid image;
  /// Merged-space ground truth in scene pixels.
  std::vector<LabeledObject> truths;
};

struct LeafResult {
  std::string tile_id;
  int tile_w = 0;
  int tile_h = 0;
  std::vector<LabeledObject> labels;  // tile-local; empty unless the mock detector ran
  std::vector<Detection> detections;  // tile-local
};

struct SceneRun {
  SceneManifest manifest;
  std::vector<LeafResult> leaves;
  SceneDetections stitched;
  SceneDetections deduped;
};

struct PipelineResult {
  std::vector<SceneRun> scenes;
  EvalReport report;
};

namespace detail {

inline std::vector<PixelGrid> upscale_batch(const std::vector<PixelGrid>& tiles, const PipelineConfig& cfg,
                                            const std::filesystem::path& exchange) {
  if (cfg.factor == 1) return tiles;
  if (cfg.engine == UpscaleEngine::external) return external_upscale(tiles, cfg.factor, exchange, cfg.upscale_command);
  std::vector<std::optional<PixelGrid>> slots(tiles.size());
  parallel_for(tiles.size(), cfg.jobs, [&](std::size_t i) { slots[i] = nn_upscale(tiles[i], cfg.factor); });
  std::vector<PixelGrid> out;
  out.reserve(tiles.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace detail

/// Runs one scene. With `out_dir` set, writes detector tiles to
/// `<out>/<scene_id>/<tile_id>.png`, tile detections to
/// `<out>/<scene_id>/detections/`, the manifest and the stitched detections.
/// An external detector or upscaler needs `out_dir`.
inline SceneRun run_scene(const SceneInput& in, const PipelineConfig& cfg,
                          const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  namespace fs = std::filesystem;
  cfg.validate();
  const bool external_io = cfg.detector == DetectorKind::external || cfg.engine == UpscaleEngine::external;
  if (external_io && !out_dir) throw Error("external engines exchange files and need an output directory");

  SceneRun run;
  auto& m = run.manifest;
  m.scene_id = in.scene_id;
  m.scene_w = in.image.width();
  m.scene_h = in.image.height();
  m.base_gsd = cfg.base_gsd;

  const auto stage1 =
      plan_tiles(m.scene_w, m.scene_h, cfg.stage1_size, cfg.stage1_overlap, PlanNaming{in.scene_id, "t", {}, 1});
  m.placements = stage1;

  std::vector<PixelGrid> s1_tiles;
  s1_tiles.reserve(stage1.size());
  for (const auto& p : stage1) s1_tiles.push_back(extract_tile(in.image, p));

  const fs::path tiles_dir = out_dir ? *out_dir / in.scene_id : fs::path{};
  if (out_dir) fs::create_directories(tiles_dir);

  const bool two_level = cfg.factor > 1 || cfg.stage2_size > 0;
  std::vector<std::vector<TilePlacement>> children(stage1.size());
  if (two_level) {
    const auto up = detail::upscale_batch(s1_tiles, cfg, out_dir ? *out_dir / (in.scene_id + ".exchange") : fs::path{});
    if (cfg.engine == UpscaleEngine::external) fs::remove_all(*out_dir / (in.scene_id + ".exchange"));
    parallel_for(stage1.size(), cfg.jobs, [&](std::size_t i) {
      const auto& parent = stage1[i];
      const int w = up[i].width(), h = up[i].height();
      // Without a second tiler the whole upscaled tile goes to the detector.
      const int size = cfg.stage2_size > 0 ? cfg.stage2_size : std::max(w, h);
      const int overlap = cfg.stage2_size > 0 ? cfg.stage2_overlap : 0;
      children[i] = plan_tiles(w, h, size, overlap,
                               PlanNaming{in.scene_id, parent.tile_id + "_", parent.tile_id, cfg.factor});
      if (out_dir)
        for (const auto& c : children[i]) write_png((tiles_dir / (c.tile_id + ".png")).string(), extract_tile(up[i], c));
    });
    for (auto& c : children) m.placements.insert(m.placements.end(), c.begin(), c.end());
  } else if (out_dir) {
    parallel_for(stage1.size(), cfg.jobs, [&](std::size_t i) {
      write_png((tiles_dir / (stage1[i].tile_id + ".png")).string(), s1_tiles[i]);
    });
  }
  m.validate();
  if (out_dir) write_manifest((*out_dir / (in.scene_id + ".manifest.json")).string(), m);

  const auto leaves = m.leaves();
  run.leaves.resize(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    run.leaves[i].tile_id = leaves[i]->tile_id;
    run.leaves[i].tile_w = leaves[i]->tile_w;
    run.leaves[i].tile_h = leaves[i]->tile_h;
  }

  std::vector<Detection> tile_dets;
  if (cfg.detector == DetectorKind::mock) {
    MockDetectorParams params = cfg.mock;
    params.seed = mix64(cfg.seed ^ fnv1a64(in.scene_id));
    parallel_for(leaves.size(), cfg.jobs, [&](std::size_t i) {
      auto& leaf = run.leaves[i];
      const auto chain = m.chain(leaf.tile_id);
      leaf.labels = export_tile_labels(in.truths, chain, cfg.min_visible_fraction);
      leaf.detections = mock_detect(leaf.tile_id, leaf.tile_w, leaf.tile_h, leaf.labels, params);
    });
    if (out_dir) {
      fs::create_directories(tiles_dir / "detections");
      for (const auto& leaf : run.leaves)
        write_file((tiles_dir / "detections" / (leaf.tile_id + ".txt")).string(), format_detections(leaf.detections));
    }
    for (const auto& leaf : run.leaves) tile_dets.insert(tile_dets.end(), leaf.detections.begin(), leaf.detections.end());
  } else {
    tile_dets = run_external_detector(tiles_dir, cfg.detector_command);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < run.leaves.size(); ++i) index[run.leaves[i].tile_id] = i;
    for (const auto& d : tile_dets) {
      auto it = index.find(d.tile_id);
      if (it == index.end()) throw ProtocolError("detections for " + d.tile_id + ", which is not a detector tile");
      run.leaves[it->second].detections.push_back(d);
    }
  }

  run.stitched = localize(tile_dets, m);
  run.deduped = dedup(run.stitched, cfg.dedup);
  if (out_dir)
    write_file((*out_dir / (in.scene_id + ".detections.txt")).string(), format_scene_detections(run.deduped));
  return run;
}

inline EvalReport evaluate_runs(const std::vector<SceneInput>& inputs, const std::vector<SceneRun>& runs,
                                const PipelineConfig& cfg) {
  std::vector<EvalScene> scenes;
  scenes.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    scenes.push_back(EvalScene{inputs[i].scene_id, runs[i].deduped.detections, inputs[i].truths});
  const auto thresholds = cfg.sweep.thresholds();
  return evaluate(scenes, thresholds, cfg.eval_iou);
}

/// Digest of every regular file under `root` except the run log itself,
/// keyed by relative path.
inline std::map<std::string, std::string> digest_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), root).generic_string();
    if (rel == "run.json") continue;
    out[rel] = sha256_hex(read_file(e.path().string()));
  }
  return out;
}

/// Runs every scene, evaluates, and (with `out_dir`) writes the evaluation
/// report, `run.cfg`, and `run.json` recording config, seeds and a SHA-256
/// of every artifact. On failure, a freshly created `out_dir` is removed.
inline PipelineResult run_pipeline(const std::vector<SceneInput>& inputs, const PipelineConfig& cfg,
                                   const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  namespace fs = std::filesystem;
  cfg.validate();
  const bool created = out_dir && !fs::exists(*out_dir);
  try {
    if (out_dir) fs::create_directories(*out_dir);
    PipelineResult r;
    // Scenes run one after another; each scene parallelises over its tiles.
    for (const auto& in : inputs) r.scenes.push_back(run_scene(in, cfg, out_dir));
    r.report = evaluate_runs(inputs, r.scenes, cfg);
    if (out_dir) {
      emit_report(r.report, *out_dir / "eval", cfg.mode);
      write_file((*out_dir / "run.cfg").string(), format_config(cfg));
      nlohmann::ordered_json log;
      log["mode"] = cfg.mode;
      auto& jc = log["config"] = nlohmann::ordered_json::object();
      for (const auto& [k, v] : config_entries(cfg)) jc[k] = v;
      log["seeds"]["pipeline"] = cfg.seed;
      auto& scene_seeds = log["seeds"]["mock_per_scene"] = nlohmann::ordered_json::object();
      for (const auto& in : inputs) scene_seeds[in.scene_id] = mix64(cfg.seed ^ fnv1a64(in.scene_id));
      auto& jap = log["ap"] = nlohmann::ordered_json::object();
      for (const auto& cc : r.report.classes) jap[std::string(class_name(cc.cls))] = cc.ap;
      auto& digests = log["artifacts"] = nlohmann::ordered_json::object();
      for (const auto& [path, hex] : digest_tree(*out_dir)) digests[path] = hex;
      write_file((*out_dir / "run.json").string(), log.dump(2) + "\n");
    }
    return r;
  } catch (...) {
    if (created) {
      std::error_code ec;
      fs::remove_all(*out_dir, ec);
    }
    throw;
  }
}

}  // namespace sattile
