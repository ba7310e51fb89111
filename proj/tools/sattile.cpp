// sattile: command-line front end for the tiling / upscaling / detection /
// stitching / evaluation pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sattile/sattile.hpp"

namespace fs = std::filesystem;
using namespace sattile;

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

ClassMap load_class_map(const std::string& path) { return path.empty() ? ClassMap::xview_default() : ClassMap::load(path); }

/// Merged-space truths grouped by scene id.
std::map<std::string, std::vector<LabeledObject>> load_truths(const std::string& path, const ClassMap& map) {
  auto parsed = parse_labels(path);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << path << ": " << w << "\n";
  std::map<std::string, std::vector<LabeledObject>> out;
  for (auto& o : apply_class_map(parsed.objects, map)) out[o.scene_id].push_back(std::move(o));
  return out;
}

std::string stem_of(const std::string& path, const std::string& suffix) {
  std::string name = fs::path(path).filename().string();
  if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
    return name.substr(0, name.size() - suffix.size());
  return fs::path(path).stem().string();
}

std::vector<fs::path> png_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

struct MockFlags {
  double miss = 0.0, miss_area_scale = 0.0, jitter = 0.0, fp_rate = 0.0;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--miss", miss, "mock detector miss probability");
    app->add_option("--miss-area-scale", miss_area_scale, "mock miss decays as exp(-area/scale); 0 disables");
    app->add_option("--jitter", jitter, "mock per-corner localisation jitter (pixels)");
    app->add_option("--fp-rate", fp_rate, "mock expected false positives per tile");
  }
};

// ---------------------------------------------------------------------------

int cmd_tile(const std::string& in, std::string scene_id, int size, int overlap, double gsd, const std::string& out,
             const std::string& append_to, const std::string& parent, int scale, unsigned jobs) {
  const PixelGrid image = read_png(in);
  SceneManifest m;
  PlanNaming naming;
  if (!append_to.empty()) {
    if (parent.empty()) throw Error("--append-to needs --parent");
    m = read_manifest(append_to);
    const auto* p = m.find(parent);
    if (!p) throw Error("parent tile " + parent + " not in " + append_to);
    if (scale < 1 || (p->cumulative_scale * scale) < 1) throw Error("--scale must be >= 1");
    if (image.width() != p->tile_w * scale || image.height() != p->tile_h * scale)
      throw Error("image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                  ", expected parent tile times --scale");
    naming = PlanNaming{m.scene_id, parent + "_", parent, p->cumulative_scale * scale};
  } else {
    if (scene_id.empty()) scene_id = fs::path(in).stem().string();
    m.scene_id = scene_id;
    m.scene_w = image.width();
    m.scene_h = image.height();
    m.base_gsd = gsd;
    naming = PlanNaming{scene_id, "t", {}, 1};
  }
  const auto placements = plan_tiles(image.width(), image.height(), size, overlap, naming);
  const fs::path tiles_dir = fs::path(out) / m.scene_id;
  fs::create_directories(tiles_dir);
  parallel_for(placements.size(), jobs, [&](std::size_t i) {
    write_png((tiles_dir / (placements[i].tile_id + ".png")).string(), extract_tile(image, placements[i]));
  });
  m.placements.insert(m.placements.end(), placements.begin(), placements.end());
  m.validate();
  const std::string manifest_path =
      append_to.empty() ? (fs::path(out) / (m.scene_id + ".manifest.json")).string() : append_to;
  write_manifest(manifest_path, m);
  std::cout << placements.size() << " tiles written to " << tiles_dir.string() << "\n"
            << "manifest: " << manifest_path << "\n";
  return 0;
}

int cmd_upscale(const std::string& in, int factor, const std::string& engine, const std::string& command,
                const std::string& out, unsigned jobs) {
  const auto files = png_files(in);
  fs::create_directories(out);
  if (engine == "nn") {
    parallel_for(files.size(), jobs, [&](std::size_t i) {
      write_png((fs::path(out) / files[i].filename()).string(), nn_upscale(read_png(files[i].string()), factor));
    });
  } else if (engine == "external") {
    if (command.empty()) throw Error("--engine external needs --command");
    std::vector<PixelGrid> tiles;
    for (const auto& f : files) tiles.push_back(read_png(f.string()));
    const fs::path exchange = fs::path(out) / ".exchange";
    const auto up = external_upscale(tiles, factor, exchange, command);
    for (std::size_t i = 0; i < files.size(); ++i) write_png((fs::path(out) / files[i].filename()).string(), up[i]);
    fs::remove_all(exchange);
  } else {
    throw Error("--engine must be nn or external");
  }
  std::cout << files.size() << " tiles upscaled x" << factor << " into " << out << "\n";
  return 0;
}

int cmd_detect(const std::string& tiles, const std::string& engine, const std::string& command,
               const std::string& manifest_path, const std::string& truth, const std::string& class_map,
               const MockFlags& mock, double min_visible) {
  std::size_t n = 0;
  if (engine == "external") {
    if (command.empty()) throw Error("--engine external needs --command");
    n = run_external_detector(tiles, command).size();
  } else if (engine == "mock") {
    if (manifest_path.empty() || truth.empty()) throw Error("--engine mock needs --manifest and --truth");
    const auto m = read_manifest(manifest_path);
    auto truths = load_truths(truth, load_class_map(class_map));
    const auto& scene_truths = truths[m.scene_id];
    MockDetectorParams params;
    params.miss_probability = mock.miss;
    params.miss_area_scale = mock.miss_area_scale;
    params.localization_jitter = mock.jitter;
    params.false_positive_rate = mock.fp_rate;
    params.seed = mix64(mock.seed ^ fnv1a64(m.scene_id));
    const fs::path det_dir = fs::path(tiles) / "detections";
    fs::create_directories(det_dir);
    for (const auto* leaf : m.leaves()) {
      const auto labels = export_tile_labels(scene_truths, m.chain(leaf->tile_id), min_visible);
      const auto dets = mock_detect(leaf->tile_id, leaf->tile_w, leaf->tile_h, labels, params);
      write_file((det_dir / (leaf->tile_id + ".txt")).string(), format_detections(dets));
      n += dets.size();
    }
  } else {
    throw Error("--engine must be external or mock");
  }
  std::cout << n << " detections in " << (fs::path(tiles) / "detections").string() << "\n";
  return 0;
}

int cmd_stitch(const std::string& manifest_path, std::string det_dir, const DedupOptions& opt, std::string out) {
  const auto m = read_manifest(manifest_path);
  if (det_dir.empty()) det_dir = (fs::path(manifest_path).parent_path() / m.scene_id / "detections").string();
  std::vector<Detection> dets;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(det_dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto d = parse_detections(read_file(f.string()), f.string(), f.stem().string());
    dets.insert(dets.end(), d.begin(), d.end());
  }
  const auto kept = dedup(localize(dets, m), opt);
  if (out.empty()) out = (fs::path(manifest_path).parent_path() / (m.scene_id + ".detections.txt")).string();
  write_file(out, format_scene_detections(kept));
  std::cout << dets.size() << " tile detections -> " << kept.detections.size() << " after dedup: " << out << "\n";
  return 0;
}

/// Reads pr_table.csv + summary.json written by emit_report.
PlotSeries load_series(const std::string& label, const fs::path& dir, MergedClass cls) {
  PlotSeries s;
  s.label = label;
  const std::string table = read_file((dir / "pr_table.csv").string());
  std::size_t line_no = 0, start = 0;
  while (start < table.size()) {
    auto nl = table.find('\n', start);
    if (nl == std::string::npos) nl = table.size();
    const std::string line = table.substr(start, nl - start);
    start = nl + 1;
    if (++line_no == 1 || line.empty()) continue;
    std::vector<std::string> f;
    std::size_t a = 0;
    for (;;) {
      const auto c = line.find(',', a);
      f.push_back(line.substr(a, c - a));
      if (c == std::string::npos) break;
      a = c + 1;
    }
    if (f.size() != 7) throw ParseError((dir / "pr_table.csv").string(), line_no, "expected 7 columns");
    if (f[0] != class_name(cls)) continue;
    PRPoint p;
    long long tp, fp, fn;
    if (!parse_real(f[1], p.threshold) || !parse_int(f[2], tp) || !parse_int(f[3], fp) || !parse_int(f[4], fn))
      throw ParseError((dir / "pr_table.csv").string(), line_no, "bad number");
    p.tp = static_cast<std::size_t>(tp);
    p.fp = static_cast<std::size_t>(fp);
    p.fn = static_cast<std::size_t>(fn);
    s.points.push_back(p);
  }
  s.ap = s.points.empty() ? 0.0 : average_precision(s.points);
  return s;
}

int cmd_eval(const std::vector<std::string>& det_files, const std::string& truth, const std::string& class_map,
             double iou_thr, const SweepSpec& sweep, const std::string& out, const std::string& label,
             const std::vector<std::string>& overlay) {
  if (!overlay.empty()) {
    std::vector<PlotSeries> series;
    for (const auto& spec : overlay) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw Error("--overlay expects LABEL=REPORT_DIR");
      series.push_back(load_series(spec.substr(0, eq), spec.substr(eq + 1), MergedClass::vehicle));
    }
    const fs::path path = fs::path(out).extension() == ".svg" ? fs::path(out) : fs::path(out) / "overlay_vehicle.svg";
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path.string(), pr_curve_svg("vehicle PR curves", series));
    std::cout << "overlay: " << path.string() << "\n";
    return 0;
  }
  if (truth.empty()) throw Error("eval needs --truth");
  auto truths = load_truths(truth, load_class_map(class_map));
  std::vector<EvalScene> scenes;
  for (const auto& f : det_files) {
    EvalScene s;
    s.scene_id = stem_of(f, ".detections.txt");
    s.detections = parse_detections(read_file(f), f, "");
    s.truths = truths[s.scene_id];
    scenes.push_back(std::move(s));
  }
  const auto thresholds = sweep.thresholds();
  const auto report = evaluate(scenes, thresholds, iou_thr);
  emit_report(report, out, label);
  for (const auto& cc : report.classes)
    std::cout << class_name(cc.cls) << " AP " << fixed4(cc.ap) << " (" << cc.n_detections << " detections, "
              << cc.n_truths << " truths)\n";
  std::cout << "report: " << out << "\n";
  return 0;
}

void add_synth_flags(CLI::App* app, SynthSpec& s) {
  app->add_option("--width", s.scene_w, "scene width");
  app->add_option("--height", s.scene_h, "scene height");
  app->add_option("--object-w", s.object_w, "object width");
  app->add_option("--object-h", s.object_h, "object height");
  app->add_option("--scattered", s.n_scattered, "scattered objects per scene");
  app->add_option("--clusters", s.n_clusters, "dense clusters per scene");
  app->add_option("--rows", s.cluster_rows, "rows per cluster");
  app->add_option("--cols", s.cluster_cols, "columns per cluster");
  app->add_option("--gap", s.cluster_gap, "gap between clustered objects");
  app->add_option("--noise", s.background_noise, "per-channel noise amplitude");
}

std::vector<SynthScene> make_synth_suite(const SynthSpec& base, int count, std::uint64_t seed) {
  std::vector<SynthScene> out;
  for (int i = 0; i < count; ++i) {
    SynthSpec s = base;
    char id[32];
    std::snprintf(id, sizeof(id), "synth_%03d", i);
    s.scene_id = id;
    s.seed = mix64(seed + static_cast<std::uint64_t>(i));
    out.push_back(generate_scene(s));
  }
  return out;
}

int cmd_synth(const SynthSpec& base, int count, std::uint64_t seed, const std::string& out) {
  fs::create_directories(out);
  std::vector<LabeledObject> all;
  for (auto& s : make_synth_suite(base, count, seed)) {
    write_png((fs::path(out) / (s.scene_id + ".png")).string(), s.image);
    all.insert(all.end(), s.truths.begin(), s.truths.end());
  }
  write_file((fs::path(out) / "truth.geojson").string(), labels_to_geojson(all));
  std::cout << count << " scenes, " << all.size() << " objects in " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiling, upscaling, detection stitching and evaluation for large overhead images"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned jobs = 1;
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  // tile
  auto* tile = app.add_subcommand("tile", "cut overlapped tiles and write a manifest");
  std::string tile_in, tile_scene, tile_out = ".", tile_append, tile_parent;
  int tile_size = 208, tile_overlap = 50, tile_scale = 1;
  double tile_gsd = 30.0;
  tile->add_option("--in", tile_in, "scene (or upscaled parent tile) PNG")->required();
  tile->add_option("--scene-id", tile_scene, "scene id (default: file stem)");
  tile->add_option("--size", tile_size, "tile size");
  tile->add_option("--overlap", tile_overlap, "overlap between tiles");
  tile->add_option("--gsd", tile_gsd, "ground sample distance of the scene, cm/pixel");
  tile->add_option("--out", tile_out, "output directory");
  tile->add_option("--append-to", tile_append, "existing manifest to extend with a deeper stage");
  tile->add_option("--parent", tile_parent, "parent tile id when appending");
  tile->add_option("--scale", tile_scale, "upscale factor applied to the parent tile when appending");

  // upscale
  auto* upscale = app.add_subcommand("upscale", "upscale every PNG in a directory");
  std::string up_in, up_out, up_engine = "nn", up_command;
  int up_factor = 4;
  upscale->add_option("--in", up_in, "directory of tiles")->required();
  upscale->add_option("--out", up_out, "output directory")->required();
  upscale->add_option("--factor", up_factor, "integer upscale factor")->check(CLI::PositiveNumber);
  upscale->add_option("--engine", up_engine, "nn or external");
  upscale->add_option("--command", up_command, "external upscaler command (gets the exchange directory)");

  // detect
  auto* detect = app.add_subcommand("detect", "run a detector over a tiles directory");
  std::string det_tiles, det_engine = "external", det_command, det_manifest, det_truth, det_map;
  double det_min_visible = 0.25;
  MockFlags det_mock;
  detect->add_option("--tiles", det_tiles, "tiles directory")->required();
  detect->add_option("--engine", det_engine, "external or mock");
  detect->add_option("--command", det_command, "external detector command (gets the tiles directory)");
  detect->add_option("--manifest", det_manifest, "scene manifest (mock engine)");
  detect->add_option("--truth", det_truth, "ground-truth GeoJSON (mock engine)");
  detect->add_option("--class-map", det_map, "class map file (default: built-in xView map)");
  detect->add_option("--min-visible", det_min_visible, "minimum visible fraction for tile labels");
  detect->add_option("--seed", det_mock.seed, "mock detector seed");
  det_mock.add(detect);

  // stitch
  auto* stitch = app.add_subcommand("stitch", "map tile detections to the scene and remove duplicates");
  std::string st_manifest, st_dets, st_out, st_metric = "ioa";
  DedupOptions st_opt;
  stitch->add_option("--manifest", st_manifest, "scene manifest")->required();
  stitch->add_option("--detections", st_dets, "directory of per-tile detection files");
  stitch->add_option("--dedup-threshold", st_opt.threshold, "overlap above which the weaker box is removed");
  stitch->add_option("--dedup-metric", st_metric, "ioa or iou");
  stitch->add_flag("--class-agnostic", st_opt.class_agnostic, "suppress across classes");
  stitch->add_option("--out", st_out, "output file (default <scene_id>.detections.txt)");

  // eval
  auto* eval = app.add_subcommand("eval", "precision/recall sweep and AP");
  std::vector<std::string> ev_dets, ev_overlay;
  std::string ev_truth, ev_map, ev_out = "eval", ev_label = "run", ev_sweep = "0.01:0.90:0.01";
  double ev_iou = 0.5;
  eval->add_option("--detections", ev_dets, "<scene_id>.detections.txt files");
  eval->add_option("--truth", ev_truth, "ground-truth GeoJSON");
  eval->add_option("--class-map", ev_map, "class map file (default: built-in xView map)");
  eval->add_option("--iou", ev_iou, "IOU needed for a match");
  eval->add_option("--sweep", ev_sweep, "confidence thresholds as start:stop:step");
  eval->add_option("--label", ev_label, "curve label");
  eval->add_option("--overlay", ev_overlay, "LABEL=REPORT_DIR; plots several reports together");
  eval->add_option("--out", ev_out, "report directory (or .svg path with --overlay)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic scenes with ground truth");
  SynthSpec sy_spec;
  sy_spec.n_clusters = 2;
  sy_spec.n_scattered = 20;
  int sy_count = 1;
  std::uint64_t sy_seed = 0;
  std::string sy_out;
  synth->add_option("--out", sy_out, "output directory")->required();
  synth->add_option("--count", sy_count, "number of scenes");
  synth->add_option("--seed", sy_seed, "base seed");
  add_synth_flags(synth, sy_spec);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run a full tiling/upscaling/detection/evaluation mode");
  std::string pl_mode, pl_config, pl_truth, pl_map, pl_out, pl_engine, pl_command, pl_detector, pl_det_command,
      pl_metric, pl_sweep;
  std::vector<std::string> pl_scenes;
  int pl_synth = 0;
  SynthSpec pl_synth_spec;
  pl_synth_spec.n_clusters = 2;
  pl_synth_spec.n_scattered = 20;
  PipelineConfig flags;
  pipe->add_option("--mode", pl_mode, "1stage, 1stage-nn2, 2stage-nn4 or 2stage-sr4");
  pipe->add_option("--config", pl_config, "key = value config file (flags win)");
  pipe->add_option("--scene", pl_scenes, "scene PNG files");
  pipe->add_option("--truth", pl_truth, "ground-truth GeoJSON");
  pipe->add_option("--class-map", pl_map, "class map file (default: built-in xView map)");
  pipe->add_option("--synth", pl_synth, "generate this many synthetic scenes instead of --scene");
  add_synth_flags(pipe, pl_synth_spec);
  pipe->add_option("--out", pl_out, "run directory")->required();
  auto* o_size = pipe->add_option("--size", flags.stage1_size, "stage-1 tile size");
  auto* o_overlap = pipe->add_option("--overlap", flags.stage1_overlap, "stage-1 overlap");
  auto* o_factor = pipe->add_option("--factor", flags.factor, "upscale factor");
  auto* o_size2 = pipe->add_option("--stage2-size", flags.stage2_size, "stage-2 tile size (0: none)");
  auto* o_overlap2 = pipe->add_option("--stage2-overlap", flags.stage2_overlap, "stage-2 overlap");
  pipe->add_option("--engine", pl_engine, "upscaler: nn or external");
  pipe->add_option("--command", pl_command, "external upscaler command");
  pipe->add_option("--detector", pl_detector, "mock or external");
  pipe->add_option("--detector-command", pl_det_command, "external detector command");
  auto* o_dthr = pipe->add_option("--dedup-threshold", flags.dedup.threshold, "dedup overlap threshold");
  pipe->add_option("--dedup-metric", pl_metric, "ioa or iou");
  auto* o_iou = pipe->add_option("--iou", flags.eval_iou, "evaluation IOU threshold");
  pipe->add_option("--sweep", pl_sweep, "confidence thresholds as start:stop:step");
  auto* o_seed = pipe->add_option("--seed", flags.seed, "seed for the mock detector and synthetic scenes");
  auto* o_miss = pipe->add_option("--miss", flags.mock.miss_probability, "mock miss probability");
  auto* o_mas = pipe->add_option("--miss-area-scale", flags.mock.miss_area_scale, "mock area-dependent miss scale");
  auto* o_jit = pipe->add_option("--jitter", flags.mock.localization_jitter, "mock jitter (pixels)");
  auto* o_fpr = pipe->add_option("--fp-rate", flags.mock.false_positive_rate, "mock false positives per tile");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*tile) return cmd_tile(tile_in, tile_scene, tile_size, tile_overlap, tile_gsd, tile_out, tile_append, tile_parent,
                               tile_scale, jobs);
    if (*upscale) return cmd_upscale(up_in, up_factor, up_engine, up_command, up_out, jobs);
    if (*detect)
      return cmd_detect(det_tiles, det_engine, det_command, det_manifest, det_truth, det_map, det_mock, det_min_visible);
    if (*stitch) {
      if (st_metric == "ioa") st_opt.metric = OverlapMetric::ioa;
      else if (st_metric == "iou") st_opt.metric = OverlapMetric::iou;
      else throw Error("--dedup-metric must be ioa or iou");
      return cmd_stitch(st_manifest, st_dets, st_opt, st_out);
    }
    if (*eval) {
      PipelineConfig tmp;
      set_config_value(tmp, "sweep", ev_sweep);
      return cmd_eval(ev_dets, ev_truth, ev_map, ev_iou, tmp.sweep, ev_out, ev_label, ev_overlay);
    }
    if (*synth) return cmd_synth(sy_spec, sy_count, sy_seed, sy_out);
    if (*pipe) {
      PipelineConfig cfg;
      if (!pl_config.empty()) parse_config(cfg, read_file(pl_config), pl_config);
      if (!pl_mode.empty()) apply_mode(cfg, pl_mode);
      const auto take = [](CLI::Option* o, auto& dst, const auto& src) {
        if (o->count() > 0) dst = src;
      };
      take(o_size, cfg.stage1_size, flags.stage1_size);
      take(o_overlap, cfg.stage1_overlap, flags.stage1_overlap);
      take(o_factor, cfg.factor, flags.factor);
      take(o_size2, cfg.stage2_size, flags.stage2_size);
      take(o_overlap2, cfg.stage2_overlap, flags.stage2_overlap);
      take(o_dthr, cfg.dedup.threshold, flags.dedup.threshold);
      take(o_iou, cfg.eval_iou, flags.eval_iou);
      take(o_seed, cfg.seed, flags.seed);
      take(o_miss, cfg.mock.miss_probability, flags.mock.miss_probability);
      take(o_mas, cfg.mock.miss_area_scale, flags.mock.miss_area_scale);
      take(o_jit, cfg.mock.localization_jitter, flags.mock.localization_jitter);
      take(o_fpr, cfg.mock.false_positive_rate, flags.mock.false_positive_rate);
      if (!pl_engine.empty()) set_config_value(cfg, "engine", pl_engine);
      if (!pl_command.empty()) cfg.upscale_command = pl_command;
      if (!pl_detector.empty()) set_config_value(cfg, "detector", pl_detector);
      if (!pl_det_command.empty()) cfg.detector_command = pl_det_command;
      if (!pl_metric.empty()) set_config_value(cfg, "dedup_metric", pl_metric);
      if (!pl_sweep.empty()) set_config_value(cfg, "sweep", pl_sweep);
      cfg.jobs = jobs;

      std::vector<SceneInput> inputs;
      if (pl_synth > 0) {
        if (!pl_scenes.empty()) throw Error("use either --scene or --synth");
        for (auto& s : make_synth_suite(pl_synth_spec, pl_synth, cfg.seed))
          inputs.push_back(SceneInput{s.scene_id, std::move(s.image),
                                      apply_class_map(s.truths, ClassMap::xview_default())});
      } else {
        if (pl_scenes.empty()) throw Error("pipeline needs --scene files or --synth N");
        std::map<std::string, std::vector<LabeledObject>> truths;
        if (!pl_truth.empty()) truths = load_truths(pl_truth, load_class_map(pl_map));
        else if (cfg.detector == DetectorKind::mock) throw Error("the mock detector needs --truth");
        for (const auto& path : pl_scenes) {
          const std::string id = fs::path(path).stem().string();
          PixelGrid img = read_png(path);
          auto clipped = clip_to_scene(truths[id], img.width(), img.height());
          inputs.push_back(SceneInput{id, std::move(img), std::move(clipped)});
        }
      }
      const auto result = run_pipeline(inputs, cfg, fs::path(pl_out));
      std::cout << "mode " << cfg.mode << ": " << inputs.size() << " scenes\n";
      for (const auto& cc : result.report.classes)
        std::cout << class_name(cc.cls) << " AP " << fixed4(cc.ap) << "\n";
      std::cout << "run log: " << (fs::path(pl_out) / "run.json").string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
