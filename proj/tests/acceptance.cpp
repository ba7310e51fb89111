// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <boost/rational.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sattile/sattile.hpp"
#include "support.hpp"

#if !defined(FAKE_UPSCALER) || !defined(FAKE_DETECTOR)
#error "stub paths missing"
#endif

using namespace sattile;
namespace ts = testing_support;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome& o;
  void operator()(bool ok, const std::string& what) {
    if (!ok && o.pass) o.detail = what;
    o.pass = o.pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// 1 -------------------------------------------------------------------------

Outcome tiling_geometry() {
  Outcome o;
  Check check{o};
  const auto t0 = Clock::now();
  check(plan_tiles(4000, 3000, 208, 50, {"s"}).size() == 475, "4000x3000 does not give 475 tiles");
  const auto ps = plan_tiles(832, 832, 416, 50, {"s"});
  std::set<int> xs, ys;
  for (const auto& p : ps) {
    xs.insert(p.offset_x);
    ys.insert(p.offset_y);
  }
  check(ps.size() == 9, "832x832 does not give 9 tiles");
  check(xs == std::set<int>{0, 366, 416} && ys == xs, "832x832 positions differ from {0, 366, 416}");
  const auto up = nn_upscale(PixelGrid(208, 208), 4);
  check(up.width() == 832 && up.height() == 832, "x4 upscale of 208x208 is not 832x832");
  const double dt = seconds_since(t0);
  check(dt < 1.0, "took longer than 1 s");
  o.detail = o.pass ? "475 tiles; 9 tiles at {0,366,416}; 832x832 (" + std::to_string(dt) + " s)" : o.detail;
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome coverage() {
  Outcome o;
  Check check{o};
  const auto t0 = Clock::now();
  std::mt19937_64 g(2024);
  std::uniform_int_distribution<int> dim(1, 900), tile(2, 300);
  long violations = 0;
  for (int cfg = 0; cfg < 1000; ++cfg) {
    const int w = dim(g), h = dim(g), t = tile(g);
    const int ov = std::uniform_int_distribution<int>(0, t - 1)(g);
    const auto ps = plan_tiles(w, h, t, ov, {"s"});
    // Coverage count via a 2-D difference array.
    std::vector<int> acc(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    const auto at = [&](int x, int y) -> int& { return acc[static_cast<std::size_t>(y) * (w + 1) + x]; };
    for (const auto& p : ps) {
      if (p.offset_x < 0 || p.offset_y < 0 || p.offset_x + p.tile_w > w || p.offset_y + p.tile_h > h) {
        ++violations;
        continue;
      }
      at(p.offset_x, p.offset_y) += 1;
      at(p.offset_x + p.tile_w, p.offset_y) -= 1;
      at(p.offset_x, p.offset_y + p.tile_h) -= 1;
      at(p.offset_x + p.tile_w, p.offset_y + p.tile_h) += 1;
    }
    for (int y = 0; y <= h; ++y)
      for (int x = 0; x <= w; ++x) {
        int v = at(x, y);
        if (x > 0) v += at(x - 1, y);
        if (y > 0) v += at(x, y - 1);
        if (x > 0 && y > 0) v -= at(x - 1, y - 1);
        at(x, y) = v;
      }
    // Expected overlap bands, from independently enumerated axis positions.
    const auto bands = [&](int dimv) {
      std::vector<char> in_band(static_cast<std::size_t>(dimv), 0);
      const auto pos = ts::reference_positions(dimv, t, ov);
      for (std::size_t i = 0; i + 1 < pos.size(); ++i)
        for (int x = pos[i + 1]; x < pos[i] + t; ++x) in_band[static_cast<std::size_t>(x)] = 1;
      return in_band;
    };
    const auto bx = bands(w), by = bands(h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int c = at(x, y);
        if (c < 1) ++violations;
        if ((bx[static_cast<std::size_t>(x)] || by[static_cast<std::size_t>(y)]) && c < 2) ++violations;
      }
  }
  const double dt = seconds_since(t0);
  check(violations == 0, std::to_string(violations) + " coverage violations");
  check(dt < 30.0, "took longer than 30 s");
  if (o.pass) o.detail = "1000 configurations, 0 violations (" + std::to_string(dt) + " s)";
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome nn_exactness() {
  Outcome o;
  Check check{o};
  std::mt19937_64 g(3);
  std::uniform_int_distribution<int> side(1, 40);
  long mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const auto src = ts::random_grid(g, side(g), side(g));
    for (int s : {2, 3, 4}) {
      const auto up = nn_upscale(src, s);
      if (up.width() != src.width() * s || up.height() != src.height() * s) {
        ++mismatches;
        continue;
      }
      for (int y = 0; y < up.height(); ++y)
        for (int x = 0; x < up.width(); ++x)
          for (int c = 0; c < 3; ++c)
            mismatches += up.data()[up.offset(x, y) + c] != src.data()[src.offset(x / s, y / s) + c];
    }
    if (!(nn_upscale(nn_upscale(src, 2), 2) == nn_upscale(src, 4))) ++mismatches;
  }
  check(mismatches == 0, std::to_string(mismatches) + " mismatches");
  if (o.pass) o.detail = "100 grids x {2,3,4} pixel-exact; nn(nn(g,2),2) == nn(g,4)";
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome rational_round_trip() {
  using Q = boost::rational<std::int64_t>;
  Outcome o;
  Check check{o};
  std::mt19937_64 g(4);
  std::uniform_int_distribution<int> off(0, 4000), f(1, 6), num(-100000, 100000), den(1, 97), len(1, 5000);
  long failures = 0;
  for (int i = 0; i < 10000; ++i) {
    const int scale = f(g);
    const std::vector<TilePlacement> chain{{"a", "s", off(g), off(g), 208, 208, 1, std::nullopt},
                                           {"b", "s", off(g), off(g), 416, 416, scale, std::string("a")}};
    const Q x0(num(g), den(g)), y0(num(g), den(g));
    const BasicBox<Q> b(x0, y0, x0 + Q(len(g), den(g)), y0 + Q(len(g), den(g)));
    const std::span<const TilePlacement> c(chain);
    if (scene_to_tile(tile_to_scene(b, c), c) != b) ++failures;
    if (tile_to_scene(scene_to_tile(b, c), c) != b) ++failures;
  }
  check(failures == 0, std::to_string(failures) + " round-trip failures");
  if (o.pass) o.detail = "10000 boxes through 2-stage chains, exact";
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome dedup_oracle() {
  Outcome o;
  Check check{o};
  std::mt19937_64 g(5);
  long mismatches = 0, top_lost = 0, pair_violations = 0;
  for (int inst = 0; inst < 500; ++inst) {
    const int n = std::uniform_int_distribution<int>(1, 200)(g);
    const int centres = std::uniform_int_distribution<int>(1, 12)(g);
    std::uniform_int_distribution<int> c(0, 400), jitter(-6, 6), l(3, 30), cls(0, 2), conf(1, 50);
    std::vector<std::pair<int, int>> ctr;
    for (int k = 0; k < centres; ++k) ctr.emplace_back(c(g), c(g));
    SceneDetections sd{"s", {}, {}};
    for (int i = 0; i < n; ++i) {
      const auto [cx, cy] = ctr[static_cast<std::size_t>(i % centres)];
      const int x = cx + jitter(g), y = cy + jitter(g);
      sd.detections.push_back(
          {static_cast<MergedClass>(cls(g)), conf(g) / 50.0, Box(x, y, x + l(g), y + l(g)), "t" + std::to_string(i % 4)});
    }
    auto got = dedup_ioa(sd, 0.75).detections;
    auto want = ts::reference_dedup(sd.detections, 0.75);
    std::sort(got.begin(), got.end(), ts::ref_before);
    std::sort(want.begin(), want.end(), ts::ref_before);
    if (got != want) ++mismatches;
    const auto best = *std::min_element(sd.detections.begin(), sd.detections.end(), ts::ref_before);
    if (std::find(got.begin(), got.end(), best) == got.end()) ++top_lost;
    for (std::size_t i = 0; i < got.size(); ++i)
      for (std::size_t j = i + 1; j < got.size(); ++j)
        if (got[i].cls == got[j].cls && ts::ref_ioa(got[i].box, got[j].box) > 0.75) ++pair_violations;
  }
  check(mismatches == 0, std::to_string(mismatches) + " instances differ from the reference");
  check(top_lost == 0, "highest-confidence box dropped " + std::to_string(top_lost) + " times");
  check(pair_violations == 0, std::to_string(pair_violations) + " surviving pairs above IOA 0.75");
  if (o.pass) o.detail = "500 instances equal to reference; top box kept; no pair above 0.75";
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome ap_oracle() {
  Outcome o;
  Check check{o};
  std::mt19937_64 g(6);
  const auto thresholds = default_sweep();
  double worst = 0.0;
  for (int inst = 0; inst < 500; ++inst) {
    const int nd = std::uniform_int_distribution<int>(0, 20)(g);
    const int nt = std::uniform_int_distribution<int>(0, 10)(g);
    std::uniform_int_distribution<int> c(0, 60), l(4, 16), d(-4, 4), conf(1, 1000), pick(0, 3);
    std::vector<LabeledObject> truths;
    for (int i = 0; i < nt; ++i) {
      const int x = c(g), y = c(g);
      truths.push_back(ts::merged_object("s", MergedClass::vehicle, Box(x, y, x + l(g), y + l(g))));
    }
    std::vector<Detection> dets;
    for (int i = 0; i < nd; ++i) {
      Box b;
      if (nt > 0 && pick(g) != 0) {
        const auto& t = truths[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, nt - 1)(g))].box;
        const double x0 = t.xmin + d(g), y0 = t.ymin + d(g);
        b = Box(x0, y0, std::max(x0 + 1, t.xmax + d(g)), std::max(y0 + 1, t.ymax + d(g)));
      } else {
        const int x = c(g), y = c(g);
        b = Box(x, y, x + l(g), y + l(g));
      }
      // Coarse confidences so ties and exact threshold hits occur.
      const int k = pick(g) == 0 ? std::uniform_int_distribution<int>(1, 9)(g) * 100 : conf(g);
      dets.push_back({MergedClass::vehicle, k / 1000.0, b, ""});
    }
    const double got = average_precision(sweep_pr(dets, truths, thresholds));
    const auto want = ts::reference_ap(dets, truths, thresholds);
    worst = std::max(worst, std::abs(got - boost::rational_cast<double>(want)));
  }
  check(worst <= 1e-9, "max |delta| " + std::to_string(worst));

  // Perfect detector, end to end through the x4 two-stage pipeline.
  SynthSpec s;
  s.scene_w = 700;
  s.scene_h = 600;
  s.n_clusters = 2;
  s.n_scattered = 40;
  s.cluster_gap = 1;
  s.seed = 66;
  auto sc = generate_scene(s);
  PipelineConfig cfg;
  apply_mode(cfg, "2stage-nn4");
  const auto r = run_pipeline({SceneInput{"e2e", std::move(sc.image), apply_class_map(sc.truths, ClassMap::xview_default())}},
                              cfg);
  const double ap = r.report.ap(MergedClass::vehicle);
  check(ap == 1.0, "perfect end-to-end AP is " + format_real(ap, 6));
  if (o.pass) {
    std::ostringstream os;
    os << "500 instances, max |delta| " << worst << "; perfect end-to-end AP = 1.0 exactly";
    o.detail = os.str();
  }
  return o;
}

// Shared synthetic suite for 7 and 8.
std::vector<SceneInput> dense_suite(std::uint64_t seed, int n) {
  std::vector<SceneInput> out;
  for (int i = 0; i < n; ++i) {
    SynthSpec s;
    s.scene_id = "dense_" + std::to_string(i);
    s.scene_w = 640;
    s.scene_h = 640;
    s.n_clusters = 4;
    s.cluster_rows = 6;
    s.cluster_cols = 6;
    s.cluster_gap = 1;
    s.n_scattered = 40;
    s.seed = mix64(seed + static_cast<std::uint64_t>(i));
    auto sc = generate_scene(s);
    out.push_back(SceneInput{s.scene_id, std::move(sc.image), apply_class_map(sc.truths, ClassMap::xview_default())});
  }
  return out;
}

// 7 -------------------------------------------------------------------------

struct RescueNumbers {
  double tile_recall = 0.0;
  double stitched_recall = 0.0;
};

RescueNumbers rescue_run(const std::vector<SceneInput>& suite, unsigned jobs) {
  PipelineConfig cfg;
  apply_mode(cfg, "2stage-nn4");
  cfg.mock.miss_probability = 0.3;
  cfg.seed = 7;
  cfg.jobs = jobs;
  const auto r = run_pipeline(suite, cfg);

  double sum = 0.0;
  std::size_t tiles = 0;
  for (const auto& sr : r.scenes)
    for (const auto& leaf : sr.leaves) {
      std::vector<LabeledObject> full;
      for (const auto& l : leaf.labels)
        if (l.visible_fraction == 1.0) full.push_back(l);
      if (full.empty()) continue;
      std::vector<Detection> confident;
      for (const auto& d : leaf.detections)
        if (d.confidence >= 0.5) confident.push_back(d);
      sum += static_cast<double>(match(confident, full, 0.5).tp) / static_cast<double>(full.size());
      ++tiles;
    }
  const auto* cc = r.report.find(MergedClass::vehicle);
  double stitched = 0.0;
  for (const auto& p : cc->points)
    if (p.threshold == 0.5) stitched = p.recall();
  return {sum / static_cast<double>(tiles), stitched};
}

Outcome overlap_rescue() {
  Outcome o;
  Check check{o};
  const auto t0 = Clock::now();
  const auto suite = dense_suite(700, 20);
  const auto a = rescue_run(suite, 4);
  const auto b = rescue_run(suite, 1);
  const double dt = seconds_since(t0);
  const double gain = (a.stitched_recall - a.tile_recall) * 100.0;
  check(a.tile_recall == b.tile_recall && a.stitched_recall == b.stitched_recall, "not deterministic");
  check(gain >= 5.0, "gain only " + std::to_string(gain) + " pp");
  check(dt < 120.0, "took longer than 2 min");
  char buf[200];
  std::snprintf(buf, sizeof(buf), "mean tile recall %.4f, stitched recall %.4f, +%.2f pp (%.1f s)", a.tile_recall,
                a.stitched_recall, gain, dt);
  if (o.pass) o.detail = buf;
  else o.detail += std::string("; ") + buf;
  return o;
}

// 8 -------------------------------------------------------------------------

Outcome upscale_helps() {
  Outcome o;
  Check check{o};
  const auto suite = dense_suite(800, 10);
  const auto run_mode = [&](const std::string& m) {
    PipelineConfig cfg;
    apply_mode(cfg, m);
    cfg.mock.miss_probability = 0.9;
    cfg.mock.miss_area_scale = 300.0;
    cfg.mock.localization_jitter = 1.0;
    cfg.mock.false_positive_rate = 0.2;
    cfg.seed = 8;
    cfg.jobs = 4;
    return run_pipeline(suite, cfg).report.ap(MergedClass::vehicle);
  };
  const double one = run_mode("1stage"), two = run_mode("2stage-nn4");
  check(two > one, "2stage-nn4 AP not above 1stage AP");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "1stage AP %.4f < 2stage-nn4 AP %.4f", one, two);
  o.detail = o.pass ? buf : o.detail + "; " + buf;
  return o;
}

// 9 -------------------------------------------------------------------------

Outcome protocol_round_trips() {
  Outcome o;
  Check check{o};
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> p(0, 800), l(0.5, 80), c(1e-9, 1.0);
  std::vector<Detection> dets;
  for (int i = 0; i < 300; ++i) {
    const double x = p(g), y = p(g);
    dets.push_back({static_cast<MergedClass>(i % 3), c(g), Box(x, y, x + l(g), y + l(g)), "t"});
  }
  const auto dtext = format_detections(dets);
  check(format_detections(parse_detections(dtext, "d", "t")) == dtext, "detection file not byte-identical");

  SceneManifest m{"rt", 900, 700, 30.0, plan_tiles(900, 700, 208, 50, {"rt"})};
  for (const char* parent : {"t0000", "t0007"}) {
    const auto kids = plan_tiles(832, 832, 416, 50, {"rt", std::string(parent) + "_", std::string(parent), 4});
    m.placements.insert(m.placements.end(), kids.begin(), kids.end());
  }
  const auto mtext = manifest_to_string(m);
  check(manifest_to_string(manifest_from_string(mtext)) == mtext, "manifest not byte-identical");

  std::vector<LabeledObject> objs;
  for (int i = 0; i < 100; ++i) {
    LabeledObject ob;
    ob.scene_id = "scene_" + std::to_string(i % 3);
    ob.class_id = 17 + i % 5;
    const double x = std::floor(p(g)), y = p(g);
    ob.box = Box(x, y, x + 13, y + l(g));
    objs.push_back(ob);
  }
  const auto gtext = labels_to_geojson(objs);
  check(labels_to_geojson(parse_labels_text(gtext).objects) == gtext, "GeoJSON not byte-identical");

  ts::ScratchDir dir("accept9");
  std::vector<PixelGrid> tiles{ts::random_grid(g, 208, 208), ts::random_grid(g, 208, 208)};
  const auto up = external_upscale(tiles, 4, dir / "ok", std::string(FAKE_UPSCALER) + " nn");
  check(up.size() == 2 && up[0].width() == 832 && up[1].height() == 832, "upscaler stub output has wrong size");
  bool mismatch = false;
  try {
    external_upscale(tiles, 4, dir / "bad", std::string(FAKE_UPSCALER) + " wrong-size");
  } catch (const UpscaleError& e) {
    mismatch = e.faults().size() == 2 && e.faults()[0].reason.find("dimension mismatch") != std::string::npos;
  }
  check(mismatch, "wrong-size upscaler output not rejected");

  const fs::path td = dir / "tiles";
  fs::create_directories(td);
  write_png((td / "t0000.png").string(), PixelGrid(8, 8));
  const auto found = run_external_detector(td, std::string(FAKE_DETECTOR) + " one");
  check(found.size() == 1 && found[0].confidence == 0.9 && found[0].box == Box(10, 10, 62, 38),
        "detector stub line not parsed");
  bool rejected = false;
  try {
    run_external_detector(td, std::string(FAKE_DETECTOR) + " bad-conf");
  } catch (const ParseError& e) {
    rejected = e.line() == 2;
  }
  check(rejected, "confidence 1.5 not rejected with its line number");
  if (o.pass) o.detail = "detections, manifest, GeoJSON byte-identical; upscaler and detector stubs validated";
  return o;
}

// 10 ------------------------------------------------------------------------

Outcome class_map_and_split() {
  Outcome o;
  Check check{o};
  const auto& m = ClassMap::xview_default();
  check(m.count(MergedClass::vehicle) == 22, "vehicle count " + std::to_string(m.count(MergedClass::vehicle)));
  check(m.count(MergedClass::airplane) == 3, "airplane count " + std::to_string(m.count(MergedClass::airplane)));
  std::vector<std::string> ids;
  for (int i = 0; i < 846; ++i) ids.push_back(std::to_string(100 + i));
  const auto a = split_scenes(ids, 0.8, 123), b = split_scenes(ids, 0.8, 123);
  check(a.train.size() == 676 && a.val.size() == 170, "split sizes differ from 676/170");
  check(a.train == b.train && a.val == b.val, "same seed gave a different partition");
  if (o.pass) o.detail = "22 vehicle, 3 airplane; 676/170; reproducible";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"tiling geometry", tiling_geometry},
      {"coverage property", coverage},
      {"nn upscale exactness", nn_exactness},
      {"coordinate round trip", rational_round_trip},
      {"ioa dedup oracle", dedup_oracle},
      {"ap oracle", ap_oracle},
      {"overlap rescue", overlap_rescue},
      {"upscale helps", upscale_helps},
      {"protocol round trips", protocol_round_trips},
      {"class map and split", class_map_and_split},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
