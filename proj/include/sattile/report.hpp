#pragma once

// Evaluation artifacts: a CSV PR table, per-class SVG curves, overlay plots
// comparing several runs, and a JSON summary.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "eval.hpp"
#include "text.hpp"

namespace sattile {

inline std::string pr_table_csv(const EvalReport& r) {
  std::string s = "class,threshold,tp,fp,fn,precision,recall\n";
  for (const auto& cc : r.classes) {
    for (const auto& p : cc.points) {
      s += std::string(class_name(cc.cls)) + "," + format_real(p.threshold, 2) + "," + std::to_string(p.tp) + "," +
           std::to_string(p.fp) + "," + std::to_string(p.fn) + "," + format_real(p.precision(), 6) + "," +
           format_real(p.recall(), 6) + "\n";
    }
  }
  return s;
}

inline nlohmann::ordered_json report_summary(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["iou_threshold"] = r.iou_threshold;
  j["n_scenes"] = r.n_scenes;
  j["n_truths"] = r.n_truths;
  j["n_detections"] = r.n_detections;
  auto& arr = j["classes"] = nlohmann::ordered_json::array();
  for (const auto& cc : r.classes) {
    nlohmann::ordered_json c;
    c["class"] = class_name(cc.cls);
    c["ap"] = cc.ap;
    c["n_truths"] = cc.n_truths;
    c["n_detections"] = cc.n_detections;
    c["n_points"] = cc.points.size();
    if (cc.n_detections == 0) c["note"] = "no detections; AP is 0";
    arr.push_back(std::move(c));
  }
  return j;
}

inline std::string xml_escape(const std::string& in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct PlotSeries {
  std::string label;
  std::vector<PRPoint> points;
  double ap = 0.0;
};

/// Precision (y) against recall (x), one polyline per series.
inline std::string pr_curve_svg(const std::string& title, const std::vector<PlotSeries>& series) {
  constexpr int W = 520, H = 440, L = 60, R = 170, T = 40, B = 50;
  constexpr int PW = W - L - R, PH = H - T - B;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const auto px = [&](double r) { return L + r * PW; };
  const auto py = [&](double p) { return T + (1.0 - p) * PH; };
  char buf[256];
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  std::snprintf(buf, sizeof(buf), "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                W, H, W, H);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf), "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">", L);
  s += buf;
  s += xml_escape(title) + "</text>\n";
  std::snprintf(buf, sizeof(buf), "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" stroke=\"black\"/>\n", L,
                T, PW, PH);
  s += buf;
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%d\" x2=\"%.1f\" y2=\"%d\" stroke=\"#ddd\"/>"
                  "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">%.2f</text>\n",
                  px(v), T, px(v), T + PH, px(v), T + PH + 16, v);
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                  "<text x=\"%d\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">%.2f</text>\n",
                  L, py(v), L + PW, py(v), L - 6, py(v) + 4, v);
    s += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">recall</text>\n"
                "<text x=\"16\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 16 %.1f)\">precision</text>\n",
                px(0.5), H - 10, py(0.5), py(0.5));
  s += buf;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    auto pts = series[i].points;
    std::stable_sort(pts.begin(), pts.end(), [](const PRPoint& a, const PRPoint& b) {
      if (a.tp != b.tp) return a.tp < b.tp;
      return a.threshold > b.threshold;
    });
    std::string path;
    for (const auto& p : pts) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(p.recall()), py(p.precision()));
      path += buf;
    }
    std::snprintf(buf, sizeof(buf), "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" points=\"", color);
    s += buf;
    s += path + "\"/>\n";
    const int ly = T + 14 + static_cast<int>(i) * 20;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"%s\" stroke-width=\"2\"/>"
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"11\">",
                  L + PW + 10, ly, L + PW + 30, ly, color, L + PW + 36, ly + 4);
    s += buf;
    std::snprintf(buf, sizeof(buf), " (AP %.4f)</text>\n", series[i].ap);
    s += xml_escape(series[i].label) + buf;
  }
  s += "</svg>\n";
  return s;
}

/// Writes pr_table.csv, summary.json and pr_<class>.svg into `out_dir`.
inline void emit_report(const EvalReport& r, const std::filesystem::path& out_dir, const std::string& label = "run") {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
  write_file((out_dir / "pr_table.csv").string(), pr_table_csv(r));
  write_file((out_dir / "summary.json").string(), report_summary(r).dump(2) + "\n");
  for (const auto& cc : r.classes) {
    const std::string name(class_name(cc.cls));
    write_file((out_dir / ("pr_" + name + ".svg")).string(),
               pr_curve_svg(name + " PR curve", {PlotSeries{label, cc.points, cc.ap}}));
  }
}

/// One plot with a curve per labelled report, for comparing pipeline modes.
inline void emit_overlay(const std::vector<std::pair<std::string, EvalReport>>& runs, MergedClass cls,
                         const std::filesystem::path& path) {
  std::vector<PlotSeries> series;
  for (const auto& [label, rep] : runs) {
    const auto* cc = rep.find(cls);
    series.push_back(PlotSeries{label, cc ? cc->points : std::vector<PRPoint>{}, cc ? cc->ap : 0.0});
  }
  write_file(path.string(), pr_curve_svg(std::string(class_name(cls)) + " PR curves", series));
}

}  // namespace sattile
