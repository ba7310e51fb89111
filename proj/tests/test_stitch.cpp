#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sattile/stitch.hpp"
#include "support.hpp"

using namespace sattile;

namespace {

SceneManifest two_stage_manifest() {
  SceneManifest m{"s", 600, 400, 30.0, {}};
  m.placements.push_back({"t0", "s", 158, 0, 208, 208, 1, std::nullopt});
  m.placements.push_back({"t0_0", "s", 0, 0, 416, 416, 4, std::string("t0")});
  m.placements.push_back({"t1", "s", 392, 192, 208, 208, 1, std::nullopt});
  m.placements.push_back({"t2", "s", 0, 0, 208, 208, 1, std::nullopt});
  return m;
}

Detection det(double conf, Box b, MergedClass c = MergedClass::vehicle, std::string tile = "t") {
  return Detection{c, conf, b, std::move(tile)};
}

std::vector<Detection> sorted_copy(std::vector<Detection> v) {
  std::sort(v.begin(), v.end(), ranks_before);
  return v;
}

}  // namespace

TEST(Localize, ChainArithmetic) {
  const auto sd = localize(std::vector<Detection>{det(0.7, Box(0, 0, 416, 416), MergedClass::vehicle, "t0_0")},
                           two_stage_manifest());
  ASSERT_EQ(sd.detections.size(), 1u);
  EXPECT_EQ(sd.detections[0].box, Box(158, 0, 262, 104));
  EXPECT_EQ(sd.detections[0].confidence, 0.7);
  EXPECT_EQ(sd.provenance[0], (std::vector<std::string>{"t0", "t0_0"}));
}

TEST(Localize, SingleStageIsTranslation) {
  const auto sd = localize(std::vector<Detection>{det(0.5, Box(1, 2, 3, 4), MergedClass::vehicle, "t1")},
                           two_stage_manifest());
  EXPECT_EQ(sd.detections[0].box, Box(393, 194, 395, 196));
}

TEST(Localize, ClipsFlushToSceneEdge) {
  // Ends 8 px past the right edge (600) after mapping.
  const auto sd = localize(std::vector<Detection>{det(0.5, Box(190, 10, 216, 20), MergedClass::vehicle, "t1")},
                           two_stage_manifest());
  EXPECT_EQ(sd.detections[0].box, Box(582, 202, 600, 212));
}

TEST(Localize, UnknownTileIsAnError) {
  EXPECT_THROW(localize(std::vector<Detection>{det(0.5, Box(0, 0, 1, 1), MergedClass::vehicle, "zz")},
                        two_stage_manifest()),
               Error);
}

TEST(Dedup, IdenticalBoxesKeepTheStronger) {
  SceneDetections sd{"s", {det(0.8, Box(0, 0, 10, 10)), det(0.9, Box(0, 0, 10, 10))}, {}};
  const auto out = dedup_ioa(sd, 0.75);
  ASSERT_EQ(out.detections.size(), 1u);
  EXPECT_EQ(out.detections[0].confidence, 0.9);
}

TEST(Dedup, QuarterOverlapSurvives) {
  SceneDetections sd{"s", {det(0.3, Box(0, 0, 10, 10)), det(0.9, Box(5, 5, 15, 15))}, {}};
  EXPECT_EQ(dedup_ioa(sd, 0.75).detections.size(), 2u);
}

TEST(Dedup, ContainedStrongBoxRemovesTheBigOne) {
  SceneDetections sd{"s", {det(0.6, Box(0, 0, 100, 100)), det(0.95, Box(10, 10, 20, 20))}, {}};
  const auto out = dedup_ioa(sd, 0.75);
  ASSERT_EQ(out.detections.size(), 1u);
  EXPECT_EQ(out.detections[0].box, Box(10, 10, 20, 20));
}

TEST(Dedup, PerClassByDefaultAgnosticOnRequest) {
  SceneDetections sd{"s", {det(0.9, Box(0, 0, 10, 10)), det(0.8, Box(0, 0, 10, 10), MergedClass::helicopter)}, {}};
  EXPECT_EQ(dedup(sd).detections.size(), 2u);
  DedupOptions o;
  o.class_agnostic = true;
  EXPECT_EQ(dedup(sd, o).detections.size(), 1u);
}

TEST(Dedup, IouModeIsLessAggressiveOnContainment) {
  SceneDetections sd{"s", {det(0.6, Box(0, 0, 100, 100)), det(0.95, Box(10, 10, 20, 20))}, {}};
  DedupOptions o;
  o.metric = OverlapMetric::iou;
  EXPECT_EQ(dedup(sd, o).detections.size(), 2u);
}

TEST(Dedup, ThresholdIsExclusive) {
  // IOA exactly 0.75 is not above the threshold.
  SceneDetections sd{"s", {det(0.9, Box(0, 0, 4, 1)), det(0.8, Box(1, 0, 5, 1))}, {}};
  EXPECT_EQ(dedup_ioa(sd, 0.75).detections.size(), 2u);
  EXPECT_EQ(dedup_ioa(sd, 0.74).detections.size(), 1u);
}

TEST(Dedup, RejectsBadThreshold) {
  EXPECT_THROW(dedup_ioa(SceneDetections{}, 0.0), std::invalid_argument);
  EXPECT_THROW(dedup_ioa(SceneDetections{}, 1.5), std::invalid_argument);
}

TEST(DedupProperty, SubsetPairwiseTopAndOrderInsensitive) {
  std::mt19937_64 g(17);
  std::uniform_int_distribution<int> c(0, 60), l(2, 20), cl(0, 2), conf(1, 40);
  for (int inst = 0; inst < 200; ++inst) {
    SceneDetections sd{"s", {}, {}};
    const int n = 1 + inst % 60;
    for (int i = 0; i < n; ++i) {
      const int x = c(g), y = c(g);
      sd.detections.push_back(det(conf(g) / 40.0, Box(x, y, x + l(g), y + l(g)), static_cast<MergedClass>(cl(g))));
    }
    const auto out = dedup_ioa(sd, 0.75);
    for (const auto& k : out.detections)
      EXPECT_NE(std::find(sd.detections.begin(), sd.detections.end(), k), sd.detections.end());
    for (std::size_t i = 0; i < out.detections.size(); ++i)
      for (std::size_t j = i + 1; j < out.detections.size(); ++j)
        if (out.detections[i].cls == out.detections[j].cls) {
          EXPECT_LE(ioa(out.detections[i].box, out.detections[j].box), 0.75);
        }
    EXPECT_EQ(out.detections.front(), sorted_copy(sd.detections).front());

    auto shuffled = sd;
    std::shuffle(shuffled.detections.begin(), shuffled.detections.end(), g);
    EXPECT_EQ(sorted_copy(dedup_ioa(shuffled, 0.75).detections), sorted_copy(out.detections));
    EXPECT_EQ(sorted_copy(out.detections), sorted_copy(testing_support::reference_dedup(sd.detections, 0.75)));
  }
}

TEST(SceneDetectionsText, SortedByConfidence) {
  SceneDetections sd{"s", {det(0.2, Box(0, 0, 1, 1)), det(0.9, Box(0, 0, 2, 2))}, {}};
  EXPECT_EQ(format_scene_detections(sd), "0 0.9000 0.0000 0.0000 2.0000 2.0000\n0 0.2000 0.0000 0.0000 1.0000 1.0000\n");
}
