#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pixelrl/metrics.hpp"

using namespace pixelrl;

namespace {

Perturbation perturbation_of(int c, int h, int w,
                             const std::vector<std::tuple<int, int, int>>& keys) {
  Perturbation d;
  d.channels = c;
  d.height = h;
  d.width = w;
  for (const auto& k : keys) d.entries[k] = 1.0;
  return d;
}

}  // namespace

TEST_CASE("l0 counts elements and pixels separately") {
  // 5 pixels touched on all 3 channels -> 15 elements, 5 pixels
  std::vector<std::tuple<int, int, int>> keys;
  for (int p = 0; p < 5; ++p) {
    for (int c = 0; c < 3; ++c) keys.push_back({c, p, p + 1});
  }
  Perturbation d = perturbation_of(3, 10, 10, keys);
  CHECK(l0_elements(d) == 15);
  CHECK(l0_pixels(d) == 5);
  CHECK(ata(d) == doctest::Approx(5.0 / 100.0).epsilon(1e-12));

  // overlapping channel entries at one pixel count once for l0_pixels
  Perturbation e = perturbation_of(3, 4, 4, {{0, 1, 1}, {2, 1, 1}});
  CHECK(l0_elements(e) == 2);
  CHECK(l0_pixels(e) == 1);
}

TEST_CASE("removal_rate") {
  CHECK(removal_rate({4, 2}, {1, 2}) ==
        doctest::Approx((3.0 / 4.0 + 0.0) / 2.0).epsilon(1e-12));
  // clamped at zero when objects appear
  CHECK(removal_rate({2}, {5}) == 0.0);
  CHECK_THROWS(removal_rate({0}, {0}));
  CHECK_THROWS(removal_rate({1, 1}, {0}));
}

TEST_CASE("mAP perfect predictions give 1.0") {
  DetectionFrame f;
  f.ground_truth = {{{0, 0, 10, 10}, 0}, {{20, 20, 30, 30}, 1}};
  f.detections = {{{0, 0, 10, 10}, 0, 0.9}, {{20, 20, 30, 30}, 1, 0.8}};
  CHECK(mean_average_precision({f}) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mAP with no detections is 0") {
  DetectionFrame f;
  f.ground_truth = {{{0, 0, 10, 10}, 0}};
  CHECK(mean_average_precision({f}) == 0.0);
}

TEST_CASE("mAP hand-computed mixed fixture") {
  // Image 1: class 0 GT A hit exactly (conf 0.9); class 1 GT B hit exactly
  // (conf 0.8). Image 2: class 0 GT C covered by a half-height detection
  // (conf 0.7) with IoU exactly 0.5 -> TP only at the 0.50 threshold.
  //
  // Class 1: AP = 1 at every threshold.
  // Class 0, threshold 0.50: both detections TP -> AP = 1.
  // Class 0, thresholds 0.55..0.95: ranked [0.9 TP, 0.7 FP], recall caps at
  // 0.5 with precision 1, so the 101-point AP = 51/101.
  // mAP = (1 + (1 + 9*51/101)/10) / 2 = 157/202.
  DetectionFrame f1;
  f1.ground_truth = {{{0, 0, 10, 10}, 0}, {{20, 20, 30, 30}, 1}};
  f1.detections = {{{0, 0, 10, 10}, 0, 0.9}, {{20, 20, 30, 30}, 1, 0.8}};
  DetectionFrame f2;
  f2.ground_truth = {{{0, 0, 10, 10}, 0}};
  f2.detections = {{{0, 0, 10, 5}, 0, 0.7}};
  CHECK(mean_average_precision({f1, f2}) ==
        doctest::Approx(157.0 / 202.0).epsilon(1e-9));
}

TEST_CASE("mAP ignores detections for classes without ground truth") {
  DetectionFrame f;
  f.ground_truth = {{{0, 0, 10, 10}, 0}};
  f.detections = {{{0, 0, 10, 10}, 0, 0.9},
                  {{50, 50, 60, 60}, 7, 0.99}};  // spurious class, no GT
  CHECK(mean_average_precision({f}) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mAP invariant under frame order and detection shuffles") {
  DetectionFrame f1;
  f1.ground_truth = {{{0, 0, 10, 10}, 0}, {{5, 5, 15, 15}, 0}};
  f1.detections = {{{0, 0, 10, 10}, 0, 0.6},
                   {{5, 5, 15, 15}, 0, 0.7},
                   {{40, 40, 50, 50}, 0, 0.5}};
  DetectionFrame f2;
  f2.ground_truth = {{{0, 0, 8, 8}, 1}};
  f2.detections = {{{1, 0, 8, 8}, 1, 0.55}};
  double base = mean_average_precision({f1, f2});
  CHECK(mean_average_precision({f2, f1}) == doctest::Approx(base).epsilon(1e-12));
  std::reverse(f1.detections.begin(), f1.detections.end());
  CHECK(mean_average_precision({f1, f2}) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("campaign report serializes deterministically") {
  CampaignReport rep;
  rep.task = "classify";
  rep.attacked_images = 2;
  rep.skipped_images = 1;
  rep.success_rate = 0.5;
  rep.mean_queries = 123.5;
  ImageSummary a;
  a.name = "img_000";
  a.attacked = true;
  a.success = true;
  a.queries = 100;
  a.l0_elements = 6;
  a.l0_pixels = 2;
  a.ata = 0.01;
  rep.images.push_back(a);
  ImageSummary b;
  b.name = "img_001";
  b.skip_reason = "misclassified clean image";
  rep.images.push_back(b);

  std::string j1 = rep.to_json();
  std::string j2 = rep.to_json();
  CHECK(j1 == j2);
  CHECK(j1.find("img_000") != std::string::npos);
  CHECK(j1.find("misclassified clean image") != std::string::npos);

  std::string csv = rep.to_csv();
  CHECK(csv.find("img_000") != std::string::npos);
  // header + one row per image
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 3);
}
