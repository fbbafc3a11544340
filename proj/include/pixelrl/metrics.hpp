#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pixelrl/image.hpp"
#include "pixelrl/victim.hpp"

namespace pixelrl {

// Element-wise L0: entries differing from the clean image.
std::size_t l0_elements(const Perturbation& delta);

// Distinct (row, col) pixels in the support.
std::size_t l0_pixels(const Perturbation& delta);

// Attacked pixels as a fraction of H*W.
double ata(const Perturbation& delta);

struct GroundTruthBox {
  Box box;
  int class_id = 0;
};

// Per-image inputs for mAP.
struct DetectionFrame {
  std::vector<Detection> detections;
  std::vector<GroundTruthBox> ground_truth;
};

// COCO-style mean average precision: per class and per IoU threshold in
// {0.50, 0.55, ..., 0.95}, AP by 101-point precision-recall interpolation;
// averaged over classes with ground truth, then over thresholds.
double mean_average_precision(const std::vector<DetectionFrame>& frames);

// Mean over images of max(0, (n_clean - n_adv) / n_clean). Every clean
// count must be >= 1.
double removal_rate(const std::vector<int>& clean_counts,
                    const std::vector<int>& adv_counts);

struct ImageSummary {
  std::string name;
  bool attacked = false;   // false when the skip rule excluded it
  std::string skip_reason;
  bool success = false;
  std::uint64_t queries = 0;
  int cycles_used = 0;
  std::size_t l0_elements = 0;
  std::size_t l0_pixels = 0;
  double ata = 0.0;
  // detection only
  int clean_objects = 0;
  int adv_objects = 0;
};

struct CampaignReport {
  std::string task;
  std::vector<ImageSummary> images;
  int attacked_images = 0;
  int skipped_images = 0;
  double success_rate = 0.0;
  double mean_l0_elements = 0.0;
  double mean_l0_pixels = 0.0;
  double mean_queries = 0.0;
  double mean_ata = 0.0;
  // detection aggregates
  double rm = 0.0;
  double map_clean = 0.0;
  double map_adv = 0.0;
  double rd = 0.0;  // map_clean - map_adv

  std::string to_json() const;
  std::string to_csv() const;
};

}  // namespace pixelrl
