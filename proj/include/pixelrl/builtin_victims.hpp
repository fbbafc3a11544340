#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pixelrl/victim.hpp"
#include "pixelrl/weights.hpp"

namespace pixelrl {

// Linear logits + softmax. logits = W * flatten(x) + b with W of shape
// (classes, C*H*W). Zero weights give the uniform distribution.
class LinearSoftmaxVictim : public Victim {
 public:
  LinearSoftmaxVictim(int channels, int height, int width,
                      std::vector<std::vector<double>> weights,
                      std::vector<double> bias);

  VictimTask task() const override { return VictimTask::classify; }
  ClassifierOutput classify(const Image& x) const override;

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }

 private:
  int channels_, height_, width_;
  std::vector<std::vector<double>> weights_;  // [class][element]
  std::vector<double> bias_;
};

// conv(3x3, stride 1, pad 1) -> relu -> 2x2 average pool -> dense -> softmax,
// with all weights loaded from a weights file.
//
// Weights file tensor order:
//   meta    [4]                      = {C, H, W, classes} (as floats)
//   conv_w  [filters, C, 3, 3]
//   conv_b  [filters]
//   fc_w    [classes, filters*(H/2)*(W/2)]
//   fc_b    [classes]
class TinyCnnVictim : public Victim {
 public:
  explicit TinyCnnVictim(const std::string& weights_path);

  VictimTask task() const override { return VictimTask::classify; }
  ClassifierOutput classify(const Image& x) const override;

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int classes() const { return classes_; }

 private:
  int channels_, height_, width_, classes_, filters_;
  Tensor conv_w_, conv_b_, fc_w_, fc_b_;
};

// Deterministic detector over a fixed grid: one candidate per cell with
// box = cell bounds, class_id = 0, and confidence a smooth (sigmoid)
// function of the cell's mean brightness. Pixel attacks can therefore
// drive individual cells below the 0.5 detection threshold.
class GridDetectorVictim : public Victim {
 public:
  GridDetectorVictim(int cell_size, double channel_threshold,
                     double steepness = 30.0);

  VictimTask task() const override { return VictimTask::detect; }
  DetectorOutput detect(const Image& x) const override;

  int cell_size() const { return cell_size_; }
  double threshold() const { return threshold_; }
  double steepness() const { return steepness_; }

 private:
  int cell_size_;
  double threshold_;
  double steepness_;
};

std::vector<double> softmax(const std::vector<double>& logits);

}  // namespace pixelrl
