#pragma once

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

namespace pixelrl {

// Dense C x H x W brightness tensor with every element in [0,1].
// Immutable by convention once built; attack code always produces new images.
class Image {
 public:
  Image(int channels, int height, int width, double fill = 0.0);
  static Image from_data(int channels, int height, int width,
                         std::vector<double> data);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }

  double at(int c, int r, int col) const {
    return data_[(static_cast<std::size_t>(c) * height_ + r) * width_ + col];
  }
  void set(int c, int r, int col, double v);

  const std::vector<double>& data() const { return data_; }
  std::size_t size() const { return data_.size(); }

  bool same_shape(const Image& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }
  bool operator==(const Image& other) const {
    return same_shape(other) && data_ == other.data_;
  }

 private:
  int channels_;
  int height_;
  int width_;
  std::vector<double> data_;
};

// One pixel action: overwrite all channel values at (row, col).
// Every entry of `values` is exactly 0.0 (Erase) or 1.0 (Write).
struct PixelAction {
  int row = 0;
  int col = 0;
  std::vector<double> values;
};

using ActionSet = std::vector<PixelAction>;

// Sparse delta: (channel,row,col) -> new brightness value, plus the
// dimensions of the clean image it applies to.
struct Perturbation {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::map<std::tuple<int, int, int>, double> entries;

  bool empty() const { return entries.empty(); }
};

// Sequentially overwrites the C channel values at each action's pixel;
// when two actions share coordinates the later one wins.
Image apply_actions(const Image& x, const ActionSet& actions);

// Support of xbar - x: entries exactly where the two images differ,
// holding xbar's value. Throws std::invalid_argument on shape mismatch.
Perturbation diff_perturbation(const Image& x, const Image& xbar);

// Applies a perturbation on top of a clean image.
Image apply_perturbation(const Image& x, const Perturbation& delta);

}  // namespace pixelrl
