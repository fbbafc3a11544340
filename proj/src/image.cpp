#include "pixelrl/image.hpp"

#include <stdexcept>
#include <string>

namespace pixelrl {

namespace {
void check_dims(int c, int h, int w) {
  if (c < 1 || h < 1 || w < 1) {
    throw std::invalid_argument("Image dimensions must be positive, got " +
                                std::to_string(c) + "x" + std::to_string(h) +
                                "x" + std::to_string(w));
  }
}
void check_value(double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("brightness value " + std::to_string(v) +
                                " outside [0,1]");
  }
}
}  // namespace

Image::Image(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  check_dims(channels, height, width);
  check_value(fill);
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

Image Image::from_data(int channels, int height, int width,
                       std::vector<double> data) {
  check_dims(channels, height, width);
  if (data.size() != static_cast<std::size_t>(channels) * height * width) {
    throw std::invalid_argument("data length does not match C*H*W");
  }
  for (double v : data) check_value(v);
  Image img(channels, height, width);
  img.data_ = std::move(data);
  return img;
}

void Image::set(int c, int r, int col, double v) {
  check_value(v);
  data_[(static_cast<std::size_t>(c) * height_ + r) * width_ + col] = v;
}

Image apply_actions(const Image& x, const ActionSet& actions) {
  Image out = x;
  for (const PixelAction& a : actions) {
    if (a.row < 0 || a.row >= x.height() || a.col < 0 || a.col >= x.width()) {
      throw std::invalid_argument("action coordinate (" +
                                  std::to_string(a.row) + "," +
                                  std::to_string(a.col) + ") out of bounds");
    }
    if (static_cast<int>(a.values.size()) != x.channels()) {
      throw std::invalid_argument("action values length does not match C");
    }
    for (int c = 0; c < x.channels(); ++c) {
      out.set(c, a.row, a.col, a.values[c]);
    }
  }
  return out;
}

Perturbation diff_perturbation(const Image& x, const Image& xbar) {
  if (!x.same_shape(xbar)) {
    throw std::invalid_argument("diff_perturbation: shape mismatch");
  }
  Perturbation delta;
  delta.channels = x.channels();
  delta.height = x.height();
  delta.width = x.width();
  for (int c = 0; c < x.channels(); ++c) {
    for (int r = 0; r < x.height(); ++r) {
      for (int col = 0; col < x.width(); ++col) {
        double v = xbar.at(c, r, col);
        if (v != x.at(c, r, col)) {
          delta.entries[{c, r, col}] = v;
        }
      }
    }
  }
  return delta;
}

Image apply_perturbation(const Image& x, const Perturbation& delta) {
  if (delta.channels != x.channels() || delta.height != x.height() ||
      delta.width != x.width()) {
    throw std::invalid_argument("apply_perturbation: shape mismatch");
  }
  Image out = x;
  for (const auto& [coord, v] : delta.entries) {
    const auto& [c, r, col] = coord;
    out.set(c, r, col, v);
  }
  return out;
}

}  // namespace pixelrl
