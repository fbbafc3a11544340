#include "pixelrl/builtin_victims.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pixelrl/errors.hpp"

namespace pixelrl {

std::vector<double> softmax(const std::vector<double>& logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

namespace {
void check_input(const Image& x, int c, int h, int w) {
  if (x.channels() != c || x.height() != h || x.width() != w) {
    throw std::invalid_argument("victim input dimension mismatch");
  }
}
}  // namespace

LinearSoftmaxVictim::LinearSoftmaxVictim(
    int channels, int height, int width,
    std::vector<std::vector<double>> weights, std::vector<double> bias)
    : channels_(channels),
      height_(height),
      width_(width),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  std::size_t n = static_cast<std::size_t>(channels) * height * width;
  if (weights_.size() != bias_.size() || weights_.empty()) {
    throw std::invalid_argument("linear victim: weights/bias shape mismatch");
  }
  for (const auto& row : weights_) {
    if (row.size() != n) {
      throw std::invalid_argument("linear victim: weight row length != C*H*W");
    }
  }
}

ClassifierOutput LinearSoftmaxVictim::classify(const Image& x) const {
  check_input(x, channels_, height_, width_);
  std::vector<double> logits(bias_);
  const auto& flat = x.data();
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    double acc = 0.0;
    const auto& row = weights_[k];
    for (std::size_t i = 0; i < flat.size(); ++i) acc += row[i] * flat[i];
    logits[k] += acc;
  }
  return {softmax(logits)};
}

TinyCnnVictim::TinyCnnVictim(const std::string& weights_path) {
  auto tensors = load_weights(weights_path);
  if (tensors.size() != 5) {
    throw IoError("tiny_cnn weights: expected 5 tensors, got " +
                  std::to_string(tensors.size()));
  }
  const Tensor& meta = tensors[0];
  if (meta.numel() != 4) throw IoError("tiny_cnn weights: bad meta tensor");
  channels_ = static_cast<int>(meta.data[0]);
  height_ = static_cast<int>(meta.data[1]);
  width_ = static_cast<int>(meta.data[2]);
  classes_ = static_cast<int>(meta.data[3]);
  conv_w_ = tensors[1];
  conv_b_ = tensors[2];
  fc_w_ = tensors[3];
  fc_b_ = tensors[4];
  if (conv_w_.dims.size() != 4 || conv_w_.dims[1] != (unsigned)channels_ ||
      conv_w_.dims[2] != 3 || conv_w_.dims[3] != 3) {
    throw IoError("tiny_cnn weights: bad conv_w shape");
  }
  filters_ = static_cast<int>(conv_w_.dims[0]);
  if (height_ % 2 != 0 || width_ % 2 != 0) {
    throw IoError("tiny_cnn weights: H and W must be even");
  }
  std::size_t pooled =
      static_cast<std::size_t>(filters_) * (height_ / 2) * (width_ / 2);
  if (conv_b_.numel() != (unsigned)filters_ ||
      fc_w_.numel() != pooled * classes_ ||
      fc_b_.numel() != (unsigned)classes_) {
    throw IoError("tiny_cnn weights: tensor shape mismatch");
  }
}

ClassifierOutput TinyCnnVictim::classify(const Image& x) const {
  check_input(x, channels_, height_, width_);
  const int F = filters_, H = height_, W = width_, C = channels_;
  // conv 3x3, stride 1, zero pad 1, then relu
  std::vector<double> act(static_cast<std::size_t>(F) * H * W, 0.0);
  for (int f = 0; f < F; ++f) {
    for (int r = 0; r < H; ++r) {
      for (int col = 0; col < W; ++col) {
        double acc = conv_b_.data[f];
        for (int c = 0; c < C; ++c) {
          for (int ky = 0; ky < 3; ++ky) {
            int rr = r + ky - 1;
            if (rr < 0 || rr >= H) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int cc = col + kx - 1;
              if (cc < 0 || cc >= W) continue;
              acc += conv_w_.data[((static_cast<std::size_t>(f) * C + c) * 3 +
                                   ky) * 3 + kx] * x.at(c, rr, cc);
            }
          }
        }
        act[(static_cast<std::size_t>(f) * H + r) * W + col] =
            std::max(0.0, acc);
      }
    }
  }
  // 2x2 average pool, stride 2
  const int Hp = H / 2, Wp = W / 2;
  std::vector<double> pooled(static_cast<std::size_t>(F) * Hp * Wp);
  for (int f = 0; f < F; ++f) {
    for (int r = 0; r < Hp; ++r) {
      for (int col = 0; col < Wp; ++col) {
        double s = 0.0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            s += act[(static_cast<std::size_t>(f) * H + 2 * r + dy) * W +
                     2 * col + dx];
          }
        }
        pooled[(static_cast<std::size_t>(f) * Hp + r) * Wp + col] = s / 4.0;
      }
    }
  }
  std::vector<double> logits(classes_);
  std::size_t n = pooled.size();
  for (int k = 0; k < classes_; ++k) {
    double acc = fc_b_.data[k];
    for (std::size_t i = 0; i < n; ++i) {
      acc += fc_w_.data[k * n + i] * pooled[i];
    }
    logits[k] = acc;
  }
  return {softmax(logits)};
}

GridDetectorVictim::GridDetectorVictim(int cell_size, double channel_threshold,
                                       double steepness)
    : cell_size_(cell_size),
      threshold_(channel_threshold),
      steepness_(steepness) {
  if (cell_size < 1) throw std::invalid_argument("cell_size must be >= 1");
}

DetectorOutput GridDetectorVictim::detect(const Image& x) const {
  DetectorOutput out;
  const int rows = x.height() / cell_size_;
  const int cols = x.width() / cell_size_;
  for (int gy = 0; gy < rows; ++gy) {
    for (int gx = 0; gx < cols; ++gx) {
      double sum = 0.0;
      for (int c = 0; c < x.channels(); ++c) {
        for (int r = gy * cell_size_; r < (gy + 1) * cell_size_; ++r) {
          for (int col = gx * cell_size_; col < (gx + 1) * cell_size_; ++col) {
            sum += x.at(c, r, col);
          }
        }
      }
      double mean =
          sum / (static_cast<double>(x.channels()) * cell_size_ * cell_size_);
      double conf = 1.0 / (1.0 + std::exp(-steepness_ * (mean - threshold_)));
      Detection d;
      d.box = {static_cast<double>(gx * cell_size_),
               static_cast<double>(gy * cell_size_),
               static_cast<double>((gx + 1) * cell_size_),
               static_cast<double>((gy + 1) * cell_size_)};
      d.class_id = 0;
      d.confidence = conf;
      out.candidates.push_back(d);
    }
  }
  return out;
}

}  // namespace pixelrl
