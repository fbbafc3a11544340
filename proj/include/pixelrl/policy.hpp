#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pixelrl/image.hpp"

namespace pixelrl {

// Per-slot distribution parameters produced by the policy forward pass.
// mu_* live in normalized [0,1] coordinates (sigmoid-squashed), sigma_* are
// exp-parameterized, bright_mean is the sigmoid of the per-channel logit.
struct SlotDist {
  double mu_row = 0, sigma_row = 0, mu_col = 0, sigma_col = 0;
  std::vector<double> bright_mean;
  // raw head outputs, kept for the backward pass
  double u_row = 0, logsig_row = 0, u_col = 0, logsig_col = 0;
  std::vector<double> logits;
};

// Continuous pre-quantization draws for one action slot.
struct RawSlotSample {
  double row = 0, col = 0;
  std::vector<double> bright;
};

struct SampledBatch {
  ActionSet actions;
  std::vector<RawSlotSample> raw;
  double log_prob = 0;
};

struct ForwardCache;  // opaque, defined in policy.cpp

struct ForwardResult {
  std::vector<SlotDist> slots;
  std::vector<double> feat;  // pooled feature vector
};

// Small convolutional policy: two 3x3 stride-2 conv layers (widths 8 and 16,
// tanh), global average pooling, then an independent linear head per action
// slot emitting (mu_row, log sigma_row, mu_col, log sigma_col, C brightness
// logits). The backward pass is written by hand for exactly this stack.
class Policy {
 public:
  Policy() = default;  // empty shell; real construction goes through init()

  static constexpr int kConv1Filters = 8;
  static constexpr int kConv2Filters = 16;
  static constexpr double kBrightSd = 0.1;
  static constexpr double kInitSigma = 0.3;

  // Fresh parameters: conv weights from N(0, 1/sqrt(fan_in)) drawn from rng,
  // head weights zero, head biases set so mu = 0.5 and sigma = kInitSigma.
  static Policy init(std::mt19937_64& rng, int channels, int height, int width,
                     int slots);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int slots() const { return slots_; }
  std::size_t param_count() const { return params_.size(); }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  // Pure function of (params, x). Throws NumericError on non-finite values.
  ForwardResult forward(const Image& x) const;

  // Draws one action set. Coordinates: clamp the normal draw to [0,1], scale
  // by the image extent, floor, cap at the last index. Brightness: draw
  // around the sigmoid-squashed logit with sd 0.1, threshold at 0.5.
  SampledBatch sample(const ForwardResult& fwd, std::mt19937_64& rng) const;

  // Total log-density of the raw draws under the current parameters.
  double log_prob(const Image& x, const std::vector<RawSlotSample>& raw) const;

  // d log_prob / d params, for the fixed raw draws. Same length as params().
  std::vector<double> grad_log_prob(const Image& x,
                                    const std::vector<RawSlotSample>& raw) const;

  void save(const std::string& path) const;

 private:
  ForwardResult forward_impl(const Image& x, ForwardCache* cache) const;

  int channels_ = 0, height_ = 0, width_ = 0, slots_ = 0;
  int h1_ = 0, w1_ = 0, h2_ = 0, w2_ = 0;
  std::vector<double> params_;

  // param vector offsets
  std::size_t conv1_w_ = 0, conv1_b_ = 0, conv2_w_ = 0, conv2_b_ = 0,
              heads_ = 0;
  std::size_t head_stride_ = 0;  // params per slot head

  friend struct PolicyLayout;
};

struct TrainState {
  Policy policy;
  int epoch = 0;
  std::mt19937_64 rng;
};

// One-step policy-gradient ascent on reward * log_prob: computes
// g = r * d log_prob/d params, clips ||g|| at 5.0, then params += lr * g.
// Throws NumericError when the gradient is non-finite.
void reinforce_update(TrainState& state, const Image& x,
                      const SampledBatch& batch, double reward,
                      double learning_rate);

}  // namespace pixelrl
