#include "pixelrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pixelrl/errors.hpp"
#include "pixelrl/weights.hpp"

namespace pixelrl {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

int conv_out(int n) { return (n - 1) / 2 + 1; }  // k=3, stride 2, pad 1

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double normal_logpdf(double v, double mu, double sd) {
  double z = (v - mu) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * kLog2Pi;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite value in ") + what);
  }
}

}  // namespace

struct ForwardCache {
  std::vector<double> a1;  // post-tanh conv1 activations [F1, h1, w1]
  std::vector<double> a2;  // post-tanh conv2 activations [F2, h2, w2]
};

Policy Policy::init(std::mt19937_64& rng, int channels, int height, int width,
                    int slots) {
  if (channels < 1 || height < 1 || width < 1 || slots < 1) {
    throw std::invalid_argument("Policy::init: dimensions must be positive");
  }
  Policy p;
  p.channels_ = channels;
  p.height_ = height;
  p.width_ = width;
  p.slots_ = slots;
  p.h1_ = conv_out(height);
  p.w1_ = conv_out(width);
  p.h2_ = conv_out(p.h1_);
  p.w2_ = conv_out(p.w1_);

  const int F1 = kConv1Filters, F2 = kConv2Filters;
  const int head_out = 4 + channels;
  p.conv1_w_ = 0;
  p.conv1_b_ = p.conv1_w_ + static_cast<std::size_t>(F1) * channels * 9;
  p.conv2_w_ = p.conv1_b_ + F1;
  p.conv2_b_ = p.conv2_w_ + static_cast<std::size_t>(F2) * F1 * 9;
  p.heads_ = p.conv2_b_ + F2;
  p.head_stride_ = static_cast<std::size_t>(head_out) * (F2 + 1);
  p.params_.assign(p.heads_ + p.head_stride_ * slots, 0.0);

  std::normal_distribution<double> n01(0.0, 1.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(channels) * 9);
  for (std::size_t i = p.conv1_w_; i < p.conv1_b_; ++i) {
    p.params_[i] = s1 * n01(rng);
  }
  const double s2 = 1.0 / std::sqrt(static_cast<double>(F1) * 9);
  for (std::size_t i = p.conv2_w_; i < p.conv2_b_; ++i) {
    p.params_[i] = s2 * n01(rng);
  }
  // Head weights stay zero so every slot starts at mu = 0.5 (image center),
  // sigma = kInitSigma, and a 50/50 Write/Erase split.
  const double logsig0 = std::log(kInitSigma);
  for (int s = 0; s < slots; ++s) {
    std::size_t bias0 = p.heads_ + p.head_stride_ * s +
                        static_cast<std::size_t>(head_out) * F2;
    p.params_[bias0 + 1] = logsig0;  // log sigma_row
    p.params_[bias0 + 3] = logsig0;  // log sigma_col
  }
  return p;
}

ForwardResult Policy::forward(const Image& x) const {
  return forward_impl(x, nullptr);
}

ForwardResult Policy::forward_impl(const Image& x, ForwardCache* cache) const {
  if (x.channels() != channels_ || x.height() != height_ ||
      x.width() != width_) {
    throw std::invalid_argument("policy forward: image dimension mismatch");
  }
  const int F1 = kConv1Filters, F2 = kConv2Filters;

  std::vector<double> a1(static_cast<std::size_t>(F1) * h1_ * w1_);
  for (int f = 0; f < F1; ++f) {
    for (int y = 0; y < h1_; ++y) {
      for (int xo = 0; xo < w1_; ++xo) {
        double acc = params_[conv1_b_ + f];
        for (int c = 0; c < channels_; ++c) {
          for (int ky = 0; ky < 3; ++ky) {
            int rr = 2 * y + ky - 1;
            if (rr < 0 || rr >= height_) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int cc = 2 * xo + kx - 1;
              if (cc < 0 || cc >= width_) continue;
              acc += params_[conv1_w_ +
                             ((static_cast<std::size_t>(f) * channels_ + c) *
                                  3 + ky) * 3 + kx] * x.at(c, rr, cc);
            }
          }
        }
        a1[(static_cast<std::size_t>(f) * h1_ + y) * w1_ + xo] =
            std::tanh(acc);
      }
    }
  }

  std::vector<double> a2(static_cast<std::size_t>(F2) * h2_ * w2_);
  for (int f = 0; f < F2; ++f) {
    for (int y = 0; y < h2_; ++y) {
      for (int xo = 0; xo < w2_; ++xo) {
        double acc = params_[conv2_b_ + f];
        for (int i = 0; i < F1; ++i) {
          for (int ky = 0; ky < 3; ++ky) {
            int rr = 2 * y + ky - 1;
            if (rr < 0 || rr >= h1_) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int cc = 2 * xo + kx - 1;
              if (cc < 0 || cc >= w1_) continue;
              acc += params_[conv2_w_ +
                             ((static_cast<std::size_t>(f) * F1 + i) * 3 + ky) *
                                 3 + kx] *
                     a1[(static_cast<std::size_t>(i) * h1_ + rr) * w1_ + cc];
            }
          }
        }
        a2[(static_cast<std::size_t>(f) * h2_ + y) * w2_ + xo] =
            std::tanh(acc);
      }
    }
  }

  ForwardResult out;
  out.feat.assign(F2, 0.0);
  const double inv_area = 1.0 / (static_cast<double>(h2_) * w2_);
  for (int f = 0; f < F2; ++f) {
    double s = 0.0;
    for (int i = 0; i < h2_ * w2_; ++i) {
      s += a2[static_cast<std::size_t>(f) * h2_ * w2_ + i];
    }
    out.feat[f] = s * inv_area;
  }

  const int head_out = 4 + channels_;
  out.slots.resize(slots_);
  for (int s = 0; s < slots_; ++s) {
    std::size_t w0 = heads_ + head_stride_ * s;
    std::size_t b0 = w0 + static_cast<std::size_t>(head_out) * F2;
    std::vector<double> raw(head_out);
    for (int o = 0; o < head_out; ++o) {
      double acc = params_[b0 + o];
      for (int f = 0; f < F2; ++f) {
        acc += params_[w0 + static_cast<std::size_t>(o) * F2 + f] *
               out.feat[f];
      }
      check_finite(acc, "policy head output");
      raw[o] = acc;
    }
    SlotDist& d = out.slots[s];
    d.u_row = raw[0];
    d.logsig_row = raw[1];
    d.u_col = raw[2];
    d.logsig_col = raw[3];
    d.mu_row = sigmoid(raw[0]);
    d.sigma_row = std::exp(raw[1]);
    d.mu_col = sigmoid(raw[2]);
    d.sigma_col = std::exp(raw[3]);
    d.logits.assign(raw.begin() + 4, raw.end());
    d.bright_mean.resize(channels_);
    for (int c = 0; c < channels_; ++c) d.bright_mean[c] = sigmoid(d.logits[c]);
  }

  if (cache) {
    cache->a1 = std::move(a1);
    cache->a2 = std::move(a2);
  }
  return out;
}

SampledBatch Policy::sample(const ForwardResult& fwd,
                            std::mt19937_64& rng) const {
  SampledBatch batch;
  std::normal_distribution<double> n01(0.0, 1.0);
  for (const SlotDist& d : fwd.slots) {
    RawSlotSample raw;
    raw.row = d.mu_row + d.sigma_row * n01(rng);
    raw.col = d.mu_col + d.sigma_col * n01(rng);
    raw.bright.resize(channels_);
    for (int c = 0; c < channels_; ++c) {
      raw.bright[c] = d.bright_mean[c] + kBrightSd * n01(rng);
    }

    PixelAction act;
    double ur = std::clamp(raw.row, 0.0, 1.0);
    double uc = std::clamp(raw.col, 0.0, 1.0);
    act.row = std::min(height_ - 1, static_cast<int>(ur * height_));
    act.col = std::min(width_ - 1, static_cast<int>(uc * width_));
    act.values.resize(channels_);
    for (int c = 0; c < channels_; ++c) {
      act.values[c] = raw.bright[c] >= 0.5 ? 1.0 : 0.0;
    }

    batch.log_prob += normal_logpdf(raw.row, d.mu_row, d.sigma_row) +
                      normal_logpdf(raw.col, d.mu_col, d.sigma_col);
    for (int c = 0; c < channels_; ++c) {
      batch.log_prob +=
          normal_logpdf(raw.bright[c], d.bright_mean[c], kBrightSd);
    }
    batch.raw.push_back(std::move(raw));
    batch.actions.push_back(std::move(act));
  }
  check_finite(batch.log_prob, "sampled log_prob");
  return batch;
}

double Policy::log_prob(const Image& x,
                        const std::vector<RawSlotSample>& raw) const {
  ForwardResult fwd = forward(x);
  if (raw.size() != fwd.slots.size()) {
    throw std::invalid_argument("log_prob: raw sample count != slots");
  }
  double lp = 0.0;
  for (std::size_t s = 0; s < raw.size(); ++s) {
    const SlotDist& d = fwd.slots[s];
    lp += normal_logpdf(raw[s].row, d.mu_row, d.sigma_row) +
          normal_logpdf(raw[s].col, d.mu_col, d.sigma_col);
    for (int c = 0; c < channels_; ++c) {
      lp += normal_logpdf(raw[s].bright[c], d.bright_mean[c], kBrightSd);
    }
  }
  return lp;
}

std::vector<double> Policy::grad_log_prob(
    const Image& x, const std::vector<RawSlotSample>& raw) const {
  ForwardCache cache;
  ForwardResult fwd = forward_impl(x, &cache);
  if (raw.size() != fwd.slots.size()) {
    throw std::invalid_argument("grad_log_prob: raw sample count != slots");
  }

  const int F1 = kConv1Filters, F2 = kConv2Filters;
  const int head_out = 4 + channels_;
  std::vector<double> grad(params_.size(), 0.0);
  std::vector<double> g_feat(F2, 0.0);

  for (int s = 0; s < slots_; ++s) {
    const SlotDist& d = fwd.slots[s];
    const RawSlotSample& r = raw[s];
    std::vector<double> g_out(head_out);
    // d logpdf / d mu = (v - mu)/sigma^2, chained through the sigmoid;
    // d logpdf / d logsigma = z^2 - 1.
    {
      double zr = (r.row - d.mu_row) / d.sigma_row;
      g_out[0] = zr / d.sigma_row * d.mu_row * (1.0 - d.mu_row);
      g_out[1] = zr * zr - 1.0;
      double zc = (r.col - d.mu_col) / d.sigma_col;
      g_out[2] = zc / d.sigma_col * d.mu_col * (1.0 - d.mu_col);
      g_out[3] = zc * zc - 1.0;
      for (int c = 0; c < channels_; ++c) {
        double m = d.bright_mean[c];
        g_out[4 + c] = (r.bright[c] - m) / (kBrightSd * kBrightSd) * m *
                       (1.0 - m);
      }
    }
    std::size_t w0 = heads_ + head_stride_ * s;
    std::size_t b0 = w0 + static_cast<std::size_t>(head_out) * F2;
    for (int o = 0; o < head_out; ++o) {
      grad[b0 + o] += g_out[o];
      for (int f = 0; f < F2; ++f) {
        grad[w0 + static_cast<std::size_t>(o) * F2 + f] +=
            g_out[o] * fwd.feat[f];
        g_feat[f] += g_out[o] * params_[w0 + static_cast<std::size_t>(o) * F2 +
                                        f];
      }
    }
  }

  // global average pool -> a2, through tanh
  const double inv_area = 1.0 / (static_cast<double>(h2_) * w2_);
  std::vector<double> g_z2(static_cast<std::size_t>(F2) * h2_ * w2_);
  for (int f = 0; f < F2; ++f) {
    for (int i = 0; i < h2_ * w2_; ++i) {
      double a = cache.a2[static_cast<std::size_t>(f) * h2_ * w2_ + i];
      g_z2[static_cast<std::size_t>(f) * h2_ * w2_ + i] =
          g_feat[f] * inv_area * (1.0 - a * a);
    }
  }

  std::vector<double> g_a1(cache.a1.size(), 0.0);
  for (int f = 0; f < F2; ++f) {
    for (int y = 0; y < h2_; ++y) {
      for (int xo = 0; xo < w2_; ++xo) {
        double g = g_z2[(static_cast<std::size_t>(f) * h2_ + y) * w2_ + xo];
        if (g == 0.0) continue;
        grad[conv2_b_ + f] += g;
        for (int i = 0; i < F1; ++i) {
          for (int ky = 0; ky < 3; ++ky) {
            int rr = 2 * y + ky - 1;
            if (rr < 0 || rr >= h1_) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int cc = 2 * xo + kx - 1;
              if (cc < 0 || cc >= w1_) continue;
              std::size_t widx =
                  conv2_w_ +
                  ((static_cast<std::size_t>(f) * F1 + i) * 3 + ky) * 3 + kx;
              std::size_t aidx =
                  (static_cast<std::size_t>(i) * h1_ + rr) * w1_ + cc;
              grad[widx] += g * cache.a1[aidx];
              g_a1[aidx] += g * params_[widx];
            }
          }
        }
      }
    }
  }

  for (int f = 0; f < F1; ++f) {
    for (int y = 0; y < h1_; ++y) {
      for (int xo = 0; xo < w1_; ++xo) {
        std::size_t aidx = (static_cast<std::size_t>(f) * h1_ + y) * w1_ + xo;
        double a = cache.a1[aidx];
        double g = g_a1[aidx] * (1.0 - a * a);
        if (g == 0.0) continue;
        grad[conv1_b_ + f] += g;
        for (int c = 0; c < channels_; ++c) {
          for (int ky = 0; ky < 3; ++ky) {
            int rr = 2 * y + ky - 1;
            if (rr < 0 || rr >= height_) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int cc = 2 * xo + kx - 1;
              if (cc < 0 || cc >= width_) continue;
              grad[conv1_w_ +
                   ((static_cast<std::size_t>(f) * channels_ + c) * 3 + ky) *
                       3 + kx] += g * x.at(c, rr, cc);
            }
          }
        }
      }
    }
  }

  return grad;
}

void Policy::save(const std::string& path) const {
  Tensor meta;
  meta.dims = {4};
  meta.data = {static_cast<double>(channels_), static_cast<double>(height_),
               static_cast<double>(width_), static_cast<double>(slots_)};
  Tensor flat;
  flat.dims = {static_cast<std::uint32_t>(params_.size())};
  flat.data = params_;
  save_weights({meta, flat}, path);
}

void reinforce_update(TrainState& state, const Image& x,
                      const SampledBatch& batch, double reward,
                      double learning_rate) {
  if (!std::isfinite(reward)) {
    throw NumericError("non-finite reward in reinforce_update");
  }
  if (reward == 0.0) return;
  std::vector<double> grad = state.policy.grad_log_prob(x, batch.raw);
  double norm_sq = 0.0;
  for (double& g : grad) {
    g *= reward;
    if (!std::isfinite(g)) {
      throw NumericError("non-finite gradient in reinforce_update");
    }
    norm_sq += g * g;
  }
  double norm = std::sqrt(norm_sq);
  double scale = norm > 5.0 ? 5.0 / norm : 1.0;
  auto& params = state.policy.mutable_params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] += learning_rate * scale * grad[i];
  }
}

}  // namespace pixelrl
