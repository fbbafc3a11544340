// One-off fixture generator: writes the bundled tiny-CNN victim weights and
// the desk-scale image sets into a fixtures directory. Deterministic; the
// repository ships its output, this tool only documents how it was made.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <vector>

#include "pixelrl/image.hpp"
#include "pixelrl/image_io.hpp"
#include "pixelrl/weights.hpp"

namespace fs = std::filesystem;
using namespace pixelrl;

namespace {

// tiny-CNN victim geometry and calibration constants
constexpr int kChannels = 3;
constexpr int kSize = 32;      // H = W
constexpr int kClasses = 10;
constexpr int kFilters = 8;
constexpr int kRegion = 2;     // class blob edge, in pooled cells
constexpr double kGain = 4.5;  // peak fc weight on the luminance filter
constexpr double kKernelSd = 3.0;  // spatial falloff of the fc weights, cells
constexpr double kThreshold = 0.75;  // luminance filter ReLU threshold
constexpr double kConvNoiseSd = 0.15;
constexpr double kFcNoiseSd = 0.005;
constexpr double kBlobBrightness = 0.9;
constexpr double kBackground = 0.5;
constexpr double kImageNoise = 0.05;

// top-left pooled coordinates of each class's bright region (16x16 grid):
// pairwise center distances large enough that the fc kernels barely
// overlap, clustered toward the middle of the frame
constexpr int kRegionPos[kClasses][2] = {
    {5, 5}, {5, 10}, {10, 5}, {10, 10}, {8, 8},
    {3, 8}, {8, 3},  {8, 13}, {13, 8},  {12, 12},
};

void write_tiny_cnn(const fs::path& path) {
  std::mt19937_64 rng(0x7c3a9d11);
  std::normal_distribution<double> n01(0.0, 1.0);

  Tensor meta;
  meta.dims = {4};
  meta.data = {kChannels, kSize, kSize, kClasses};

  // filter 0 is a thresholded luminance detector (center tap, averaged over
  // channels, ReLU bias just below the blob brightness): the background and
  // partial-channel edits fall below the threshold, so only near-white
  // writes and blob erasures move it. The rest are random texture filters.
  Tensor conv_w;
  conv_w.dims = {kFilters, kChannels, 3, 3};
  conv_w.data.assign(conv_w.numel(), 0.0);
  for (int c = 0; c < kChannels; ++c) {
    conv_w.data[((0 * kChannels + c) * 3 + 1) * 3 + 1] = 1.0 / kChannels;
  }
  for (int f = 1; f < kFilters; ++f) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(kChannels) * 9; ++i) {
      conv_w.data[f * kChannels * 9 + i] = kConvNoiseSd * n01(rng);
    }
  }
  Tensor conv_b;
  conv_b.dims = {kFilters};
  conv_b.data.assign(kFilters, 0.0);
  conv_b.data[0] = -kThreshold;

  const int pooled = kSize / 2;
  const std::size_t feat = static_cast<std::size_t>(kFilters) * pooled * pooled;
  Tensor fc_w;
  fc_w.dims = {kClasses, static_cast<std::uint32_t>(feat)};
  fc_w.data.assign(static_cast<std::size_t>(kClasses) * feat, 0.0);
  for (int k = 0; k < kClasses; ++k) {
    for (std::size_t i = 0; i < feat; ++i) {
      fc_w.data[k * feat + i] = kFcNoiseSd * n01(rng);
    }
    // smooth spatial bump on the thresholded luminance filter, peaked at
    // the class blob's center; a flat background produces no response
    // there, so no per-class bias correction is needed
    double cy = kRegionPos[k][0] + (kRegion - 1) / 2.0;
    double cx = kRegionPos[k][1] + (kRegion - 1) / 2.0;
    for (int py = 0; py < pooled; ++py) {
      for (int px = 0; px < pooled; ++px) {
        double d2 = (py - cy) * (py - cy) + (px - cx) * (px - cx);
        double g = std::exp(-d2 / (2.0 * kKernelSd * kKernelSd));
        if (g < 0.01) continue;
        std::size_t idx =
            (static_cast<std::size_t>(0) * pooled + py) * pooled + px;
        fc_w.data[k * feat + idx] += kGain * g;
      }
    }
  }
  Tensor fc_b;
  fc_b.dims = {kClasses};
  fc_b.data.assign(kClasses, 0.0);

  save_weights({meta, conv_w, conv_b, fc_w, fc_b}, path.string());
}

void write_classification_set(const fs::path& dir, const fs::path& labels) {
  fs::create_directories(dir);
  std::ofstream lab(labels);
  for (int i = 0; i < 100; ++i) {
    int cls = i % kClasses;
    std::mt19937_64 rng(0x51f0c0deULL + i);
    std::uniform_real_distribution<double> noise(-kImageNoise, kImageNoise);
    std::vector<double> data(static_cast<std::size_t>(kChannels) * kSize *
                             kSize);
    int r0 = kRegionPos[cls][0] * 2, c0 = kRegionPos[cls][1] * 2;
    int edge = kRegion * 2;
    for (int c = 0; c < kChannels; ++c) {
      for (int r = 0; r < kSize; ++r) {
        for (int col = 0; col < kSize; ++col) {
          bool in_blob = r >= r0 && r < r0 + edge && col >= c0 &&
                         col < c0 + edge;
          double v = (in_blob ? kBlobBrightness : kBackground) + noise(rng);
          data[(static_cast<std::size_t>(c) * kSize + r) * kSize + col] =
              std::clamp(v, 0.0, 1.0);
        }
      }
    }
    Image img = Image::from_data(kChannels, kSize, kSize, std::move(data));
    char name[32];
    std::snprintf(name, sizeof(name), "img_%03d.pxr", i);
    save_raw(img, (dir / name).string());
    lab << name << " " << cls << "\n";
  }
}

void write_detection_set(const fs::path& dir) {
  fs::create_directories(dir);
  const int size = 64, cell = 16, grid = size / cell;
  for (int i = 0; i < 12; ++i) {
    int n_objects = 4 + (i % 5);
    std::mt19937_64 rng(0xde7ec7ULL + i);
    std::uniform_real_distribution<double> dark_noise(-0.05, 0.05);
    std::uniform_real_distribution<double> bright_noise(-0.01, 0.01);
    std::vector<int> cells(grid * grid);
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), rng);
    std::vector<bool> bright(grid * grid, false);
    for (int o = 0; o < n_objects; ++o) bright[cells[o]] = true;

    std::vector<double> data(static_cast<std::size_t>(3) * size * size);
    for (int c = 0; c < 3; ++c) {
      for (int r = 0; r < size; ++r) {
        for (int col = 0; col < size; ++col) {
          bool b = bright[(r / cell) * grid + col / cell];
          double v = b ? 0.52 + bright_noise(rng) : 0.2 + dark_noise(rng);
          data[(static_cast<std::size_t>(c) * size + r) * size + col] =
              std::clamp(v, 0.0, 1.0);
        }
      }
    }
    Image img = Image::from_data(3, size, size, std::move(data));
    char name[32];
    std::snprintf(name, sizeof(name), "det_%02d.pxr", i);
    save_raw(img, (dir / name).string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  fs::path root = argc > 1 ? argv[1] : "fixtures";
  fs::create_directories(root);
  write_tiny_cnn(root / "tiny_cnn.pxw");
  write_classification_set(root / "images", root / "labels.txt");
  write_detection_set(root / "det_images");
  std::cout << "fixtures written to " << root << "\n";
  return 0;
}
