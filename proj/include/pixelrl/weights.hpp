#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pixelrl {

// Flat-float weights container.
//
// File layout (all little-endian):
//   u32 magic  = 0x31575850 ("PXW1")
//   u32 n_tensors
//   per tensor: u32 ndims, u32 dims[ndims], f32 data[prod(dims)]
// Tensor order and shapes are fixed by the consumer (victim or policy dump).
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<double> data;  // stored as f32 on disk

  std::size_t numel() const;
};

constexpr std::uint32_t kWeightsMagic = 0x31575850;

std::vector<Tensor> load_weights(const std::string& path);
void save_weights(const std::vector<Tensor>& tensors, const std::string& path);

}  // namespace pixelrl
