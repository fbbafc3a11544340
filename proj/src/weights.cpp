#include "pixelrl/weights.hpp"

#include <cstring>
#include <fstream>

#include "pixelrl/errors.hpp"

namespace pixelrl {

namespace {
std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("truncated weights file");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 4);
}

float read_f32(std::istream& in) {
  std::uint32_t bits = read_u32(in);
  float f;
  static_assert(sizeof(f) == 4);
  std::memcpy(&f, &bits, 4);
  return f;
}

void write_f32(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(out, bits);
}
}  // namespace

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<Tensor> load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weights file " + path);
  if (read_u32(in) != kWeightsMagic) {
    throw IoError("bad magic in weights file " + path);
  }
  std::uint32_t n_tensors = read_u32(in);
  if (n_tensors > 1024) throw IoError("implausible tensor count in " + path);
  std::vector<Tensor> tensors(n_tensors);
  for (Tensor& t : tensors) {
    std::uint32_t ndims = read_u32(in);
    if (ndims == 0 || ndims > 8) throw IoError("bad tensor rank in " + path);
    t.dims.resize(ndims);
    for (auto& d : t.dims) d = read_u32(in);
    std::size_t n = t.numel();
    if (n > (1u << 28)) throw IoError("implausible tensor size in " + path);
    t.data.resize(n);
    for (auto& v : t.data) v = read_f32(in);
  }
  return tensors;
}

void save_weights(const std::vector<Tensor>& tensors,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_u32(out, kWeightsMagic);
  write_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const Tensor& t : tensors) {
    write_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) write_u32(out, d);
    for (double v : t.data) write_f32(out, static_cast<float>(v));
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace pixelrl
