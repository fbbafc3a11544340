#include "pixelrl/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "pixelrl/errors.hpp"

namespace pixelrl {

namespace {

constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a,
                                      '\n'};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

double byte_to_brightness(unsigned char b) { return b / 255.0; }

unsigned char brightness_to_byte(double v) {
  return static_cast<unsigned char>(std::lround(v * 255.0));
}

Image load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<std::vector<png_byte>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng failed reading " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 width = png_get_image_width(png, info);
  png_uint_32 height = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (bit_depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unsupported bit depth 16 in " + path);
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unsupported channel count in " + path);
  }

  rows.assign(height, std::vector<png_byte>(png_get_rowbytes(png, info)));
  std::vector<png_bytep> row_ptrs(height);
  for (png_uint_32 r = 0; r < height; ++r) row_ptrs[r] = rows[r].data();
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<double> data(static_cast<std::size_t>(channels) * height * width);
  for (int c = 0; c < channels; ++c) {
    for (png_uint_32 r = 0; r < height; ++r) {
      for (png_uint_32 col = 0; col < width; ++col) {
        data[(static_cast<std::size_t>(c) * height + r) * width + col] =
            byte_to_brightness(rows[r][col * channels + c]);
      }
    }
  }
  return Image::from_data(channels, static_cast<int>(height),
                          static_cast<int>(width), std::move(data));
}

void save_png(const Image& img, const std::string& path) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw IoError("PNG output supports 1 or 3 channels, got " +
                  std::to_string(img.channels()));
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + path);
  }
  png_init_io(png, fp.get());
  int color_type =
      img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, img.width(), img.height(), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(img.width()) *
                            img.channels());
  for (int r = 0; r < img.height(); ++r) {
    for (int col = 0; col < img.width(); ++col) {
      for (int c = 0; c < img.channels(); ++c) {
        row[col * img.channels() + c] = brightness_to_byte(img.at(c, r, col));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Image load_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  int c = 0, h = 0, w = 0;
  in >> c >> h >> w;
  if (!in || c < 1 || h < 1 || w < 1) {
    throw IoError("bad raw header in " + path);
  }
  in.get();  // the newline after the header
  std::vector<unsigned char> bytes(static_cast<std::size_t>(c) * h * w);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw IoError("truncated raw image " + path);
  }
  std::vector<double> data(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    data[i] = byte_to_brightness(bytes[i]);
  }
  return Image::from_data(c, h, w, std::move(data));
}

void save_raw(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << img.channels() << " " << img.height() << " " << img.width() << "\n";
  for (double v : img.data()) {
    out.put(static_cast<char>(brightness_to_byte(v)));
  }
  if (!out) throw IoError("failed writing " + path);
}

Image load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  unsigned char sig[8] = {0};
  in.read(reinterpret_cast<char*>(sig), 8);
  in.close();
  if (std::memcmp(sig, kPngSig, 8) == 0) return load_png(path);
  return load_raw(path);
}

void save_image(const Image& img, const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pxr") == 0) {
    save_raw(img, path);
  } else {
    save_png(img, path);
  }
}

}  // namespace pixelrl
