#pragma once

#include <string>

#include "pixelrl/image.hpp"

namespace pixelrl {

// Loads an 8-bit PNG (grayscale or RGB; alpha stripped, palette expanded)
// or the raw fallback format. Format is sniffed from the file contents.
// Brightness maps as byte/255. Throws IoError on unreadable files or
// unsupported bit depths.
Image load_image(const std::string& path);

// Writes PNG for C==1 (gray) or C==3 (RGB); writes the raw format when the
// path ends in ".pxr". Bytes are round(v*255).
void save_image(const Image& img, const std::string& path);

// Raw fallback format, usable for dependency-free fixtures:
// ASCII header "C H W\n" followed by C*H*W unsigned bytes in
// (channel, row, col) order.
Image load_raw(const std::string& path);
void save_raw(const Image& img, const std::string& path);

}  // namespace pixelrl
