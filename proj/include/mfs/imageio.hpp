#pragma once

#include <string>

#include "mfs/image.hpp"

namespace mfs::imageio {

RgbImage load_rgb(const std::string& path);
void save_rgb(const std::string& path, const RgbImage& img);

// Any channel value > 127 counts as foreground.
BinaryMask load_mask(const std::string& path);
// Written as an 8-bit single-channel PNG with values {0,255}.
void save_mask(const std::string& path, const BinaryMask& m);

void save_gray(const std::string& path, const GrayImage& g);

}  // namespace mfs::imageio
