#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mfs {

// 8-bit RGB image, interleaved row-major, channel order R,G,B.
struct RgbImage {
    int h = 0, w = 0;
    std::vector<uint8_t> px;  // h*w*3

    RgbImage() = default;
    RgbImage(int height, int width, uint8_t fill = 0)
        : h(height), w(width), px(static_cast<size_t>(height) * width * 3, fill) {
        if (height < 1 || width < 1) throw std::invalid_argument("RgbImage: empty dims");
    }
    uint8_t& at(int r, int c, int ch) { return px[(static_cast<size_t>(r) * w + c) * 3 + ch]; }
    uint8_t at(int r, int c, int ch) const { return px[(static_cast<size_t>(r) * w + c) * 3 + ch]; }
    bool operator==(const RgbImage& o) const { return h == o.h && w == o.w && px == o.px; }
};

// 8-bit single channel image.
struct GrayImage {
    int h = 0, w = 0;
    std::vector<uint8_t> px;  // h*w

    GrayImage() = default;
    GrayImage(int height, int width, uint8_t fill = 0)
        : h(height), w(width), px(static_cast<size_t>(height) * width, fill) {}
    uint8_t& at(int r, int c) { return px[static_cast<size_t>(r) * w + c]; }
    uint8_t at(int r, int c) const { return px[static_cast<size_t>(r) * w + c]; }
};

// Strictly {0,1} valued mask.
struct BinaryMask {
    int h = 0, w = 0;
    std::vector<uint8_t> px;  // h*w, values 0 or 1

    BinaryMask() = default;
    BinaryMask(int height, int width, uint8_t fill = 0)
        : h(height), w(width), px(static_cast<size_t>(height) * width, fill) {}
    uint8_t& at(int r, int c) { return px[static_cast<size_t>(r) * w + c]; }
    uint8_t at(int r, int c) const { return px[static_cast<size_t>(r) * w + c]; }
    int64_t count() const {
        int64_t n = 0;
        for (uint8_t v : px) n += v;
        return n;
    }
    bool operator==(const BinaryMask& o) const { return h == o.h && w == o.w && px == o.px; }
};

// k x k binary structuring element, k odd.
struct StructuringElement {
    int k = 0;
    std::vector<uint8_t> mask;  // k*k

    uint8_t at(int r, int c) const { return mask[static_cast<size_t>(r) * k + c]; }
};

}  // namespace mfs
