#pragma once

#include "mfs/image.hpp"
#include "mfs/tensor.hpp"

namespace mfs::imgproc {

// Hair-removal defaults, overridable via CLI/config.
struct HairRemovalParams {
    int kernel = 17;    // cross structuring element side
    int threshold = 10; // applied to the blackhat response, strict >
    int radius = 1;     // inpainting neighbourhood radius in px
};

// Intermediate stages of the artifact-removal pipeline, for --dump-stages.
struct HairRemovalStages {
    GrayImage gray;
    GrayImage blackhat;
    BinaryMask mask;
    RgbImage inpainted;
};

// Luma conversion, round(0.299 R + 0.587 G + 0.114 B).
GrayImage to_grayscale(const RgbImage& img);

// Cross-shaped element: middle row and column set, k odd.
StructuringElement cross_element(int k);

// Morphological closing minus input. Replicate border. Output >= 0 elementwise,
// kept in 8-bit (difference of two 8-bit images is within [0,255]).
GrayImage blackhat(const GrayImage& img, const StructuringElement& se);

GrayImage dilate(const GrayImage& img, const StructuringElement& se);
GrayImage erode(const GrayImage& img, const StructuringElement& se);

// mask(j) = 1 iff bh(j) > t.
BinaryMask threshold_mask(const GrayImage& bh, int t);

// Fast-marching inpainting: masked pixels filled boundary-inward, each as a
// normalized inverse-distance average of known neighbours within `radius`.
// Unmasked pixels are copied bit-exactly. Throws if the mask covers everything.
RgbImage inpaint_fmm(const RgbImage& img, const BinaryMask& mask, int radius = 1);

RgbImage remove_hair(const RgbImage& img, const HairRemovalParams& p = {},
                     HairRemovalStages* stages = nullptr);

// Bilinear resize on 8-bit data (half-pixel centers; identity when dims match).
RgbImage resize_rgb(const RgbImage& img, int oh, int ow);
BinaryMask resize_mask_nearest(const BinaryMask& m, int oh, int ow);

// Per-channel standardization constants (broadcast convention).
inline constexpr double kNormMean[3] = {0.485, 0.456, 0.406};
inline constexpr double kNormStd[3] = {0.229, 0.224, 0.225};

// Bilinear resize to side x side, scale to [0,1], standardize per channel.
// Returns CHW [3, side, side].
Tensor resize_normalize(const RgbImage& img, int side);

// Standardize without resizing, CHW.
Tensor normalize_chw(const RgbImage& img);

}  // namespace mfs::imgproc
