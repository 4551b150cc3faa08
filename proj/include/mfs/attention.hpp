#pragma once

#include "mfs/image.hpp"
#include "mfs/nn.hpp"
#include "mfs/tensor.hpp"

namespace mfs::attention {

// Foreground = strictly positive logits.
BinaryMask binarize_map(const Tensor& logits2d);

// Exact Euclidean distance to the nearest zero pixel, in pixels ([H,W]
// doubles). A mask with no zero at all falls back to the distance to just
// outside the image border, so the result is always finite.
Tensor distance_transform(const BinaryMask& m);

// Boundary attention weights in [0,1]: near-boundary pixels approach 1.
// Built from the normalized distance fields of the mask and its complement.
Tensor boundary_mask(const BinaryMask& s);

// Ground-truth boundary band: morphological gradient of G under a 3x3
// square element with zero padding outside the image.
BinaryMask boundary_target(const BinaryMask& g);

// Reverse-attention weights 1 - sigmoid(up_logits), repeated to c channels.
// up_logits [H,W] must already be at the target level's resolution.
Tensor ra_mask(const Tensor& up_logits, int c);

// Per-level boundary-attention head: gates features by the boundary mask of
// the (already resized) global map and predicts a boundary logit map.
class BoundaryAttention {
  public:
    BoundaryAttention() = default;
    BoundaryAttention(nn::ParamStore& ps, const std::string& name, int cin, nn::Rng& rng);

    struct Out {
        Var gated;   // [N,Cin,H,W] features * M_B
        Var b_pred;  // [N,1,H,W] boundary logits
    };
    // global_logits: [N,1,h,w] detached global map values; resized internally.
    Out forward(const Var& f, const Tensor& global_logits) const;

  private:
    nn::Conv2d head_;  // 1x1 on gated features -> 1
};

// Per-level reverse-attention head. Two conv layers transform the features
// (joined with an optional boundary stream), the result is gated by
// 1-sigmoid of the next deeper prediction (treated as data), and this
// level's map is predicted from the gated features joined with the resized
// deeper prediction (which does carry gradient).
class ReverseAttention {
  public:
    ReverseAttention() = default;
    // cin_extra: channels of an optional boundary stream concatenated with
    // the gated features (0 when unused).
    ReverseAttention(nn::ParamStore& ps, const std::string& name, int cin, int cin_extra,
                     nn::Rng& rng, int width = 64);

    // f: [N,Cin,H,W]; extra: optional [N,cin_extra,H,W]; s_next: [N,1,h,w].
    Var forward(const Var& f, const Var* extra, const Var& s_next, bool training) const;

    int width() const { return width_; }

  private:
    nn::ConvBn con1_, con2_;
    nn::Conv2d head_;  // 3x3 on [refined, resized s_next] -> 1
    int width_ = 64;
};

}  // namespace mfs::attention
