#pragma once

#include "mfs/nn.hpp"

namespace mfs::decoder {

// Multi-branch receptive-field block: four parallel branches with growing
// kernel footprint and dilation, fused and joined with a 1x1 shortcut.
// Output width is fixed (32 by default) regardless of input channels.
class RfbBlock {
  public:
    RfbBlock() = default;
    RfbBlock(nn::ParamStore& ps, const std::string& name, int cin, nn::Rng& rng, int width = 32);
    Var operator()(const Var& x, bool training) const;
    int width() const { return width_; }

  private:
    // branch k: 1x1 reduce, then (1xK, Kx1, 3x3 dilated) for k>0
    nn::ConvBn b0_;
    nn::ConvBn b1r_, b1a_, b1b_, b1d_;
    nn::ConvBn b2r_, b2a_, b2b_, b2d_;
    nn::ConvBn b3r_, b3a_, b3b_, b3d_;
    nn::ConvBn fuse_, short_;
    int width_ = 32;
};

// Partial decoder: joins the two deepest transformed features into the
// global map. r5 must sit exactly one stride level below r4 (half its
// spatial size); the result is single-channel logits at r4's resolution.
class Ppd {
  public:
    Ppd() = default;
    Ppd(nn::ParamStore& ps, const std::string& name, int width, nn::Rng& rng);
    Var forward(const Var& r4, const Var& r5, bool training) const;

  private:
    nn::ConvBn fuse1_, fuse2_;
    nn::Conv2d head_;
};

}  // namespace mfs::decoder
