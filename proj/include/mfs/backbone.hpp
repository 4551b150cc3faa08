#pragma once

#include <array>
#include <vector>

#include "mfs/nn.hpp"

namespace mfs::backbone {

struct BackboneConfig {
    enum class Kind { Toy, Full };
    Kind kind = Kind::Toy;
    std::array<int, 5> channels{16, 32, 64, 128, 256};
    int scale = 4;                        // split-group count per block
    std::array<int, 4> blocks{2, 2, 2, 2};  // stages 2..5
    int width_div = 1;                    // block internal width = cout / width_div

    static BackboneConfig toy();
    static BackboneConfig full();  // 50-layer profile
    void validate() const;
    std::string describe() const;
};

// Feature maps at strides 2, 4, 8, 16, 32 (f[0] shallowest).
struct FeaturePyramid {
    std::array<Var, 5> f;
    const Var& level(int i) const { return f.at(i - 1); }  // 1-based
};

// Bottleneck block with a hierarchical split: the internal width is divided
// into `scale` groups, each group's 3x3 conv receiving its slice plus the
// previous group's output. Stride-2 blocks give every group its own strided
// conv (no cross-group sum, dims would disagree).
class Res2Block {
  public:
    Res2Block(nn::ParamStore& ps, const std::string& name, int cin, int cout, int stride,
              int scale, int mid, nn::Rng& rng);
    Var forward(const Var& x, bool training) const;
    // The split-cascade stage alone: xg are the `scale` group slices.
    std::vector<Var> cascade(const std::vector<Var>& xg, bool training) const;
    int scale() const { return scale_; }
    int group_width() const { return mid_ / scale_; }

  private:
    nn::ConvBn reduce_, expand_;
    std::vector<nn::ConvBn> group_;
    nn::ConvBn shortcut_;
    bool has_shortcut_ = false;
    int stride_ = 1, scale_ = 4, mid_ = 0;
};

class Res2NetBackbone {
  public:
    Res2NetBackbone(nn::ParamStore& ps, const BackboneConfig& cfg, nn::Rng& rng);
    // x: [N,3,H,W], H and W divisible by 32.
    FeaturePyramid forward(const Var& x, bool training) const;
    const BackboneConfig& config() const { return cfg_; }

  private:
    BackboneConfig cfg_;
    nn::ConvBn stem_;
    std::array<std::vector<Res2Block>, 4> stages_;  // stages 2..5
};

}  // namespace mfs::backbone
