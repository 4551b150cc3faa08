#include "mfs/backbone.hpp"

#include <sstream>
#include <stdexcept>

namespace mfs::backbone {

BackboneConfig BackboneConfig::toy() { return BackboneConfig{}; }

BackboneConfig BackboneConfig::full() {
    BackboneConfig c;
    c.kind = Kind::Full;
    c.channels = {64, 256, 512, 1024, 2048};
    c.scale = 4;
    c.blocks = {3, 4, 6, 3};
    c.width_div = 4;
    return c;
}

void BackboneConfig::validate() const {
    for (int i = 1; i < 5; ++i)
        if (channels[i] <= channels[i - 1])
            throw std::invalid_argument("backbone: channels must be strictly increasing");
    if (scale < 2) throw std::invalid_argument("backbone: scale must be >= 2");
    if (width_div < 1) throw std::invalid_argument("backbone: width_div must be >= 1");
    for (int i = 1; i < 5; ++i) {
        const int mid = channels[i] / width_div;
        if (mid < scale || mid % scale != 0)
            throw std::invalid_argument("backbone: block width must be divisible by scale");
    }
    for (int b : blocks)
        if (b < 1) throw std::invalid_argument("backbone: each stage needs >= 1 block");
}

std::string BackboneConfig::describe() const {
    std::ostringstream o;
    o << (kind == Kind::Toy ? "toy" : "full") << " channels";
    for (int c : channels) o << ' ' << c;
    o << " scale " << scale << " blocks";
    for (int b : blocks) o << ' ' << b;
    return o.str();
}

Res2Block::Res2Block(nn::ParamStore& ps, const std::string& name, int cin, int cout, int stride,
                     int scale, int mid, nn::Rng& rng)
    : reduce_(ps, name + ".reduce", cin, mid, 1, 1, 1, 0, rng),
      expand_(ps, name + ".expand", mid, cout, 1, 1, 1, 0, rng),
      stride_(stride),
      scale_(scale),
      mid_(mid) {
    if (mid % scale != 0) throw std::invalid_argument("Res2Block: width not divisible by scale");
    const int gw = mid / scale;
    // stride 1: group 1 passes through untouched; stride 2: every group is
    // convolved so all outputs land on the strided grid.
    const int first = stride == 1 ? 1 : 0;
    for (int g = first; g < scale; ++g)
        group_.emplace_back(ps, name + ".g" + std::to_string(g), gw, gw, 3, 3, stride, 1, rng);
    has_shortcut_ = (cin != cout) || stride != 1;
    if (has_shortcut_) shortcut_ = nn::ConvBn(ps, name + ".shortcut", cin, cout, 1, 1, stride, 0, rng);
}

std::vector<Var> Res2Block::cascade(const std::vector<Var>& xg, bool training) const {
    if (static_cast<int>(xg.size()) != scale_)
        throw std::invalid_argument("Res2Block: expected one slice per group");
    std::vector<Var> z(scale_);
    if (stride_ == 1) {
        z[0] = xg[0];
        for (int g = 1; g < scale_; ++g) {
            Var in = add(xg[g], z[g - 1]);
            z[g] = group_[g - 1](in, training);
        }
    } else {
        for (int g = 0; g < scale_; ++g) z[g] = group_[g](xg[g], training);
    }
    return z;
}

Var Res2Block::forward(const Var& x, bool training) const {
    Var r = reduce_(x, training);
    const int gw = group_width();
    std::vector<Var> xg(scale_);
    for (int g = 0; g < scale_; ++g) xg[g] = slice_ch(r, g * gw, (g + 1) * gw);
    Var merged = concat_ch(cascade(xg, training));
    Var main = expand_(merged, training, /*with_relu=*/false);
    Var sc = has_shortcut_ ? shortcut_(x, training, /*with_relu=*/false) : x;
    return relu(add(main, sc));
}

Res2NetBackbone::Res2NetBackbone(nn::ParamStore& ps, const BackboneConfig& cfg, nn::Rng& rng)
    : cfg_(cfg) {
    cfg_.validate();
    const auto& ch = cfg_.channels;
    if (cfg_.kind == BackboneConfig::Kind::Full)
        stem_ = nn::ConvBn(ps, "backbone.stem", 3, ch[0], 7, 7, 2, 3, rng);
    else
        stem_ = nn::ConvBn(ps, "backbone.stem", 3, ch[0], 3, 3, 2, 1, rng);
    for (int s = 0; s < 4; ++s) {
        const int cin = ch[s], cout = ch[s + 1];
        const int mid = cout / cfg_.width_div;
        // stage 2 (s=0) downsamples via the stem max-pool; later stages via
        // their first block
        const int first_stride = s == 0 ? 1 : 2;
        for (int b = 0; b < cfg_.blocks[s]; ++b) {
            const std::string name =
                "backbone.s" + std::to_string(s + 2) + ".b" + std::to_string(b);
            stages_[s].emplace_back(ps, name, b == 0 ? cin : cout, cout, b == 0 ? first_stride : 1,
                                    cfg_.scale, mid, rng);
        }
    }
}

FeaturePyramid Res2NetBackbone::forward(const Var& x, bool training) const {
    if (x->value.ndim() != 4 || x->value.dim(1) != 3)
        throw std::invalid_argument("backbone: input must be [N,3,H,W]");
    const int h = x->value.dim(2), w = x->value.dim(3);
    if (h % 32 != 0 || w % 32 != 0 || h == 0 || w == 0)
        throw std::invalid_argument("backbone: input side must be divisible by 32");

    FeaturePyramid p;
    p.f[0] = stem_(x, training);
    Var cur = maxpool2d(p.f[0], 3, 2, 1);
    for (int s = 0; s < 4; ++s) {
        for (const auto& blk : stages_[s]) cur = blk.forward(cur, training);
        p.f[s + 1] = cur;
    }
    return p;
}

}  // namespace mfs::backbone
