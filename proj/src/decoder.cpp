#include "mfs/decoder.hpp"

#include <stdexcept>

namespace mfs::decoder {

RfbBlock::RfbBlock(nn::ParamStore& ps, const std::string& name, int cin, nn::Rng& rng, int width)
    : b0_(ps, name + ".b0", cin, width, 1, 1, 1, 0, rng),
      b1r_(ps, name + ".b1r", cin, width, 1, 1, 1, 0, rng),
      b1a_(ps, name + ".b1a", width, width, 1, 3, 1, 0, rng, 1, 1),
      b1b_(ps, name + ".b1b", width, width, 3, 1, 1, 1, rng, 1, 0),
      b1d_(ps, name + ".b1d", width, width, 3, 3, 1, 3, rng, 3),
      b2r_(ps, name + ".b2r", cin, width, 1, 1, 1, 0, rng),
      b2a_(ps, name + ".b2a", width, width, 1, 5, 1, 0, rng, 1, 2),
      b2b_(ps, name + ".b2b", width, width, 5, 1, 1, 2, rng, 1, 0),
      b2d_(ps, name + ".b2d", width, width, 3, 3, 1, 5, rng, 5),
      b3r_(ps, name + ".b3r", cin, width, 1, 1, 1, 0, rng),
      b3a_(ps, name + ".b3a", width, width, 1, 7, 1, 0, rng, 1, 3),
      b3b_(ps, name + ".b3b", width, width, 7, 1, 1, 3, rng, 1, 0),
      b3d_(ps, name + ".b3d", width, width, 3, 3, 1, 7, rng, 7),
      fuse_(ps, name + ".fuse", 4 * width, width, 3, 3, 1, 1, rng),
      short_(ps, name + ".short", cin, width, 1, 1, 1, 0, rng),
      width_(width) {}

Var RfbBlock::operator()(const Var& x, bool training) const {
    Var y0 = b0_(x, training);
    Var y1 = b1d_(b1b_(b1a_(b1r_(x, training), training), training), training);
    Var y2 = b2d_(b2b_(b2a_(b2r_(x, training), training), training), training);
    Var y3 = b3d_(b3b_(b3a_(b3r_(x, training), training), training), training);
    Var fused = fuse_(concat_ch({y0, y1, y2, y3}), training, /*with_relu=*/false);
    Var sc = short_(x, training, /*with_relu=*/false);
    return relu(add(fused, sc));
}

Ppd::Ppd(nn::ParamStore& ps, const std::string& name, int width, nn::Rng& rng)
    : fuse1_(ps, name + ".fuse1", 3 * width, width, 3, 3, 1, 1, rng),
      fuse2_(ps, name + ".fuse2", width, width, 3, 3, 1, 1, rng),
      head_(ps, name + ".head", width, 1, 1, 1, 1, 0, rng) {}

Var Ppd::forward(const Var& r4, const Var& r5, bool training) const {
    if (r4->value.ndim() != 4 || r5->value.ndim() != 4 ||
        r4->value.dim(1) != r5->value.dim(1) || r4->value.dim(0) != r5->value.dim(0))
        throw std::invalid_argument("ppd: inputs must be NCHW with equal batch and channels");
    const int h4 = r4->value.dim(2), w4 = r4->value.dim(3);
    if (r5->value.dim(2) * 2 != h4 || r5->value.dim(3) * 2 != w4)
        throw std::invalid_argument("ppd: deeper input must be exactly half the spatial size");

    Var up5 = bilinear_resize(r5, h4, w4);
    Var prod = mul(up5, r4);
    Var cat = concat_ch({prod, r4, up5});
    return head_(fuse2_(fuse1_(cat, training), training));
}

}  // namespace mfs::decoder
