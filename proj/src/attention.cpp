#include "mfs/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mfs::attention {

BinaryMask binarize_map(const Tensor& logits2d) {
    if (logits2d.ndim() != 2) throw std::invalid_argument("binarize_map: need [H,W]");
    BinaryMask m(logits2d.dim(0), logits2d.dim(1));
    const double* p = logits2d.data();
    for (int64_t i = 0; i < logits2d.numel(); ++i) m.px[i] = p[i] > 0.0 ? 1 : 0;
    return m;
}

namespace {

constexpr double kInf = 1e20;

// Lower envelope of parabolas (Felzenszwalb/Huttenlocher). f holds squared
// costs; d receives min_q (i-q)^2 + f[q].
void dt1d(const double* f, int n, double* d, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + static_cast<double>(q) * q) -
                    (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                   (2.0 * (q - v[k]));
        while (s <= z[k]) {
            --k;
            s = ((f[q] + static_cast<double>(q) * q) -
                 (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                (2.0 * (q - v[k]));
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

Tensor distance_transform(const BinaryMask& m) {
    const int h = m.h, w = m.w;
    Tensor out({h, w});

    bool any_zero = false;
    for (uint8_t p : m.px)
        if (p == 0) {
            any_zero = true;
            break;
        }
    if (!any_zero) {
        // No zero pixel inside: measure to the nearest point just outside
        // the image border so the transform stays finite.
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                out.at2(r, c) = static_cast<double>(std::min({r + 1, c + 1, h - r, w - c}));
        return out;
    }

    const int n = std::max(h, w);
    std::vector<double> f(n), d(n);
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    std::vector<double> g(static_cast<size_t>(h) * w);

    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) f[r] = m.px[static_cast<size_t>(r) * w + c] ? kInf : 0.0;
        dt1d(f.data(), h, d.data(), v.data(), z.data());
        for (int r = 0; r < h; ++r) g[static_cast<size_t>(r) * w + c] = d[r];
    }
    for (int r = 0; r < h; ++r) {
        dt1d(g.data() + static_cast<size_t>(r) * w, w, d.data(), v.data(), z.data());
        for (int c = 0; c < w; ++c) out.at2(r, c) = std::sqrt(d[c]);
    }
    return out;
}

Tensor boundary_mask(const BinaryMask& s) {
    BinaryMask inv(s.h, s.w);
    for (size_t i = 0; i < s.px.size(); ++i) inv.px[i] = s.px[i] ? 0 : 1;

    const Tensor df = distance_transform(s);
    const Tensor db = distance_transform(inv);
    double mf = 0.0, mb = 0.0;
    for (int64_t i = 0; i < df.numel(); ++i) mf = std::max(mf, df.data()[i]);
    for (int64_t i = 0; i < db.numel(); ++i) mb = std::max(mb, db.data()[i]);

    Tensor out({s.h, s.w});
    for (int64_t i = 0; i < out.numel(); ++i) {
        double d = 0.0;
        if (mf > 0.0) d += df.data()[i] / mf;
        if (mb > 0.0) d += db.data()[i] / mb;
        out.data()[i] = std::clamp(1.0 - d, 0.0, 1.0);
    }
    return out;
}

BinaryMask boundary_target(const BinaryMask& g) {
    const int h = g.h, w = g.w;
    BinaryMask out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            uint8_t lo = 1, hi = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int y = r + dy, x = c + dx;
                    // zero padding outside the image
                    const uint8_t v =
                        (y >= 0 && y < h && x >= 0 && x < w) ? g.px[static_cast<size_t>(y) * w + x] : 0;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            out.px[static_cast<size_t>(r) * w + c] = hi - lo;
        }
    return out;
}

Tensor ra_mask(const Tensor& up_logits, int c) {
    if (up_logits.ndim() != 2) throw std::invalid_argument("ra_mask: need [H,W]");
    if (c < 1) throw std::invalid_argument("ra_mask: bad channel count");
    const int h = up_logits.dim(0), w = up_logits.dim(1);
    Tensor out({c, h, w});
    const size_t plane = static_cast<size_t>(h) * w;
    for (size_t i = 0; i < plane; ++i) {
        const double v = 1.0 - 1.0 / (1.0 + std::exp(-up_logits.data()[i]));
        for (int ch = 0; ch < c; ++ch) out.data()[ch * plane + i] = v;
    }
    return out;
}

BoundaryAttention::BoundaryAttention(nn::ParamStore& ps, const std::string& name, int cin,
                                     nn::Rng& rng)
    : head_(ps, name + ".head", cin, 1, 1, 1, 1, 0, rng) {}

BoundaryAttention::Out BoundaryAttention::forward(const Var& f, const Tensor& global_logits) const {
    const int nb = f->value.dim(0), h = f->value.dim(2), w = f->value.dim(3);
    if (global_logits.ndim() != 4 || global_logits.dim(0) != nb || global_logits.dim(1) != 1)
        throw std::invalid_argument("BoundaryAttention: global map must be [N,1,h,w]");
    const Tensor up = bilinear_resize_t(global_logits, h, w);
    Tensor mask({nb, 1, h, w});
    const size_t plane = static_cast<size_t>(h) * w;
    for (int n = 0; n < nb; ++n) {
        Tensor sl({h, w});
        std::copy(up.data() + n * plane, up.data() + (n + 1) * plane, sl.data());
        const Tensor mb = boundary_mask(binarize_map(sl));
        std::copy(mb.data(), mb.data() + plane, mask.data() + n * plane);
    }
    Out o;
    o.gated = mul_mask(f, mask);
    o.b_pred = head_(o.gated);
    return o;
}

ReverseAttention::ReverseAttention(nn::ParamStore& ps, const std::string& name, int cin,
                                   int cin_extra, nn::Rng& rng, int width)
    : con1_(ps, name + ".con1", cin + cin_extra, width, 3, 3, 1, 1, rng),
      con2_(ps, name + ".con2", width, width, 3, 3, 1, 1, rng),
      head_(ps, name + ".head", width + 1, 1, 3, 3, 1, 1, rng),
      width_(width) {}

Var ReverseAttention::forward(const Var& f, const Var* extra, const Var& s_next,
                              bool training) const {
    const int nb = f->value.dim(0), h = f->value.dim(2), w = f->value.dim(3);
    if (s_next->value.ndim() != 4 || s_next->value.dim(0) != nb || s_next->value.dim(1) != 1)
        throw std::invalid_argument("ReverseAttention: s_next must be [N,1,h,w]");

    Var input = f;
    if (extra) input = concat_ch({f, bilinear_resize(*extra, h, w)});
    Var t = con2_(con1_(input, training), training);

    // The gating mask is data: no gradient through the reversed map.
    const Tensor up = bilinear_resize_t(s_next->value, h, w);
    Tensor mask({nb, 1, h, w});
    for (int64_t i = 0; i < mask.numel(); ++i)
        mask.data()[i] = 1.0 - 1.0 / (1.0 + std::exp(-up.data()[i]));
    Var o_r = mul_mask(t, mask);

    Var up_next = bilinear_resize(s_next, h, w);  // gradient path kept
    return head_(concat_ch({o_r, up_next}));
}

}  // namespace mfs::attention
