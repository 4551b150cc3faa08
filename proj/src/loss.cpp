#include "mfs/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mfs::loss {

void LossWeights::validate() const {
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in [0,1]");
    if (lambda_w < 0.0) throw std::invalid_argument("lambda_w must be >= 0");
    if (pool_k < 1 || pool_k % 2 == 0) throw std::invalid_argument("pool_k must be odd and >= 1");
    if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
}

namespace {

// Clipped-window mean via a summed-area table; divides by the in-image count.
void weight_plane(const double* g, int h, int w, double lambda_w, int pool_k, double* out) {
    const int half = pool_k / 2;
    std::vector<double> sat(static_cast<size_t>(h + 1) * (w + 1), 0.0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            sat[(r + 1) * (w + 1) + (c + 1)] = g[r * w + c] + sat[r * (w + 1) + (c + 1)] +
                                               sat[(r + 1) * (w + 1) + c] - sat[r * (w + 1) + c];
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const int r0 = std::max(0, r - half), r1 = std::min(h - 1, r + half);
            const int c0 = std::max(0, c - half), c1 = std::min(w - 1, c + half);
            const double sum = sat[(r1 + 1) * (w + 1) + (c1 + 1)] - sat[r0 * (w + 1) + (c1 + 1)] -
                               sat[(r1 + 1) * (w + 1) + c0] + sat[r0 * (w + 1) + c0];
            const double mean = sum / ((r1 - r0 + 1) * (c1 - c0 + 1));
            out[r * w + c] = 1.0 + lambda_w * std::fabs(mean - g[r * w + c]);
        }
}

void check_plane_shape(const Tensor& g) {
    if (g.ndim() == 2) return;
    if (g.ndim() == 4 && g.dim(1) == 1) return;
    throw std::invalid_argument("expected [H,W] or [N,1,H,W], got " + g.shape_str());
}

}  // namespace

Tensor pixel_weights_t(const Tensor& g, double lambda_w, int pool_k) {
    if (lambda_w < 0.0 || pool_k < 1 || pool_k % 2 == 0)
        throw std::invalid_argument("pixel_weights: bad lambda_w/pool_k");
    check_plane_shape(g);
    const int h = g.ndim() == 2 ? g.dim(0) : g.dim(2);
    const int w = g.ndim() == 2 ? g.dim(1) : g.dim(3);
    const int planes = g.ndim() == 2 ? 1 : g.dim(0);
    Tensor out(g.shape());
    for (int p = 0; p < planes; ++p)
        weight_plane(g.data() + static_cast<size_t>(p) * h * w, h, w, lambda_w, pool_k,
                     out.data() + static_cast<size_t>(p) * h * w);
    return out;
}

Tensor pixel_weights(const BinaryMask& g, double lambda_w, int pool_k) {
    Tensor t({g.h, g.w});
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = g.px[i];
    return pixel_weights_t(t, lambda_w, pool_k);
}

Var weighted_bce(const Var& logits, const Tensor& g, const Tensor& w) {
    if (!g.same_shape(logits->value) || !w.same_shape(logits->value))
        throw std::invalid_argument("weighted_bce: shape mismatch");
    const double* px = logits->value.data();
    const double* pg = g.data();
    const double* pw = w.data();
    double num = 0.0, den = 0.0;
    for (int64_t i = 0; i < g.numel(); ++i) {
        const double x = px[i];
        // max(x,0) - x*z + log1p(exp(-|x|)) is BCE-with-logits, stable at saturation
        const double bce = std::max(x, 0.0) - x * pg[i] + std::log1p(std::exp(-std::fabs(x)));
        num += pw[i] * bce;
        den += pw[i];
    }
    Tensor gc = g, wc = w;
    const double den_s = den;
    return make_op(Tensor::scalar(num / den), {logits}, [logits, gc, wc, den_s](Node& n) {
        const double gscale = n.grad.data()[0] / den_s;
        Tensor gl(logits->value.shape());
        const double* px = logits->value.data();
        for (int64_t i = 0; i < gl.numel(); ++i) {
            const double s = 1.0 / (1.0 + std::exp(-px[i]));
            gl.data()[i] = gscale * wc.data()[i] * (s - gc.data()[i]);
        }
        logits->accumulate(gl);
    });
}

Var weighted_iou(const Var& logits, const Tensor& g, const Tensor& w, double eps) {
    if (!g.same_shape(logits->value) || !w.same_shape(logits->value))
        throw std::invalid_argument("weighted_iou: shape mismatch");
    const double* px = logits->value.data();
    const double* pg = g.data();
    const double* pw = w.data();
    double inter = 0.0, uni = 0.0;
    for (int64_t i = 0; i < g.numel(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-px[i]));
        inter += pw[i] * p * pg[i];
        uni += pw[i] * (p + pg[i] - p * pg[i]);
    }
    const double loss = 1.0 - (inter + eps) / (uni + eps);
    Tensor gc = g, wc = w;
    return make_op(Tensor::scalar(loss), {logits}, [logits, gc, wc, eps, inter, uni](Node& n) {
        const double gs = n.grad.data()[0];
        const double ie = inter + eps, ue = uni + eps;
        Tensor gl(logits->value.shape());
        const double* px = logits->value.data();
        for (int64_t i = 0; i < gl.numel(); ++i) {
            const double p = 1.0 / (1.0 + std::exp(-px[i]));
            const double gi = gc.data()[i];
            // d loss / d p = w * (ie*(1-g) - g*ue) / ue^2
            const double dldp = wc.data()[i] * (ie * (1.0 - gi) - gi * ue) / (ue * ue);
            gl.data()[i] = gs * dldp * p * (1.0 - p);
        }
        logits->accumulate(gl);
    });
}

Var hybrid_loss(const Var& logits, const Tensor& g, const LossWeights& lw) {
    lw.validate();
    const Tensor w = pixel_weights_t(g, lw.lambda_w, lw.pool_k);
    Var bce = weighted_bce(logits, g, w);
    Var iou = weighted_iou(logits, g, w, lw.eps);
    return add(scale(bce, lw.delta), scale(iou, 1.0 - lw.delta));
}

Var boundary_bce(const Var& logits, const Tensor& gb) {
    Tensor target = gb;
    if (!target.same_shape(logits->value)) {
        const bool four = logits->value.ndim() == 4;
        target = maxpool_to_t(gb, four ? logits->value.dim(2) : logits->value.dim(0),
                              four ? logits->value.dim(3) : logits->value.dim(1));
        if (!target.same_shape(logits->value))
            throw std::invalid_argument("boundary_bce: target/prediction shape mismatch");
    }
    const double* px = logits->value.data();
    const double* pt = target.data();
    const double m = static_cast<double>(logits->value.numel());
    double sum = 0.0;
    for (int64_t i = 0; i < logits->value.numel(); ++i) {
        const double x = px[i];
        sum += std::max(x, 0.0) - x * pt[i] + std::log1p(std::exp(-std::fabs(x)));
    }
    Tensor tc = target;
    return make_op(Tensor::scalar(sum / m), {logits}, [logits, tc, m](Node& n) {
        const double gs = n.grad.data()[0] / m;
        Tensor gl(logits->value.shape());
        const double* px = logits->value.data();
        for (int64_t i = 0; i < gl.numel(); ++i) {
            const double s = 1.0 / (1.0 + std::exp(-px[i]));
            gl.data()[i] = gs * (s - tc.data()[i]);
        }
        logits->accumulate(gl);
    });
}

Var total_loss(const SupervisedOutputs& outs, const Tensor& g, const Tensor& gb,
               const LossWeights& lw, const TotalLossTerms& terms) {
    lw.validate();
    const bool four = g.ndim() == 4;
    if (!four && g.ndim() != 2) throw std::invalid_argument("total_loss: g must be [H,W] or [N,1,H,W]");
    const int gh = four ? g.dim(2) : g.dim(0);
    const int gw = four ? g.dim(3) : g.dim(1);

    const Tensor w = pixel_weights_t(g, lw.lambda_w, lw.pool_k);
    auto seg_term = [&](const Var& o, double tw, const char* key) -> Var {
        if (tw == 0.0) return nullptr;
        if (!o) throw std::invalid_argument(std::string("total_loss: missing output ") + key);
        Var up = four ? bilinear_resize(o, gh, gw) : o;
        if (!four && !o->value.same_shape(g))
            throw std::invalid_argument("total_loss: 2-D mode needs matching shapes");
        Var bce = weighted_bce(up, g, w);
        Var iou = weighted_iou(up, g, w, lw.eps);
        Var h = add(scale(bce, lw.delta), scale(iou, 1.0 - lw.delta));
        return tw == 1.0 ? h : scale(h, tw);
    };
    auto bnd_term = [&](const Var& o, double tw, const char* key) -> Var {
        if (tw == 0.0) return nullptr;
        if (!o) throw std::invalid_argument(std::string("total_loss: missing output ") + key);
        Var b = boundary_bce(o, gb);
        return tw == 1.0 ? b : scale(b, tw);
    };

    Var total;
    for (Var t : {seg_term(outs.o_s, terms.o_s, "o_s"), bnd_term(outs.b2, terms.b2, "b2"),
                  bnd_term(outs.b3, terms.b3, "b3"), seg_term(outs.o4, terms.o4, "o4"),
                  seg_term(outs.o5, terms.o5, "o5")}) {
        if (!t) continue;
        total = total ? add(total, t) : t;
    }
    if (!total) throw std::invalid_argument("total_loss: all terms disabled");
    return total;
}

}  // namespace mfs::loss
