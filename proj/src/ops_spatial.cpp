#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mfs/autograd.hpp"

namespace mfs {

namespace {

struct ConvDims {
    int n, cin, h, w, cout, kh, kw, stride, ph, pw, dil, oh, ow;
};

ConvDims conv_dims(const Tensor& x, const Tensor& w, int stride, int ph, int pw, int dil) {
    if (x.ndim() != 4 || w.ndim() != 4) throw std::invalid_argument("conv2d: need NCHW input and OIHW weight");
    ConvDims d;
    d.n = x.dim(0);
    d.cin = x.dim(1);
    d.h = x.dim(2);
    d.w = x.dim(3);
    d.cout = w.dim(0);
    d.kh = w.dim(2);
    d.kw = w.dim(3);
    d.stride = stride;
    d.ph = ph;
    d.pw = pw;
    d.dil = dil;
    if (w.dim(1) != d.cin) throw std::invalid_argument("conv2d: channel mismatch");
    if (stride < 1 || ph < 0 || pw < 0 || dil < 1) throw std::invalid_argument("conv2d: bad hyperparams");
    const int ekh = (d.kh - 1) * dil + 1;
    const int ekw = (d.kw - 1) * dil + 1;
    d.oh = (d.h + 2 * ph - ekh) / stride + 1;
    d.ow = (d.w + 2 * pw - ekw) / stride + 1;
    if (d.oh < 1 || d.ow < 1) throw std::invalid_argument("conv2d: output would be empty");
    return d;
}

// cols: [cin*kh*kw, oh*ow], row index (ci, ky, kx).
void im2col(const double* x, const ConvDims& d, double* cols) {
    const int ohw = d.oh * d.ow;
    for (int ci = 0; ci < d.cin; ++ci) {
        const double* xc = x + static_cast<size_t>(ci) * d.h * d.w;
        for (int ky = 0; ky < d.kh; ++ky)
            for (int kx = 0; kx < d.kw; ++kx) {
                double* row = cols + (static_cast<size_t>(ci) * d.kh * d.kw + ky * d.kw + kx) * ohw;
                for (int oy = 0; oy < d.oh; ++oy) {
                    const int iy = oy * d.stride - d.ph + ky * d.dil;
                    if (iy < 0 || iy >= d.h) {
                        std::fill(row + oy * d.ow, row + (oy + 1) * d.ow, 0.0);
                        continue;
                    }
                    const double* xr = xc + static_cast<size_t>(iy) * d.w;
                    double* rr = row + oy * d.ow;
                    for (int ox = 0; ox < d.ow; ++ox) {
                        const int ix = ox * d.stride - d.pw + kx * d.dil;
                        rr[ox] = (ix >= 0 && ix < d.w) ? xr[ix] : 0.0;
                    }
                }
            }
    }
}

void col2im_acc(const double* cols, const ConvDims& d, double* x) {
    const int ohw = d.oh * d.ow;
    for (int ci = 0; ci < d.cin; ++ci) {
        double* xc = x + static_cast<size_t>(ci) * d.h * d.w;
        for (int ky = 0; ky < d.kh; ++ky)
            for (int kx = 0; kx < d.kw; ++kx) {
                const double* row = cols + (static_cast<size_t>(ci) * d.kh * d.kw + ky * d.kw + kx) * ohw;
                for (int oy = 0; oy < d.oh; ++oy) {
                    const int iy = oy * d.stride - d.ph + ky * d.dil;
                    if (iy < 0 || iy >= d.h) continue;
                    double* xr = xc + static_cast<size_t>(iy) * d.w;
                    const double* rr = row + oy * d.ow;
                    for (int ox = 0; ox < d.ow; ++ox) {
                        const int ix = ox * d.stride - d.pw + kx * d.dil;
                        if (ix >= 0 && ix < d.w) xr[ix] += rr[ox];
                    }
                }
            }
    }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad_h, int pad_w, int dil) {
    const ConvDims d = conv_dims(x->value, w->value, stride, pad_h, pad_w, dil);
    const bool has_bias = b && !b->value.empty();
    if (has_bias && (b->value.ndim() != 1 || b->value.dim(0) != d.cout))
        throw std::invalid_argument("conv2d: bias shape");

    const int k = d.cin * d.kh * d.kw;
    const int ohw = d.oh * d.ow;
    Tensor out({d.n, d.cout, d.oh, d.ow});
    std::vector<double> cols(static_cast<size_t>(k) * ohw);
    for (int n = 0; n < d.n; ++n) {
        im2col(x->value.data() + static_cast<size_t>(n) * d.cin * d.h * d.w, d, cols.data());
        double* on = out.data() + static_cast<size_t>(n) * d.cout * ohw;
        cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, d.cout, ohw, k, 1.0,
                    w->value.data(), k, cols.data(), ohw, 0.0, on, ohw);
        if (has_bias)
            for (int co = 0; co < d.cout; ++co) {
                const double bv = b->value[co];
                double* oc = on + static_cast<size_t>(co) * ohw;
                for (int i = 0; i < ohw; ++i) oc[i] += bv;
            }
    }

    std::vector<Var> parents = has_bias ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
    return make_op(std::move(out), std::move(parents), [x, w, b, d, has_bias](Node& n) {
        const int k = d.cin * d.kh * d.kw;
        const int ohw = d.oh * d.ow;
        std::vector<double> cols(static_cast<size_t>(k) * ohw);
        Tensor dw(w->value.shape(), 0.0);
        Tensor dx(x->value.shape(), 0.0);
        Tensor db;
        if (has_bias && b->requires_grad) db = Tensor(b->value.shape(), 0.0);
        const bool need_dx = x->requires_grad;
        const bool need_dw = w->requires_grad;
        for (int bi = 0; bi < d.n; ++bi) {
            const double* gn = n.grad.data() + static_cast<size_t>(bi) * d.cout * ohw;
            if (need_dw || need_dx)
                im2col(x->value.data() + static_cast<size_t>(bi) * d.cin * d.h * d.w, d, cols.data());
            if (need_dw)
                cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, d.cout, k, ohw, 1.0, gn, ohw,
                            cols.data(), ohw, 1.0, dw.data(), k);
            if (need_dx) {
                // reuse cols as dcols = W^T * g
                cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, k, ohw, d.cout, 1.0,
                            w->value.data(), k, gn, ohw, 0.0, cols.data(), ohw);
                col2im_acc(cols.data(), d, dx.data() + static_cast<size_t>(bi) * d.cin * d.h * d.w);
            }
            if (!db.empty())
                for (int co = 0; co < d.cout; ++co) {
                    const double* gc = gn + static_cast<size_t>(co) * ohw;
                    double s = 0.0;
                    for (int i = 0; i < ohw; ++i) s += gc[i];
                    db.data()[co] += s;
                }
        }
        if (need_dx) x->accumulate(dx);
        if (need_dw) w->accumulate(dw);
        if (!db.empty()) b->accumulate(db);
    });
}

Var maxpool2d(const Var& x, int k, int stride, int pad) {
    if (x->value.ndim() != 4) throw std::invalid_argument("maxpool2d: need NCHW");
    if (k < 1 || stride < 1 || pad < 0 || pad >= k) throw std::invalid_argument("maxpool2d: bad hyperparams");
    const int nb = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
    const int oh = (h + 2 * pad - k) / stride + 1;
    const int ow = (w + 2 * pad - k) / stride + 1;
    if (oh < 1 || ow < 1) throw std::invalid_argument("maxpool2d: output would be empty");
    Tensor out({nb, c, oh, ow});
    auto argmax = std::make_shared<std::vector<int>>(static_cast<size_t>(nb) * c * oh * ow);
    const double* px = x->value.data();
    double* po = out.data();
    size_t oi = 0;
    for (int n = 0; n < nb; ++n)
        for (int ch = 0; ch < c; ++ch) {
            const double* plane = px + (static_cast<size_t>(n) * c + ch) * h * w;
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox, ++oi) {
                    double best = -std::numeric_limits<double>::infinity();
                    int besti = -1;
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= w) continue;
                            const double v = plane[iy * w + ix];
                            if (v > best) {
                                best = v;
                                besti = iy * w + ix;
                            }
                        }
                    }
                    po[oi] = best;
                    (*argmax)[oi] = besti;
                }
        }
    return make_op(std::move(out), {x}, [x, argmax, nb, c, h, w, oh, ow](Node& n) {
        Tensor g(x->value.shape(), 0.0);
        const double* pg = n.grad.data();
        size_t oi = 0;
        for (int b = 0; b < nb; ++b)
            for (int ch = 0; ch < c; ++ch) {
                double* plane = g.data() + (static_cast<size_t>(b) * c + ch) * h * w;
                const size_t cnt = static_cast<size_t>(oh) * ow;
                for (size_t i = 0; i < cnt; ++i, ++oi) plane[(*argmax)[oi]] += pg[oi];
            }
        x->accumulate(g);
    });
}

namespace {

struct LerpAxis {
    std::vector<int> i0, i1;
    std::vector<double> w1;  // weight of i1; weight of i0 is 1-w1
};

LerpAxis lerp_axis(int in, int out) {
    LerpAxis a;
    a.i0.resize(out);
    a.i1.resize(out);
    a.w1.resize(out);
    const double s = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
        double src = (o + 0.5) * s - 0.5;
        if (src < 0) src = 0;
        if (src > in - 1) src = in - 1;
        const int f = static_cast<int>(src);
        a.i0[o] = f;
        a.i1[o] = std::min(f + 1, in - 1);
        a.w1[o] = src - f;
    }
    return a;
}

void resize_plane(const double* in, int h [[maybe_unused]], int w, const LerpAxis& ay, const LerpAxis& ax, int oh,
                  int ow, double* out) {
    for (int oy = 0; oy < oh; ++oy) {
        const double* r0 = in + static_cast<size_t>(ay.i0[oy]) * w;
        const double* r1 = in + static_cast<size_t>(ay.i1[oy]) * w;
        const double wy = ay.w1[oy];
        double* po = out + static_cast<size_t>(oy) * ow;
        for (int ox = 0; ox < ow; ++ox) {
            const double wx = ax.w1[ox];
            const double top = r0[ax.i0[ox]] * (1 - wx) + r0[ax.i1[ox]] * wx;
            const double bot = r1[ax.i0[ox]] * (1 - wx) + r1[ax.i1[ox]] * wx;
            po[ox] = top * (1 - wy) + bot * wy;
        }
    }
}

}  // namespace

Var bilinear_resize(const Var& x, int oh, int ow) {
    if (x->value.ndim() != 4) throw std::invalid_argument("bilinear_resize: need NCHW");
    if (oh < 1 || ow < 1) throw std::invalid_argument("bilinear_resize: bad size");
    const int nb = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
    if (h == oh && w == ow) {
        Tensor out = x->value;
        return make_op(std::move(out), {x}, [x](Node& n) { x->accumulate(n.grad); });
    }
    const LerpAxis ay = lerp_axis(h, oh);
    const LerpAxis ax = lerp_axis(w, ow);
    Tensor out({nb, c, oh, ow});
    for (int n = 0; n < nb; ++n)
        for (int ch = 0; ch < c; ++ch)
            resize_plane(x->value.data() + (static_cast<size_t>(n) * c + ch) * h * w, h, w, ay, ax,
                         oh, ow, out.data() + (static_cast<size_t>(n) * c + ch) * oh * ow);
    return make_op(std::move(out), {x}, [x, ay, ax, nb, c, h, w, oh, ow](Node& n) {
        Tensor g(x->value.shape(), 0.0);
        for (int b = 0; b < nb; ++b)
            for (int ch = 0; ch < c; ++ch) {
                const double* pg = n.grad.data() + (static_cast<size_t>(b) * c + ch) * oh * ow;
                double* pd = g.data() + (static_cast<size_t>(b) * c + ch) * h * w;
                for (int oy = 0; oy < oh; ++oy) {
                    const double wy = ay.w1[oy];
                    for (int ox = 0; ox < ow; ++ox) {
                        const double wx = ax.w1[ox];
                        const double gv = pg[oy * ow + ox];
                        pd[ay.i0[oy] * w + ax.i0[ox]] += gv * (1 - wy) * (1 - wx);
                        pd[ay.i0[oy] * w + ax.i1[ox]] += gv * (1 - wy) * wx;
                        pd[ay.i1[oy] * w + ax.i0[ox]] += gv * wy * (1 - wx);
                        pd[ay.i1[oy] * w + ax.i1[ox]] += gv * wy * wx;
                    }
                }
            }
        x->accumulate(g);
    });
}

Tensor bilinear_resize_t(const Tensor& x, int oh, int ow) {
    const bool flat = x.ndim() == 2;
    const int nb = flat ? 1 : x.dim(0);
    const int c = flat ? 1 : x.dim(1);
    const int h = flat ? x.dim(0) : x.dim(2);
    const int w = flat ? x.dim(1) : x.dim(3);
    if (!flat && x.ndim() != 4) throw std::invalid_argument("bilinear_resize_t: need [H,W] or NCHW");
    if (h == oh && w == ow) return x;
    const LerpAxis ay = lerp_axis(h, oh);
    const LerpAxis ax = lerp_axis(w, ow);
    Tensor out(flat ? std::vector<int>{oh, ow} : std::vector<int>{nb, c, oh, ow});
    for (int n = 0; n < nb * c; ++n)
        resize_plane(x.data() + static_cast<size_t>(n) * h * w, h, w, ay, ax, oh, ow,
                     out.data() + static_cast<size_t>(n) * oh * ow);
    return out;
}

Tensor maxpool_to_t(const Tensor& x, int oh, int ow) {
    const bool flat = x.ndim() == 2;
    const int nb = flat ? 1 : x.dim(0);
    const int c = flat ? 1 : x.dim(1);
    const int h = flat ? x.dim(0) : x.dim(2);
    const int w = flat ? x.dim(1) : x.dim(3);
    if (!flat && x.ndim() != 4) throw std::invalid_argument("maxpool_to_t: need [H,W] or NCHW");
    if (oh < 1 || ow < 1 || h % oh != 0 || w % ow != 0)
        throw std::invalid_argument("maxpool_to_t: dims must be integer multiples of target");
    const int fy = h / oh, fx = w / ow;
    Tensor out(flat ? std::vector<int>{oh, ow} : std::vector<int>{nb, c, oh, ow});
    for (int n = 0; n < nb * c; ++n) {
        const double* in = x.data() + static_cast<size_t>(n) * h * w;
        double* po = out.data() + static_cast<size_t>(n) * oh * ow;
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                for (int ky = 0; ky < fy; ++ky)
                    for (int kx = 0; kx < fx; ++kx)
                        best = std::max(best, in[(oy * fy + ky) * w + ox * fx + kx]);
                po[oy * ow + ox] = best;
            }
    }
    return out;
}

Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta, Tensor& running_mean,
                Tensor& running_var, bool training, double momentum, double eps) {
    if (x->value.ndim() != 4) throw std::invalid_argument("batchnorm2d: need NCHW");
    const int nb = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
    if (gamma->value.numel() != c || beta->value.numel() != c ||
        running_mean.numel() != c || running_var.numel() != c)
        throw std::invalid_argument("batchnorm2d: per-channel params must have C elements");
    const size_t plane = static_cast<size_t>(h) * w;
    const double m = static_cast<double>(nb) * plane;

    Tensor mean({c}), var({c});
    if (training) {
        for (int ch = 0; ch < c; ++ch) {
            double s = 0.0;
            for (int n = 0; n < nb; ++n) {
                const double* p = x->value.data() + (static_cast<size_t>(n) * c + ch) * plane;
                for (size_t i = 0; i < plane; ++i) s += p[i];
            }
            mean[ch] = s / m;
            double v = 0.0;
            for (int n = 0; n < nb; ++n) {
                const double* p = x->value.data() + (static_cast<size_t>(n) * c + ch) * plane;
                for (size_t i = 0; i < plane; ++i) {
                    const double d = p[i] - mean[ch];
                    v += d * d;
                }
            }
            var[ch] = v / m;
        }
        const double unbias = m > 1.5 ? m / (m - 1.0) : 1.0;
        for (int ch = 0; ch < c; ++ch) {
            running_mean[ch] = (1.0 - momentum) * running_mean[ch] + momentum * mean[ch];
            running_var[ch] = (1.0 - momentum) * running_var[ch] + momentum * var[ch] * unbias;
        }
    } else {
        mean = running_mean;
        var = running_var;
    }

    Tensor out(x->value.shape());
    Tensor istd({c});
    for (int ch = 0; ch < c; ++ch) istd[ch] = 1.0 / std::sqrt(var[ch] + eps);
    for (int n = 0; n < nb; ++n)
        for (int ch = 0; ch < c; ++ch) {
            const double* p = x->value.data() + (static_cast<size_t>(n) * c + ch) * plane;
            double* o = out.data() + (static_cast<size_t>(n) * c + ch) * plane;
            const double mu = mean[ch], is = istd[ch], ga = gamma->value[ch], be = beta->value[ch];
            for (size_t i = 0; i < plane; ++i) o[i] = ga * (p[i] - mu) * is + be;
        }

    Tensor mean_s = mean, istd_s = istd;
    return make_op(std::move(out), {x, gamma, beta},
                   [x, gamma, beta, mean_s, istd_s, nb, c, plane, m, training](Node& n) {
        Tensor dgamma({c}, 0.0), dbeta({c}, 0.0);
        for (int ch = 0; ch < c; ++ch) {
            double sg = 0.0, sb = 0.0;
            for (int b = 0; b < nb; ++b) {
                const double* pg = n.grad.data() + (static_cast<size_t>(b) * c + ch) * plane;
                const double* px = x->value.data() + (static_cast<size_t>(b) * c + ch) * plane;
                for (size_t i = 0; i < plane; ++i) {
                    sg += pg[i] * (px[i] - mean_s[ch]) * istd_s[ch];
                    sb += pg[i];
                }
            }
            dgamma[ch] = sg;
            dbeta[ch] = sb;
        }
        if (x->requires_grad) {
            Tensor dx(x->value.shape());
            for (int ch = 0; ch < c; ++ch) {
                const double ga = gamma->value[ch], is = istd_s[ch], mu = mean_s[ch];
                if (training) {
                    // dxhat = g*gamma; dx = is/m * (m*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
                    const double sdx = dbeta[ch] * ga;
                    const double sdxx = dgamma[ch] * ga;
                    for (int b = 0; b < nb; ++b) {
                        const double* pg = n.grad.data() + (static_cast<size_t>(b) * c + ch) * plane;
                        const double* px = x->value.data() + (static_cast<size_t>(b) * c + ch) * plane;
                        double* pd = dx.data() + (static_cast<size_t>(b) * c + ch) * plane;
                        for (size_t i = 0; i < plane; ++i) {
                            const double xhat = (px[i] - mu) * is;
                            pd[i] = is / m * (m * pg[i] * ga - sdx - xhat * sdxx);
                        }
                    }
                } else {
                    for (int b = 0; b < nb; ++b) {
                        const double* pg = n.grad.data() + (static_cast<size_t>(b) * c + ch) * plane;
                        double* pd = dx.data() + (static_cast<size_t>(b) * c + ch) * plane;
                        for (size_t i = 0; i < plane; ++i) pd[i] = pg[i] * ga * is;
                    }
                }
            }
            x->accumulate(dx);
        }
        if (gamma->requires_grad) gamma->accumulate(dgamma);
        if (beta->requires_grad) beta->accumulate(dbeta);
    });
}

}  // namespace mfs
