#include "mfs/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace mfs::imgproc {

namespace {

inline uint8_t clamp_u8(long v) {
    return static_cast<uint8_t>(std::clamp<long>(v, 0, 255));
}

inline int reflect_clamp(int i, int n) { return std::clamp(i, 0, n - 1); }

bool is_cross(const StructuringElement& se) {
    const int mid = se.k / 2;
    for (int r = 0; r < se.k; ++r)
        for (int c = 0; c < se.k; ++c) {
            const bool on = (r == mid || c == mid);
            if ((se.at(r, c) != 0) != on) return false;
        }
    return true;
}

enum class Morph { Dilate, Erode };

// 1-D sliding extremum along rows then columns; a cross is the union of its
// middle row and column, so dilation(cross) = max of the two 1-D dilations
// (dually for erosion).
GrayImage morph_cross(const GrayImage& img, int k, Morph op) {
    const int h = img.h, w = img.w, r = k / 2;
    GrayImage horiz(h, w), vert(h, w), out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            uint8_t best = img.at(y, reflect_clamp(x - r, w));
            for (int d = -r + 1; d <= r; ++d) {
                uint8_t v = img.at(y, reflect_clamp(x + d, w));
                best = (op == Morph::Dilate) ? std::max(best, v) : std::min(best, v);
            }
            horiz.at(y, x) = best;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            uint8_t best = img.at(reflect_clamp(y - r, h), x);
            for (int d = -r + 1; d <= r; ++d) {
                uint8_t v = img.at(reflect_clamp(y + d, h), x);
                best = (op == Morph::Dilate) ? std::max(best, v) : std::min(best, v);
            }
            vert.at(y, x) = best;
        }
    for (size_t i = 0; i < out.px.size(); ++i)
        out.px[i] = (op == Morph::Dilate) ? std::max(horiz.px[i], vert.px[i])
                                          : std::min(horiz.px[i], vert.px[i]);
    return out;
}

GrayImage morph_general(const GrayImage& img, const StructuringElement& se, Morph op) {
    const int h = img.h, w = img.w, r = se.k / 2;
    GrayImage out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            uint8_t best = (op == Morph::Dilate) ? 0 : 255;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    if (!se.at(dy + r, dx + r)) continue;
                    uint8_t v = img.at(reflect_clamp(y + dy, h), reflect_clamp(x + dx, w));
                    best = (op == Morph::Dilate) ? std::max(best, v) : std::min(best, v);
                }
            out.at(y, x) = best;
        }
    return out;
}

GrayImage morph(const GrayImage& img, const StructuringElement& se, Morph op) {
    return is_cross(se) ? morph_cross(img, se.k, op) : morph_general(img, se, op);
}

}  // namespace

GrayImage to_grayscale(const RgbImage& img) {
    GrayImage out(img.h, img.w);
    for (int r = 0; r < img.h; ++r)
        for (int c = 0; c < img.w; ++c) {
            double y = 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) + 0.114 * img.at(r, c, 2);
            out.at(r, c) = clamp_u8(std::lround(y));
        }
    return out;
}

StructuringElement cross_element(int k) {
    if (k < 1 || k % 2 == 0)
        throw std::invalid_argument("cross_element: k must be odd and positive, got " +
                                    std::to_string(k));
    StructuringElement se;
    se.k = k;
    se.mask.assign(static_cast<size_t>(k) * k, 0);
    const int mid = k / 2;
    for (int i = 0; i < k; ++i) {
        se.mask[static_cast<size_t>(mid) * k + i] = 1;
        se.mask[static_cast<size_t>(i) * k + mid] = 1;
    }
    return se;
}

GrayImage dilate(const GrayImage& img, const StructuringElement& se) {
    return morph(img, se, Morph::Dilate);
}

GrayImage erode(const GrayImage& img, const StructuringElement& se) {
    return morph(img, se, Morph::Erode);
}

GrayImage blackhat(const GrayImage& img, const StructuringElement& se) {
    GrayImage closed = erode(dilate(img, se), se);
    GrayImage out(img.h, img.w);
    // closing is extensive for an origin-containing element, so this never underflows
    for (size_t i = 0; i < out.px.size(); ++i)
        out.px[i] = static_cast<uint8_t>(closed.px[i] - img.px[i]);
    return out;
}

BinaryMask threshold_mask(const GrayImage& bh, int t) {
    if (t < 0 || t > 255) throw std::invalid_argument("threshold_mask: t out of [0,255]");
    BinaryMask out(bh.h, bh.w);
    for (size_t i = 0; i < out.px.size(); ++i) out.px[i] = bh.px[i] > t ? 1 : 0;
    return out;
}

RgbImage inpaint_fmm(const RgbImage& img, const BinaryMask& mask, int radius) {
    if (mask.h != img.h || mask.w != img.w)
        throw std::invalid_argument("inpaint_fmm: mask dims mismatch");
    if (radius < 1) throw std::invalid_argument("inpaint_fmm: radius must be >= 1");

    const int h = img.h, w = img.w;
    RgbImage out = img;

    int64_t masked = mask.count();
    if (masked == 0) return out;
    if (masked == static_cast<int64_t>(h) * w)
        throw std::invalid_argument("inpaint_fmm: mask covers the entire image");

    enum : uint8_t { KNOWN = 0, BAND = 1, INSIDE = 2 };
    std::vector<uint8_t> state(static_cast<size_t>(h) * w);
    std::vector<double> T(static_cast<size_t>(h) * w);
    const double INF = std::numeric_limits<double>::infinity();
    for (int i = 0; i < h * w; ++i) {
        state[i] = mask.px[i] ? INSIDE : KNOWN;
        T[i] = mask.px[i] ? INF : 0.0;
    }

    auto idx = [w](int r, int c) { return static_cast<size_t>(r) * w + c; };
    const int dr4[4] = {-1, 1, 0, 0};
    const int dc4[4] = {0, 0, -1, 1};

    // eikonal update from KNOWN/BAND neighbours with finalized or tentative times
    auto solve_t = [&](int r, int c) {
        double a = INF, b = INF;
        if (r > 0 && state[idx(r - 1, c)] != INSIDE) a = std::min(a, T[idx(r - 1, c)]);
        if (r + 1 < h && state[idx(r + 1, c)] != INSIDE) a = std::min(a, T[idx(r + 1, c)]);
        if (c > 0 && state[idx(r, c - 1)] != INSIDE) b = std::min(b, T[idx(r, c - 1)]);
        if (c + 1 < w && state[idx(r, c + 1)] != INSIDE) b = std::min(b, T[idx(r, c + 1)]);
        if (a == INF && b == INF) return INF;
        if (a > b) std::swap(a, b);
        if (b - a >= 1.0) return a + 1.0;
        double d = a - b;
        return 0.5 * (a + b + std::sqrt(2.0 - d * d));
    };

    using HeapItem = std::tuple<double, int, int>;  // (T, r, c), lexicographic for determinism
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>> heap;

    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (state[idx(r, c)] != INSIDE) continue;
            bool frontier = false;
            for (int k = 0; k < 4; ++k) {
                int rr = r + dr4[k], cc = c + dc4[k];
                if (rr >= 0 && rr < h && cc >= 0 && cc < w && state[idx(rr, cc)] == KNOWN)
                    frontier = true;
            }
            if (frontier) {
                T[idx(r, c)] = solve_t(r, c);
                state[idx(r, c)] = BAND;
                heap.emplace(T[idx(r, c)], r, c);
            }
        }

    // neighbourhood offsets within euclidean distance <= radius
    std::vector<std::tuple<int, int, double>> nbr;  // (dr, dc, weight)
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            int d2 = dy * dy + dx * dx;
            if (d2 == 0 || d2 > radius * radius) continue;
            nbr.emplace_back(dy, dx, 1.0 / d2);
        }

    while (!heap.empty()) {
        auto [t, r, c] = heap.top();
        heap.pop();
        size_t p = idx(r, c);
        if (state[p] != BAND || t != T[p]) continue;  // stale entry
        state[p] = KNOWN;

        double wsum = 0.0, acc[3] = {0, 0, 0};
        for (auto& [dy, dx, wgt] : nbr) {
            int rr = r + dy, cc = c + dx;
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            if (state[idx(rr, cc)] != KNOWN) continue;
            wsum += wgt;
            for (int ch = 0; ch < 3; ++ch) acc[ch] += wgt * out.at(rr, cc, ch);
        }
        // a popped pixel always has a KNOWN 4-neighbour, so wsum > 0 for radius >= 1
        for (int ch = 0; ch < 3; ++ch)
            out.at(r, c, ch) = clamp_u8(std::lround(acc[ch] / wsum));

        for (int k = 0; k < 4; ++k) {
            int rr = r + dr4[k], cc = c + dc4[k];
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            size_t q = idx(rr, cc);
            if (state[q] == KNOWN) continue;
            double tq = solve_t(rr, cc);
            if (tq < T[q]) {
                T[q] = tq;
                state[q] = BAND;
                heap.emplace(tq, rr, cc);
            } else if (state[q] == INSIDE) {
                state[q] = BAND;
                heap.emplace(T[q] = tq, rr, cc);
            }
        }
    }
    return out;
}

RgbImage remove_hair(const RgbImage& img, const HairRemovalParams& p, HairRemovalStages* stages) {
    GrayImage gray = to_grayscale(img);
    GrayImage bh = blackhat(gray, cross_element(p.kernel));
    BinaryMask m = threshold_mask(bh, p.threshold);
    RgbImage out = inpaint_fmm(img, m, p.radius);
    if (stages) {
        stages->gray = std::move(gray);
        stages->blackhat = std::move(bh);
        stages->mask = std::move(m);
        stages->inpainted = out;
    }
    return out;
}

RgbImage resize_rgb(const RgbImage& img, int oh, int ow) {
    if (oh < 1 || ow < 1) throw std::invalid_argument("resize_rgb: empty target");
    if (oh == img.h && ow == img.w) return img;
    RgbImage out(oh, ow);
    const double sy = static_cast<double>(img.h) / oh;
    const double sx = static_cast<double>(img.w) / ow;
    for (int y = 0; y < oh; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int ya = reflect_clamp(y0, img.h), yb = reflect_clamp(y0 + 1, img.h);
        for (int x = 0; x < ow; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int xa = reflect_clamp(x0, img.w), xb = reflect_clamp(x0 + 1, img.w);
            for (int ch = 0; ch < 3; ++ch) {
                double v = (1 - wy) * ((1 - wx) * img.at(ya, xa, ch) + wx * img.at(ya, xb, ch)) +
                           wy * ((1 - wx) * img.at(yb, xa, ch) + wx * img.at(yb, xb, ch));
                out.at(y, x, ch) = clamp_u8(std::lround(v));
            }
        }
    }
    return out;
}

BinaryMask resize_mask_nearest(const BinaryMask& m, int oh, int ow) {
    if (oh == m.h && ow == m.w) return m;
    BinaryMask out(oh, ow);
    const double sy = static_cast<double>(m.h) / oh;
    const double sx = static_cast<double>(m.w) / ow;
    for (int y = 0; y < oh; ++y) {
        int ys = std::min(static_cast<int>((y + 0.5) * sy), m.h - 1);
        for (int x = 0; x < ow; ++x) {
            int xs = std::min(static_cast<int>((x + 0.5) * sx), m.w - 1);
            out.at(y, x) = m.at(ys, xs);
        }
    }
    return out;
}

Tensor normalize_chw(const RgbImage& img) {
    Tensor t({3, img.h, img.w});
    for (int ch = 0; ch < 3; ++ch)
        for (int r = 0; r < img.h; ++r)
            for (int c = 0; c < img.w; ++c)
                t[(static_cast<int64_t>(ch) * img.h + r) * img.w + c] =
                    (img.at(r, c, ch) / 255.0 - kNormMean[ch]) / kNormStd[ch];
    return t;
}

Tensor resize_normalize(const RgbImage& img, int side) {
    if (side < 32) throw std::invalid_argument("resize_normalize: side must be >= 32");
    return normalize_chw(resize_rgb(img, side, side));
}

}  // namespace mfs::imgproc
