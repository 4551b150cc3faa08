#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "mfs/autograd.hpp"
#include "mfs/decoder.hpp"

using namespace mfs;
using namespace mfs::decoder;

namespace {

std::mt19937_64 g_gen(555);

Tensor randt(const std::vector<int>& shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(shape);
    std::uniform_real_distribution<double> u(lo, hi);
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = u(g_gen);
    return t;
}

double fd_worst(const std::vector<Var>& inputs, const std::function<Var()>& build) {
    for (const Var& in : inputs) in->grad = Tensor();
    Var out = build();
    const Tensor coeff = randt(out->value.shape());
    backward(sum_all(mul(out, constant(coeff))));
    const double h = 1e-6;
    double worst = 0;
    for (const Var& in : inputs)
        for (int64_t i = 0; i < in->value.numel(); ++i) {
            const double keep = in->value.data()[i];
            in->value.data()[i] = keep + h;
            Var up = build();
            double fp = 0;
            for (int64_t j = 0; j < up->value.numel(); ++j)
                fp += up->value.data()[j] * coeff.data()[j];
            in->value.data()[i] = keep - h;
            Var dn = build();
            double fm = 0;
            for (int64_t j = 0; j < dn->value.numel(); ++j)
                fm += dn->value.data()[j] * coeff.data()[j];
            in->value.data()[i] = keep;
            const double fd = (fp - fm) / (2 * h);
            const double an = in->grad.data()[i];
            worst =
                std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6}));
        }
    return worst;
}

}  // namespace

TEST_CASE("receptive-field block shapes and determinism") {
    nn::ParamStore ps;
    nn::Rng rng(21);
    RfbBlock rfb(ps, "rfb", 24, rng, 16);

    Var x = leaf(randt({2, 24, 10, 10}));
    Var y = rfb(x, false);
    CHECK(y->value.dim(0) == 2);
    CHECK(y->value.dim(1) == 16);
    CHECK(y->value.dim(2) == 10);
    CHECK(y->value.dim(3) == 10);
    for (int64_t i = 0; i < y->value.numel(); ++i) CHECK(std::isfinite(y->value.data()[i]));

    // Same parameters, same input: identical output.
    Var y2 = rfb(x, false);
    for (int64_t i = 0; i < y->value.numel(); ++i)
        CHECK(y->value.data()[i] == y2->value.data()[i]);

    // Nonnegative after the final rectification.
    for (int64_t i = 0; i < y->value.numel(); ++i) CHECK(y->value.data()[i] >= 0.0);

    // A fresh seed gives different parameters.
    nn::ParamStore ps3;
    nn::Rng rng3(22);
    RfbBlock other(ps3, "rfb", 24, rng3, 16);
    Var y3 = other(x, false);
    double diff = 0;
    for (int64_t i = 0; i < y->value.numel(); ++i)
        diff += std::abs(y->value.data()[i] - y3->value.data()[i]);
    CHECK(diff > 1e-6);
}

TEST_CASE("receptive-field block gradient check") {
    nn::ParamStore ps;
    nn::Rng rng(31);
    RfbBlock rfb(ps, "rfb", 6, rng, 8);
    Var x = leaf(randt({1, 6, 8, 8}));
    CHECK(fd_worst({x}, [&] { return rfb(x, false); }) < 1e-4);
}

TEST_CASE("partial decoder contract") {
    nn::ParamStore ps;
    nn::Rng rng(41);
    Ppd ppd(ps, "ppd", 8, rng);

    Var r4 = leaf(randt({2, 8, 8, 8}));
    Var r5 = leaf(randt({2, 8, 4, 4}));
    Var o = ppd.forward(r4, r5, false);
    CHECK(o->value.dim(0) == 2);
    CHECK(o->value.dim(1) == 1);
    CHECK(o->value.dim(2) == 8);
    CHECK(o->value.dim(3) == 8);
    for (int64_t i = 0; i < o->value.numel(); ++i) CHECK(std::isfinite(o->value.data()[i]));

    // The deep map multiplicatively gates the shallow one: an all-zero r5
    // kills the product path but the output must still be finite.
    Var z5 = leaf(Tensor({2, 8, 4, 4}));
    Var oz = ppd.forward(r4, z5, false);
    for (int64_t i = 0; i < oz->value.numel(); ++i) CHECK(std::isfinite(oz->value.data()[i]));

    // Spatial mismatch: r5 must be exactly half of r4.
    Var bad = leaf(randt({2, 8, 5, 5}));
    CHECK_THROWS_AS(ppd.forward(r4, bad, false), std::invalid_argument);
    Var badc = leaf(randt({2, 4, 4, 4}));
    CHECK_THROWS_AS(ppd.forward(r4, badc, false), std::invalid_argument);
}

TEST_CASE("partial decoder gradient check") {
    nn::ParamStore ps;
    nn::Rng rng(51);
    Ppd ppd(ps, "ppd", 4, rng);
    Var r4 = leaf(randt({1, 4, 6, 6}));
    Var r5 = leaf(randt({1, 4, 3, 3}));
    CHECK(fd_worst({r4, r5}, [&] { return ppd.forward(r4, r5, false); }) < 1e-4);
}
