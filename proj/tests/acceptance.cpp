// Acceptance gate: each numbered criterion below is a hard pass/fail check
// with its tolerance pinned in code. Run as `acceptance <n>`; every check
// prints exactly one "criterion n: PASS/FAIL" line and exits accordingly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfs/attention.hpp"
#include "mfs/autograd.hpp"
#include "mfs/config.hpp"
#include "mfs/dataset.hpp"
#include "mfs/harness.hpp"
#include "mfs/imgproc.hpp"
#include "mfs/loss.hpp"
#include "mfs/metrics.hpp"
#include "mfs/model.hpp"

using namespace mfs;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream why;
    void fail(const std::string& msg) {
        if (!ok) return;  // keep the first reason
        ok = false;
        why << msg;
    }
    void expect(bool cond, const std::string& msg) {
        if (!cond) fail(msg);
    }
};

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

BinaryMask random_mask(std::mt19937_64& gen, int h, int w, double p_on) {
    BinaryMask m(h, w);
    std::bernoulli_distribution bit(p_on);
    for (auto& v : m.px) v = bit(gen) ? 1 : 0;
    return m;
}

Tensor random_tensor(std::mt19937_64& gen, const std::vector<int>& shape, double lo, double hi) {
    Tensor t(shape);
    std::uniform_real_distribution<double> u(lo, hi);
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = u(gen);
    return t;
}

std::string fmt_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1fs", s);
    return buf;
}

// ---- criterion 1: metric implementations vs a counting oracle ----

struct OracleScores {
    double dsc, iou, fm, sen, spe;
};

OracleScores oracle(const BinaryMask& s, const BinaryMask& g) {
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (size_t i = 0; i < s.px.size(); ++i) {
        const bool ps = s.px[i] != 0, pg = g.px[i] != 0;
        tp += ps && pg;
        fp += ps && !pg;
        fn += !ps && pg;
        tn += !ps && !pg;
    }
    OracleScores o{};
    o.dsc = (tp + fp + fn == 0) ? 1.0 : 2 * tp / (2 * tp + fp + fn);
    o.iou = (tp + fp + fn == 0) ? 1.0 : tp / (tp + fp + fn);
    const double pden = tp + fp, rden = tp + fn;
    if (pden == 0 && rden == 0) {
        o.fm = 1.0;
    } else {
        const double prec = pden == 0 ? 0.0 : tp / pden;
        const double rec = rden == 0 ? 0.0 : tp / rden;
        o.fm = (prec + rec == 0) ? 0.0 : 2 * prec * rec / (prec + rec);
    }
    o.sen = (rden == 0) ? 1.0 : tp / rden;
    o.spe = (fp + tn == 0) ? 1.0 : tn / (fp + tn);
    return o;
}

bool criterion_1(Check& c) {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(101);
    const double tol = 1e-12;
    std::uniform_real_distribution<double> dens(0.0, 1.0);
    for (int trial = 0; trial < 200 && c.ok; ++trial) {
        BinaryMask s = random_mask(gen, 16, 16, dens(gen));
        BinaryMask g = random_mask(gen, 16, 16, dens(gen));
        if (trial == 0) { s.px.assign(s.px.size(), 0); g.px.assign(g.px.size(), 0); }
        if (trial == 1) { s.px.assign(s.px.size(), 1); g.px.assign(g.px.size(), 1); }
        if (trial == 2) g.px.assign(g.px.size(), 0);
        if (trial == 3) g.px.assign(g.px.size(), 1);
        const OracleScores o = oracle(s, g);
        const double d = metrics::dsc(s, g), i = metrics::iou(s, g), f = metrics::fmeasure(s, g);
        c.expect(std::abs(d - o.dsc) <= tol, "dsc mismatch at trial " + std::to_string(trial));
        c.expect(std::abs(i - o.iou) <= tol, "iou mismatch at trial " + std::to_string(trial));
        c.expect(std::abs(f - o.fm) <= tol, "fm mismatch at trial " + std::to_string(trial));
        c.expect(std::abs(metrics::sensitivity(s, g) - o.sen) <= tol,
                 "sen mismatch at trial " + std::to_string(trial));
        c.expect(std::abs(metrics::specificity(s, g) - o.spe) <= tol,
                 "spe mismatch at trial " + std::to_string(trial));
        // Pairwise identities: DSC = 2 IoU / (1 + IoU) and FM = DSC.
        c.expect(std::abs(d - 2 * i / (1 + i)) <= tol, "dsc/iou identity broken");
        c.expect(std::abs(f - d) <= tol, "fm/dsc identity broken");
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    c.expect(secs < 5.0, "exceeded 5s budget: " + fmt_seconds(secs));
    if (c.ok) c.why << "200 pairs within 1e-12, identities hold, " << fmt_seconds(secs);
    return c.ok;
}

// ---- criterion 2: distance transform vs brute force ----

Tensor brute_dt(const BinaryMask& m) {
    Tensor d({m.h, m.w});
    bool any_zero = false;
    for (auto v : m.px) any_zero |= v == 0;
    for (int r = 0; r < m.h; ++r)
        for (int col = 0; col < m.w; ++col) {
            double best;
            if (any_zero) {
                best = 1e300;
                for (int rr = 0; rr < m.h; ++rr)
                    for (int cc = 0; cc < m.w; ++cc)
                        if (m.px[static_cast<size_t>(rr) * m.w + cc] == 0) {
                            const double dy = r - rr, dx = col - cc;
                            best = std::min(best, std::sqrt(dy * dy + dx * dx));
                        }
            } else {
                best = std::min(std::min(r + 1, col + 1), std::min(m.h - r, m.w - col));
            }
            d.at2(r, col) = best;
        }
    return d;
}

bool criterion_2(Check& c) {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(202);
    std::uniform_real_distribution<double> dens(0.0, 1.0);
    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        BinaryMask m = random_mask(gen, 8, 8, dens(gen));
        if (trial == 0) m.px.assign(m.px.size(), 0);
        if (trial == 1) m.px.assign(m.px.size(), 1);
        const Tensor fast = attention::distance_transform(m);
        const Tensor slow = brute_dt(m);
        for (int64_t i = 0; i < fast.numel() && c.ok; ++i)
            c.expect(fast.data()[i] == slow.data()[i],
                     "dt mismatch at trial " + std::to_string(trial));
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    c.expect(secs < 30.0, "exceeded 30s budget: " + fmt_seconds(secs));
    if (c.ok) c.why << "1000 masks exactly equal, " << fmt_seconds(secs);
    return c.ok;
}

// ---- criterion 3: reverse-attention mask literal ----

bool criterion_3(Check& c) {
    std::mt19937_64 gen(303);
    std::uniform_int_distribution<int> dim(3, 24), chans(1, 8);
    for (int trial = 0; trial < 100 && c.ok; ++trial) {
        const int sh = dim(gen), sw = dim(gen), th = dim(gen), tw = dim(gen);
        const Tensor raw = random_tensor(gen, {sh, sw}, -6.0, 6.0);
        const Tensor up = bilinear_resize_t(raw, th, tw);
        const int cch = chans(gen);
        const Tensor m = attention::ra_mask(up, cch);
        c.expect(m.shape() == std::vector<int>{cch, th, tw},
                 "ra_mask shape wrong at trial " + std::to_string(trial));
        if (!c.ok) break;
        const int64_t plane = static_cast<int64_t>(th) * tw;
        for (int64_t i = 0; i < plane && c.ok; ++i) {
            const double want = 1.0 - 1.0 / (1.0 + std::exp(-up.data()[i]));
            c.expect(std::abs(m.data()[i] - want) <= 1e-6,
                     "ra_mask value off at trial " + std::to_string(trial));
            for (int ch = 1; ch < cch; ++ch)
                c.expect(m.data()[ch * plane + i] == m.data()[i],
                         "ra_mask channels differ at trial " + std::to_string(trial));
        }
    }
    if (c.ok) c.why << "100 maps match 1 - sigmoid within 1e-6, channels identical";
    return c.ok;
}

// ---- criterion 4: boundary-attention mask properties ----

bool criterion_4(Check& c) {
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> dens(0.0, 1.0);
    auto checked = [&](const BinaryMask& s, const std::string& tag) {
        const Tensor b = attention::boundary_mask(s);
        for (int64_t i = 0; i < b.numel(); ++i) {
            const double v = b.data()[i];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                c.fail("boundary mask out of [0,1] on " + tag);
                return b;
            }
        }
        return b;
    };
    for (int trial = 0; trial < 50 && c.ok; ++trial) {
        const BinaryMask s = random_mask(gen, 16, 16, dens(gen));
        BinaryMask inv(s.h, s.w);
        for (size_t i = 0; i < s.px.size(); ++i) inv.px[i] = s.px[i] ? 0 : 1;
        const Tensor b = checked(s, "random");
        const Tensor bi = checked(inv, "complement");
        for (int64_t i = 0; i < b.numel() && c.ok; ++i)
            c.expect(std::abs(b.data()[i] - bi.data()[i]) <= 1e-12,
                     "complement symmetry broken at trial " + std::to_string(trial));
    }
    checked(BinaryMask(12, 12, 0), "all-zero");
    checked(BinaryMask(12, 12, 1), "all-one");
    if (c.ok) c.why << "range, complement symmetry and degenerate masks all hold";
    return c.ok;
}

// ---- criterion 5: analytic gradients vs finite differences ----

double fd_probe(const std::function<double()>& eval, double* slot, double h) {
    const double keep = *slot;
    *slot = keep + h;
    const double up = eval();
    *slot = keep - h;
    const double dn = eval();
    *slot = keep;
    return (up - dn) / (2 * h);
}

bool criterion_5(Check& c) {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(505);
    loss::LossWeights lw;
    lw.pool_k = 5;  // small window keeps 8x8 weights nontrivial

    // Part 1: hybrid loss on random 8x8 toys.
    {
        Tensor lg = random_tensor(gen, {1, 1, 8, 8}, -2.0, 2.0);
        Tensor g({1, 1, 8, 8});
        std::bernoulli_distribution bit(0.5);
        for (int64_t i = 0; i < g.numel(); ++i) g.data()[i] = bit(gen) ? 1.0 : 0.0;
        Var x = leaf(lg);
        Var out = loss::hybrid_loss(x, g, lw);
        backward(out);
        double worst = 0;
        const auto eval = [&]() { return loss::hybrid_loss(leaf(x->value), g, lw)->value.data()[0]; };
        for (int64_t i = 0; i < x->value.numel(); i += 5) {
            const double fd = fd_probe(eval, x->value.data() + i, 1e-6);
            worst = std::max(worst, rel_err(x->grad.data()[i], fd));
        }
        c.expect(worst < 1e-4, "hybrid loss fd rel err " + std::to_string(worst));
    }

    // Part 2: the five-term objective, probing every head's logits.
    if (c.ok) {
        Tensor g({1, 1, 8, 8}), gb({1, 1, 8, 8});
        std::bernoulli_distribution bit(0.4);
        for (int64_t i = 0; i < g.numel(); ++i) g.data()[i] = bit(gen) ? 1.0 : 0.0;
        for (int64_t i = 0; i < gb.numel(); ++i) gb.data()[i] = bit(gen) ? 1.0 : 0.0;
        loss::SupervisedOutputs outs;
        outs.o_s = leaf(random_tensor(gen, {1, 1, 4, 4}, -2.0, 2.0));
        outs.o4 = leaf(random_tensor(gen, {1, 1, 4, 4}, -2.0, 2.0));
        outs.o5 = leaf(random_tensor(gen, {1, 1, 2, 2}, -2.0, 2.0));
        outs.b2 = leaf(random_tensor(gen, {1, 1, 8, 8}, -2.0, 2.0));
        outs.b3 = leaf(random_tensor(gen, {1, 1, 4, 4}, -2.0, 2.0));
        Var total = loss::total_loss(outs, g, gb, lw);
        backward(total);
        const auto eval = [&]() { return loss::total_loss(outs, g, gb, lw)->value.data()[0]; };
        double worst = 0;
        for (Var v : {outs.o_s, outs.o4, outs.o5, outs.b2, outs.b3}) {
            Tensor grad = v->grad;  // keep; eval() rebuilds the graph on the same leaves
            for (int64_t i = 0; i < v->value.numel(); i += 3) {
                const double fd = fd_probe(eval, v->value.data() + i, 1e-6);
                worst = std::max(worst, rel_err(grad.data()[i], fd));
            }
        }
        c.expect(worst < 1e-4, "five-term loss fd rel err " + std::to_string(worst));
    }

    // Part 3: end-to-end through the model. Probed parameters must not feed
    // any gradient-stopped mask: the level-4 reverse-attention weights only
    // shape that level's own refinement (the gating mask there comes from the
    // deepest map alone), and the boundary heads only feed the boundary
    // terms, so central differences see the same masks on both sides.
    if (c.ok) {
        model::ModelConfig mc;
        mc.backbone = backbone::BackboneConfig::toy();
        mc.rfb_width = 16;
        mc.ra_width = 16;
        model::Mfsnet m(mc, 7);
        loss::LossWeights mlw;  // default pool window
        const auto s = dataset::synth_sample(12, 64, true);
        const Tensor x3 = imgproc::resize_normalize(s.image, 64);
        Tensor x({1, 3, 64, 64});
        std::copy(x3.data(), x3.data() + x3.numel(), x.data());
        Tensor g({1, 1, 64, 64}), gb({1, 1, 64, 64});
        const BinaryMask gbm = attention::boundary_target(s.mask);
        for (int64_t i = 0; i < g.numel(); ++i) {
            g.data()[i] = s.mask.px[static_cast<size_t>(i)];
            gb.data()[i] = gbm.px[static_cast<size_t>(i)];
        }
        const auto eval = [&]() {
            return model::training_loss(m.forward(x, true), g, gb, mlw)->value.data()[0];
        };
        Var root = model::training_loss(m.forward(x, true), g, gb, mlw);
        backward(root);

        double worst = 0;
        int probed = 0;
        for (const auto& [name, p] : m.params().params()) {
            const bool safe = name.rfind("ra4.", 0) == 0 ||
                              (name.rfind("ba", 0) == 0 && name.find(".head.") != std::string::npos);
            if (!safe || p->grad.numel() == 0) continue;
            // Two spread-out elements per parameter tensor.
            for (int64_t i : {int64_t(0), p->value.numel() / 2}) {
                const double fd = fd_probe(eval, p->value.data() + i, 1e-5);
                worst = std::max(worst, rel_err(p->grad.data()[i], fd));
                ++probed;
            }
        }
        c.expect(probed >= 10, "too few probe points: " + std::to_string(probed));
        c.expect(worst < 1e-3, "end-to-end fd rel err " + std::to_string(worst));
        if (c.ok) c.why << probed << " model probes, ";
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    c.expect(secs < 120.0, "exceeded 2min budget: " + fmt_seconds(secs));
    if (c.ok) c.why << "loss fd < 1e-4, model fd < 1e-3, " << fmt_seconds(secs);
    return c.ok;
}

// ---- criterion 6: output contract at full working resolution ----

bool criterion_6(Check& c) {
    model::ModelConfig mc;
    mc.backbone = backbone::BackboneConfig::toy();
    model::Mfsnet m(mc, 3);
    std::mt19937_64 gen(606);
    const Tensor x = random_tensor(gen, {1, 3, 256, 256}, -1.5, 1.5);
    const model::MfsnetOutputs out = m.forward(x, false);

    auto want = [&](const Var& v, int hw, const std::string& tag) {
        c.expect(bool(v), tag + " missing");
        if (v) c.expect(v->value.shape() == std::vector<int>{1, 1, hw, hw},
                        tag + " is " + v->value.shape_str() + ", want " + std::to_string(hw));
    };
    want(out.o_s, 16, "global map");          // stride 16
    want(out.ra.count(4) ? out.ra.at(4) : Var(), 16, "level-4 refinement");
    want(out.ra.count(5) ? out.ra.at(5) : Var(), 8, "level-5 refinement");
    want(out.ba_pred.count(2) ? out.ba_pred.at(2) : Var(), 64, "level-2 boundary");  // stride 4
    want(out.ba_pred.count(3) ? out.ba_pred.at(3) : Var(), 32, "level-3 boundary");  // stride 8
    c.expect(bool(out.final_prob), "final probability map missing");
    if (out.final_prob) {
        c.expect(out.final_prob->value.shape() == std::vector<int>{1, 1, 256, 256},
                 "final map not at input size");
        for (int64_t i = 0; i < out.final_prob->value.numel() && c.ok; ++i) {
            const double v = out.final_prob->value.data()[i];
            c.expect(std::isfinite(v) && v >= 0.0 && v <= 1.0, "final map value outside [0,1]");
        }
    }

    // Liveness: each objective term alone must move at least one parameter.
    if (c.ok) {
        Tensor g({1, 1, 256, 256}, 0.0), gb({1, 1, 256, 256}, 0.0);
        for (int r = 96; r < 160; ++r)
            for (int col = 96; col < 160; ++col) g.data()[r * 256 + col] = 1.0;
        for (int col = 96; col < 160; ++col) gb.data()[96 * 256 + col] = 1.0;
        loss::LossWeights lw;
        const char* names[5] = {"global", "boundary-2", "boundary-3", "refine-4", "refine-5"};
        for (int term = 0; term < 5 && c.ok; ++term) {
            loss::TotalLossTerms only{};
            only.o_s = term == 0;
            only.b2 = term == 1;
            only.b3 = term == 2;
            only.o4 = term == 3;
            only.o5 = term == 4;
            for (const auto& [name, p] : m.params().params()) p->grad = Tensor();
            const model::MfsnetOutputs o = m.forward(x, true);
            loss::SupervisedOutputs five;
            five.o_s = o.o_s;
            five.o4 = o.ra.at(4);
            five.o5 = o.ra.at(5);
            five.b2 = o.ba_pred.at(2);
            five.b3 = o.ba_pred.at(3);
            backward(loss::total_loss(five, g, gb, lw, only));
            double gmax = 0;
            for (const auto& [name, p] : m.params().params())
                for (int64_t i = 0; i < p->grad.numel(); ++i)
                    gmax = std::max(gmax, std::abs(p->grad.data()[i]));
            c.expect(gmax > 0, std::string("term ") + names[term] + " moves no parameter");
        }
    }
    if (c.ok) c.why << "256 input contract holds, every term reaches parameters";
    return c.ok;
}

// ---- criterion 7: single-image overfit ----

bool criterion_7(Check& c) {
    const auto t0 = Clock::now();
    Config cfg = harness::default_config();
    cfg.set("train.flips", "false");
    cfg.set("train.epochs", "200");  // 1 image, batch 1: one step per epoch
    cfg.set("train.batch", "1");
    harness::RunOptions opt = harness::RunOptions::from_config(cfg);
    opt.seed = 3;

    const auto s = dataset::synth_sample(3, opt.side, true);
    const harness::PreparedSample ps = harness::prepare_sample(s.image, s.mask, opt);
    model::Mfsnet m(opt.model, opt.seed);
    harness::train_model(m, {ps}, opt);
    const BinaryMask pred = m.predict(s.image, opt.side, opt.preprocess, opt.hair);
    const double d = metrics::dsc(pred, s.mask);
    c.expect(d >= 0.95, "training DSC " + std::to_string(d) + " < 0.95 after 200 steps");
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    c.expect(secs < 180.0, "exceeded 3min budget: " + fmt_seconds(secs));
    if (c.ok) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "DSC %.3f after 200 steps, %s", d, fmt_seconds(secs).c_str());
        c.why << buf;
    }
    return c.ok;
}

// ---- criterion 8: cross-validated quality and the preprocessing margin ----

bool criterion_8(Check& c) {
    const auto t0 = Clock::now();
    const fs::path root = fs::temp_directory_path() / "mfs_accept_cv";
    fs::remove_all(root);
    const auto idx = dataset::synth_dataset(root.string(), 200, 11, 128, true);

    Config cfg = harness::default_config();
    harness::RunOptions opt = harness::RunOptions::from_config(cfg);
    opt.seed = 11;
    const harness::CvResult with = harness::run_cv(idx, opt, cfg, "");
    auto mean_dsc = [](const harness::CvResult& r) {
        double s = 0;
        for (const auto& f : r.folds) s += f.summary.mean[0];
        return s / r.folds.size();
    };
    const double d_pre = mean_dsc(with);
    c.expect(with.folds.size() == 5, "expected 5 folds");
    c.expect(d_pre >= 0.90, "mean test DSC " + std::to_string(d_pre) + " < 0.90");

    opt.preprocess = false;
    const harness::CvResult without = harness::run_cv(idx, opt, cfg, "");
    const double d_raw = mean_dsc(without);
    c.expect(d_raw < d_pre, "no-preprocess DSC " + std::to_string(d_raw) +
                                " not below preprocessed " + std::to_string(d_pre));
    fs::remove_all(root);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    c.expect(secs < 1800.0, "exceeded 30min budget: " + fmt_seconds(secs));
    if (c.ok) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "DSC %.3f with preprocessing vs %.3f without, %s", d_pre,
                      d_raw, fmt_seconds(secs).c_str());
        c.why << buf;
    }
    return c.ok;
}

// ---- criterion 9: artifact removal on known fields ----

bool criterion_9(Check& c) {
    // Thin dark strokes on a flat field disappear to within 2 gray levels.
    const int side = 64;
    RgbImage flat(side, side);
    for (auto& v : flat.px) v = 180;
    RgbImage hairy = flat;
    auto darken = [&](int r, int col) {
        for (int ch = 0; ch < 3; ++ch)
            hairy.px[(static_cast<size_t>(r) * side + col) * 3 + ch] = 30;
    };
    for (int col = 4; col < 60; ++col) darken(16, col);             // horizontal
    for (int r = 8; r < 56; ++r) darken(r, 40);                     // vertical
    for (int i = 0; i < 40; ++i) darken(10 + i, 6 + i);             // diagonal
    const RgbImage cleaned = imgproc::remove_hair(hairy);
    double diff = 0;
    for (size_t i = 0; i < cleaned.px.size(); ++i)
        diff += std::abs(int(cleaned.px[i]) - int(flat.px[i]));
    diff /= double(cleaned.px.size());
    c.expect(diff <= 2.0, "mean abs diff after removal " + std::to_string(diff) + " > 2");

    // Inpainting with an empty mask is the identity, bit for bit.
    std::mt19937_64 gen(909);
    RgbImage noisy(24, 24);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& v : noisy.px) v = static_cast<uint8_t>(byte(gen));
    const RgbImage same = imgproc::inpaint_fmm(noisy, BinaryMask(24, 24, 0), 1);
    c.expect(same.px == noisy.px, "empty-mask inpaint changed pixels");

    // Blackhat of a constant image is exactly zero.
    GrayImage gray(32, 32);
    for (auto& v : gray.px) v = 97;
    const GrayImage bh = imgproc::blackhat(gray, imgproc::cross_element(17));
    for (auto v : bh.px)
        if (v != 0) {
            c.fail("blackhat of a constant image is nonzero");
            break;
        }
    if (c.ok) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "stroke residue %.3f <= 2, identities exact", diff);
        c.why << buf;
    }
    return c.ok;
}

// ---- criterion 10: report layouts and byte reproducibility ----

bool criterion_10(Check& c) {
    const fs::path root = fs::temp_directory_path() / "mfs_accept_reports";
    fs::remove_all(root);
    fs::create_directories(root);
    const auto idx = dataset::synth_dataset((root / "data").string(), 20, 77, 64, true);

    Config cfg = harness::default_config();
    cfg.set("preprocess.side", "64");
    cfg.set("train.epochs", "1");
    cfg.set("train.batch", "4");
    cfg.set("model.rfb_width", "8");
    cfg.set("model.ra_width", "8");
    harness::RunOptions opt = harness::RunOptions::from_config(cfg);
    opt.seed = 9;

    auto data_rows = [](const std::string& csv) {
        std::istringstream in(csv);
        std::string line;
        int n = 0;
        bool past_header = false;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (!past_header) {  // column header
                past_header = true;
                continue;
            }
            ++n;
        }
        return n;
    };

    const harness::AblationResult ab = harness::run_ablation(idx, opt, cfg, (root / "ab").string());
    c.expect(ab.orientation_csv.find("Instance,Conv1,Conv2,Conv3,Conv4,Conv5,mDSC") !=
                 std::string::npos,
             "orientation header missing");
    c.expect(data_rows(ab.orientation_csv) == 6, "orientation table must have 6 rows");
    c.expect(ab.orientation_csv.find("Proposed") != std::string::npos, "Proposed row missing");
    c.expect(ab.component_csv.find("Architecture,") != std::string::npos,
             "component header missing");
    c.expect(data_rows(ab.component_csv) == 7, "component table must have 7 rows");
    c.expect(ab.component_csv.find("Res2Net+BA+RA+PPD (Proposed)") != std::string::npos,
             "full-model component row missing");

    const std::string sweep =
        harness::sweep_delta(idx, harness::default_delta_grid(), opt, cfg, "");
    c.expect(sweep.find("delta,mDSC,mIoU") != std::string::npos, "sweep header missing");
    for (const char* d : {"0.10", "0.30", "0.50", "0.70", "0.90"})
        c.expect(sweep.find(std::string("\n") + d + ",") != std::string::npos,
                 std::string("sweep grid row ") + d + " missing");

    const harness::CvResult cv = harness::run_cv(idx, opt, cfg, "");
    c.expect(cv.csv.find("Dataset,Fold,mDSC,mIoU,mFM,mSen,mSpe") != std::string::npos,
             "cv header missing");
    c.expect(cv.csv.find("Average") != std::string::npos, "cv Average row missing");
    c.expect(cv.csv.find("±") != std::string::npos, "cv Average must carry a spread");

    // Byte-for-byte reproducibility of all three reports under the same seed.
    if (c.ok) {
        const harness::AblationResult ab2 =
            harness::run_ablation(idx, opt, cfg, (root / "ab2").string());
        c.expect(ab2.orientation_csv == ab.orientation_csv &&
                     ab2.orientation_md == ab.orientation_md &&
                     ab2.component_csv == ab.component_csv && ab2.component_md == ab.component_md,
                 "ablation reports not reproducible");
        const std::string sweep2 =
            harness::sweep_delta(idx, harness::default_delta_grid(), opt, cfg, "");
        c.expect(sweep2 == sweep, "delta sweep not reproducible");
        const harness::CvResult cv2 = harness::run_cv(idx, opt, cfg, "");
        c.expect(cv2.csv == cv.csv && cv2.markdown == cv.markdown, "cv report not reproducible");
    }
    fs::remove_all(root);
    if (c.ok) c.why << "layouts hold and repeat byte-identically";
    return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: acceptance <1..10>\n";
        return 2;
    }
    const int n = std::atoi(argv[1]);
    Check c;
    bool ok = false;
    try {
        switch (n) {
            case 1: ok = criterion_1(c); break;
            case 2: ok = criterion_2(c); break;
            case 3: ok = criterion_3(c); break;
            case 4: ok = criterion_4(c); break;
            case 5: ok = criterion_5(c); break;
            case 6: ok = criterion_6(c); break;
            case 7: ok = criterion_7(c); break;
            case 8: ok = criterion_8(c); break;
            case 9: ok = criterion_9(c); break;
            case 10: ok = criterion_10(c); break;
            default: std::cerr << "usage: acceptance <1..10>\n"; return 2;
        }
    } catch (const std::exception& e) {
        ok = false;
        c.why.str("");
        c.why << "exception: " << e.what();
    }
    std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << " (" << c.why.str() << ")"
              << std::endl;
    return ok ? 0 : 1;
}
