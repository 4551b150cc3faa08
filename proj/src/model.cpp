#include "mfs/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mfs::model {

std::vector<int> AblationConfig::ba_levels() const {
    std::vector<int> out;
    for (int i = 0; i < 5; ++i)
        if (roles[i] == LevelRole::BA) out.push_back(i + 1);
    return out;
}

std::vector<int> AblationConfig::ra_levels() const {
    std::vector<int> out;
    for (int i = 0; i < 5; ++i)
        if (roles[i] == LevelRole::RA) out.push_back(i + 1);
    return out;
}

std::string AblationConfig::describe() const {
    std::ostringstream o;
    o << "roles";
    for (auto r : roles)
        o << ' ' << (r == LevelRole::None ? '-' : r == LevelRole::BA ? 'B' : 'R');
    o << " ppd " << (use_ppd ? 1 : 0) << " ba_source "
      << (ba_source == BaSource::Shallowest ? "shallowest"
                                            : ba_source == BaSource::Deepest ? "deepest" : "sum");
    return o.str();
}

std::string ModelConfig::describe() const {
    std::ostringstream o;
    o << "backbone{" << backbone.describe() << "} ablation{" << ablation.describe() << "} rfb "
      << rfb_width << " ra " << ra_width;
    return o.str();
}

uint64_t ModelConfig::hash() const { return nn::fnv1a(describe()); }

Mfsnet::Mfsnet(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
    nn::Rng rng(seed);
    backbone_.emplace(ps_, cfg_.backbone, rng);
    const auto& ch = cfg_.backbone.channels;

    if (cfg_.ablation.use_ppd) {
        rfb4_.emplace(ps_, "rfb4", ch[3], rng, cfg_.rfb_width);
        rfb5_.emplace(ps_, "rfb5", ch[4], rng, cfg_.rfb_width);
        ppd_.emplace(ps_, "ppd", cfg_.rfb_width, rng);
    } else {
        global_head_.emplace(ps_, "global_head", ch[4], 1, 1, 1, 1, 0, rng);
    }

    const auto ba_lv = cfg_.ablation.ba_levels();
    for (int lv : ba_lv)
        ba_.emplace(lv, attention::BoundaryAttention(ps_, "ba" + std::to_string(lv), ch[lv - 1], rng));

    int extra = 0;  // channel width of the boundary stream the RA branches see
    if (!ba_lv.empty())
        extra = cfg_.ablation.ba_source == AblationConfig::BaSource::Shallowest
                    ? ch[ba_lv.front() - 1]
                    : ch[ba_lv.back() - 1];
    for (int lv : cfg_.ablation.ra_levels())
        ra_.emplace(lv, attention::ReverseAttention(ps_, "ra" + std::to_string(lv), ch[lv - 1],
                                                    extra, rng, cfg_.ra_width));
}

// Merge the per-level gated boundary features into the single stream the RA
// branches consume. Deepest level fixes the spatial and channel frame; for
// Sum, shallower streams are resized and added into the leading channels.
Var Mfsnet::boundary_stream(const std::map<int, Var>& gated) const {
    if (gated.empty()) return nullptr;
    const auto mode = cfg_.ablation.ba_source;
    if (mode == AblationConfig::BaSource::Shallowest) return gated.begin()->second;
    Var deep = gated.rbegin()->second;
    if (mode == AblationConfig::BaSource::Deepest || gated.size() == 1) return deep;

    const int h = deep->value.dim(2), w = deep->value.dim(3);
    const int cd = deep->value.dim(1);
    Var acc = deep;
    for (auto it = gated.begin(); it != std::prev(gated.end()); ++it) {
        Var s = bilinear_resize(it->second, h, w);
        const int cs = s->value.dim(1);
        if (cs >= cd) {
            acc = add(acc, slice_ch(s, 0, cd));
        } else {
            Var head = add(slice_ch(acc, 0, cs), s);
            acc = concat_ch({head, slice_ch(acc, cs, cd)});
        }
    }
    return acc;
}

MfsnetOutputs Mfsnet::forward(const Var& x, bool training) const {
    const int ih = x->value.dim(2), iw = x->value.dim(3);
    const backbone::FeaturePyramid fp = backbone_->forward(x, training);

    MfsnetOutputs out;
    if (ppd_)
        out.o_s = ppd_->forward((*rfb4_)(fp.level(4), training), (*rfb5_)(fp.level(5), training),
                                training);
    else
        out.o_s = (*global_head_)(fp.level(5));

    // Boundary attention: every BA level is steered by the global map.
    std::map<int, Var> gated;
    for (const auto& [lv, mod] : ba_) {
        auto r = mod.forward(fp.level(lv), out.o_s->value);
        gated.emplace(lv, r.gated);
        out.ba_pred.emplace(lv, r.b_pred);
    }
    Var bstream = boundary_stream(gated);

    // Reverse attention cascades deepest-first, seeded by the global map.
    Var s_next = out.o_s;
    const auto ra_lv = cfg_.ablation.ra_levels();
    for (auto it = ra_lv.rbegin(); it != ra_lv.rend(); ++it) {
        Var o = ra_.at(*it).forward(fp.level(*it), bstream ? &bstream : nullptr, s_next, training);
        out.ra.emplace(*it, o);
        s_next = o;
    }

    out.final_logits = s_next;
    out.final_prob = sigmoid_v(bilinear_resize(out.final_logits, ih, iw));
    return out;
}

MfsnetOutputs Mfsnet::forward(const Tensor& x, bool training) const {
    return forward(constant(x), training);
}

BinaryMask Mfsnet::predict(const RgbImage& img, int side, bool preprocess,
                           const imgproc::HairRemovalParams& hair) const {
    RgbImage sized = imgproc::resize_rgb(img, side, side);
    if (preprocess) sized = imgproc::remove_hair(sized, hair);
    Tensor chw = imgproc::resize_normalize(sized, side);
    Tensor x({1, 3, side, side}, std::vector<double>(chw.data(), chw.data() + chw.numel()));
    const MfsnetOutputs out = forward(x, /*training=*/false);

    BinaryMask m(side, side);
    const double* p = out.final_prob->value.data();
    for (size_t i = 0; i < m.px.size(); ++i) m.px[i] = p[i] > 0.5 ? 1 : 0;
    if (img.h == side && img.w == side) return m;
    return imgproc::resize_mask_nearest(m, img.h, img.w);
}

void Mfsnet::save(const std::string& path, uint64_t seed) const {
    nn::CheckpointMeta meta;
    meta.config_hash = cfg_.hash();
    meta.seed = seed;
    nn::save_checkpoint(path, ps_, meta);
}

nn::CheckpointMeta Mfsnet::load(const std::string& path) {
    const nn::CheckpointMeta meta = nn::load_checkpoint(path, ps_);
    if (meta.config_hash != cfg_.hash())
        throw std::runtime_error("checkpoint was written by a different model configuration");
    return meta;
}

Var training_loss(const MfsnetOutputs& outs, const Tensor& g, const Tensor& gb,
                  const loss::LossWeights& lw) {
    lw.validate();
    if (g.ndim() != 4 || g.dim(1) != 1) throw std::invalid_argument("training_loss: g must be [N,1,H,W]");
    const int gh = g.dim(2), gw_ = g.dim(3);
    const Tensor w = loss::pixel_weights_t(g, lw.lambda_w, lw.pool_k);

    auto seg = [&](const Var& o) {
        Var up = bilinear_resize(o, gh, gw_);
        return add(scale(loss::weighted_bce(up, g, w), lw.delta),
                   scale(loss::weighted_iou(up, g, w, lw.eps), 1.0 - lw.delta));
    };

    Var total = seg(outs.o_s);
    for (const auto& [lv, o] : outs.ra) total = add(total, seg(o));
    for (const auto& [lv, b] : outs.ba_pred) total = add(total, loss::boundary_bce(b, gb));
    return total;
}

double train_step(Mfsnet& model, nn::Adam& opt, const Tensor& x, const Tensor& g, const Tensor& gb,
                  const loss::LossWeights& lw) {
    const MfsnetOutputs outs = model.forward(constant(x), /*training=*/true);
    Var l = training_loss(outs, g, gb, lw);
    const double lv = l->value.data()[0];
    if (!std::isfinite(lv)) {
        std::ostringstream o;
        o << "train_step: non-finite loss " << lv;
        throw std::runtime_error(o.str());
    }
    opt.zero_grad(model.params());
    backward(l);
    opt.step(model.params());
    return lv;
}

}  // namespace mfs::model
