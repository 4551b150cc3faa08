#include "mfs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mfs/attention.hpp"
#include "mfs/imageio.hpp"
#include "mfs/imgproc.hpp"

namespace mfs::harness {

namespace {

model::AblationConfig::BaSource parse_ba_source(const std::string& s) {
    if (s == "shallowest" || s == "level2") return model::AblationConfig::BaSource::Shallowest;
    if (s == "deepest" || s == "level3") return model::AblationConfig::BaSource::Deepest;
    if (s == "sum") return model::AblationConfig::BaSource::Sum;
    throw std::invalid_argument("unknown ba_source: " + s);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write: " + path);
    f << text;
}

}  // namespace

Config default_config() {
    Config c;
    c.set("preprocess.enabled", "true");
    c.set("preprocess.threshold", "10");
    c.set("preprocess.kernel", "17");
    c.set("preprocess.radius", "1");
    c.set("preprocess.side", "128");
    c.set("train.lr", "0.001");
    c.set("train.epochs", "6");
    c.set("train.batch", "8");
    c.set("train.clip_norm", "0.5");
    c.set("train.flips", "true");
    c.set("loss.delta", "0.9");
    c.set("loss.lambda_w", "5");
    c.set("loss.pool_k", "31");
    c.set("loss.eps", "1");
    c.set("model.backbone", "toy");
    c.set("model.rfb_width", "32");
    c.set("model.ra_width", "64");
    c.set("model.ba_source", "deepest");
    c.set("cv.folds", "5");
    return c;
}

RunOptions RunOptions::from_config(const Config& cfg) {
    RunOptions o;
    o.side = static_cast<int>(cfg.get_int("preprocess.side", 128));
    o.preprocess = cfg.get_bool("preprocess.enabled", true);
    o.hair.threshold = static_cast<int>(cfg.get_int("preprocess.threshold", 10));
    o.hair.kernel = static_cast<int>(cfg.get_int("preprocess.kernel", 17));
    o.hair.radius = static_cast<int>(cfg.get_int("preprocess.radius", 1));
    o.epochs = static_cast<int>(cfg.get_int("train.epochs", 6));
    o.batch = static_cast<int>(cfg.get_int("train.batch", 8));
    o.lr = cfg.get_real("train.lr", 1e-3);
    o.clip_norm = cfg.get_real("train.clip_norm", 0.5);
    o.flips = cfg.get_bool("train.flips", true);
    o.lw.delta = cfg.get_real("loss.delta", 0.9);
    o.lw.lambda_w = cfg.get_real("loss.lambda_w", 5.0);
    o.lw.pool_k = static_cast<int>(cfg.get_int("loss.pool_k", 31));
    o.lw.eps = cfg.get_real("loss.eps", 1.0);
    o.lw.validate();

    const std::string kind = cfg.get("model.backbone", "toy");
    if (kind == "toy")
        o.model.backbone = backbone::BackboneConfig::toy();
    else if (kind == "full")
        o.model.backbone = backbone::BackboneConfig::full();
    else
        throw std::invalid_argument("unknown backbone: " + kind);
    o.model.rfb_width = static_cast<int>(cfg.get_int("model.rfb_width", 32));
    o.model.ra_width = static_cast<int>(cfg.get_int("model.ra_width", 64));
    o.model.ablation.ba_source = parse_ba_source(cfg.get("model.ba_source", "deepest"));
    o.folds = static_cast<int>(cfg.get_int("cv.folds", 5));
    if (o.side < 32 || o.side % 32 != 0)
        throw std::invalid_argument("preprocess.side must be a positive multiple of 32");
    if (o.epochs < 1 || o.batch < 1) throw std::invalid_argument("train.epochs/batch must be >= 1");
    return o;
}

std::string report_header(const Config& cfg, uint64_t seed) {
    std::ostringstream o;
    o << "# seed = " << seed << '\n';
    std::istringstream lines(cfg.dump());
    std::string line;
    while (std::getline(lines, line)) o << "# " << line << '\n';
    return o.str();
}

PreparedSample prepare_sample(const RgbImage& img, const BinaryMask& mask, const RunOptions& opt) {
    RgbImage sized = imgproc::resize_rgb(img, opt.side, opt.side);
    if (opt.preprocess) sized = imgproc::remove_hair(sized, opt.hair);
    PreparedSample s;
    s.x = imgproc::resize_normalize(sized, opt.side);
    s.g = (mask.h == opt.side && mask.w == opt.side)
              ? mask
              : imgproc::resize_mask_nearest(mask, opt.side, opt.side);
    s.gb = attention::boundary_target(s.g);
    return s;
}

PreparedSample prepare_entry(const dataset::DatasetEntry& e, const RunOptions& opt) {
    return prepare_sample(imageio::load_rgb(e.image_path), imageio::load_mask(e.mask_path), opt);
}

namespace {

void flip_plane(double* p, int h, int w, bool fliph, bool flipv) {
    if (fliph)  // mirror columns
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w / 2; ++c) std::swap(p[r * w + c], p[r * w + (w - 1 - c)]);
    if (flipv)  // mirror rows
        for (int r = 0; r < h / 2; ++r)
            for (int c = 0; c < w; ++c) std::swap(p[r * w + c], p[(h - 1 - r) * w + c]);
}

void flip_mask(BinaryMask& m, bool fliph, bool flipv) {
    if (fliph)
        for (int r = 0; r < m.h; ++r)
            for (int c = 0; c < m.w / 2; ++c)
                std::swap(m.px[static_cast<size_t>(r) * m.w + c],
                          m.px[static_cast<size_t>(r) * m.w + (m.w - 1 - c)]);
    if (flipv)
        for (int r = 0; r < m.h / 2; ++r)
            for (int c = 0; c < m.w; ++c)
                std::swap(m.px[static_cast<size_t>(r) * m.w + c],
                          m.px[static_cast<size_t>(m.h - 1 - r) * m.w + c]);
}

}  // namespace

double train_model(model::Mfsnet& m, const std::vector<PreparedSample>& samples,
                   const RunOptions& opt) {
    if (samples.empty()) throw std::invalid_argument("train_model: no samples");
    nn::Adam adam(m.params(), opt.lr, opt.clip_norm);
    std::mt19937_64 gen(opt.seed ^ 0x5851f42d4c957f2dull);
    std::vector<int> order(samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    const int side = opt.side;
    const size_t plane = static_cast<size_t>(side) * side;
    double last_epoch_mean = 0.0;
    for (int ep = 0; ep < opt.epochs; ++ep) {
        std::shuffle(order.begin(), order.end(), gen);
        double sum = 0.0;
        int batches = 0;
        for (size_t at = 0; at < order.size(); at += opt.batch) {
            const int nb = static_cast<int>(std::min<size_t>(opt.batch, order.size() - at));
            Tensor x({nb, 3, side, side});
            Tensor g({nb, 1, side, side});
            Tensor gb({nb, 1, side, side});
            for (int b = 0; b < nb; ++b) {
                const PreparedSample& s = samples[order[at + b]];
                const bool fh = opt.flips && (gen() & 1);
                const bool fv = opt.flips && (gen() & 1);
                double* xb = x.data() + static_cast<size_t>(b) * 3 * plane;
                std::copy(s.x.data(), s.x.data() + 3 * plane, xb);
                for (int ch = 0; ch < 3; ++ch) flip_plane(xb + ch * plane, side, side, fh, fv);
                BinaryMask gm = s.g, gbm = s.gb;
                flip_mask(gm, fh, fv);
                flip_mask(gbm, fh, fv);
                double* gp = g.data() + static_cast<size_t>(b) * plane;
                double* gbp = gb.data() + static_cast<size_t>(b) * plane;
                for (size_t i = 0; i < plane; ++i) {
                    gp[i] = gm.px[i];
                    gbp[i] = gbm.px[i];
                }
            }
            sum += model::train_step(m, adam, x, g, gb, opt.lw);
            ++batches;
        }
        last_epoch_mean = sum / batches;
    }
    return last_epoch_mean;
}

metrics::SampleScores evaluate_entry(const model::Mfsnet& m, const dataset::DatasetEntry& e,
                                     const RunOptions& opt) {
    const RgbImage img = imageio::load_rgb(e.image_path);
    const BinaryMask truth = imageio::load_mask(e.mask_path);
    const BinaryMask pred = m.predict(img, opt.side, opt.preprocess, opt.hair);
    return metrics::score_pair(e.id, pred, truth);
}

std::vector<metrics::SampleScores> evaluate_entries(const model::Mfsnet& m,
                                                    const std::vector<dataset::DatasetEntry>& es,
                                                    const RunOptions& opt) {
    std::vector<metrics::SampleScores> out;
    out.reserve(es.size());
    for (const auto& e : es) out.push_back(evaluate_entry(m, e, opt));
    return out;
}

CvResult run_cv(const dataset::DatasetIndex& idx, const RunOptions& opt, const Config& cfg,
                const std::string& out_prefix) {
    const int n = static_cast<int>(idx.entries.size());
    const dataset::FoldSplit split = dataset::make_folds(n, opt.folds, opt.seed);

    CvResult res;
    for (int f = 0; f < opt.folds; ++f) {
        std::vector<dataset::DatasetEntry> train_e, test_e;
        for (int g = 0; g < opt.folds; ++g)
            for (int i : split.folds[g]) (g == f ? test_e : train_e).push_back(idx.entries[i]);

        model::Mfsnet m(opt.model, opt.seed);
        std::vector<PreparedSample> samples;
        samples.reserve(train_e.size());
        for (const auto& e : train_e) samples.push_back(prepare_entry(e, opt));
        try {
            train_model(m, samples, opt);
        } catch (const std::runtime_error& err) {
            std::cerr << "fold " << (f + 1) << " aborted: " << err.what() << '\n';
            continue;
        }
        metrics::FoldResult fr;
        fr.fold = f + 1;
        fr.summary = metrics::aggregate(evaluate_entries(m, test_e, opt));
        res.folds.push_back(fr);
    }

    const std::string header = report_header(cfg, opt.seed);
    res.csv = header + metrics::fold_table_csv(idx.tag, res.folds);
    res.markdown = metrics::fold_table_markdown(idx.tag, res.folds);
    if (!out_prefix.empty()) {
        write_file(out_prefix + ".csv", res.csv);
        write_file(out_prefix + ".md", header + res.markdown);
    }
    return res;
}

namespace {

using model::LevelRole;

model::AblationConfig make_roles(std::array<LevelRole, 5> roles, bool ppd) {
    model::AblationConfig a;
    a.roles = roles;
    a.use_ppd = ppd;
    return a;
}

constexpr LevelRole N = LevelRole::None, B = LevelRole::BA, R = LevelRole::RA;

}  // namespace

std::vector<AblationRow> orientation_rows() {
    return {
        {"1", make_roles({B, B, B, R, R}, true)},
        {"2", make_roles({B, B, R, R, R}, true)},
        {"3", make_roles({N, B, R, R, R}, true)},
        {"4", make_roles({B, R, B, R, R}, true)},
        {"5", make_roles({N, B, R, B, R}, true)},
        {"Proposed", make_roles({N, B, B, R, R}, true)},
    };
}

std::vector<AblationRow> component_rows() {
    return {
        {"Res2Net", make_roles({N, N, N, N, N}, false)},
        {"Res2Net+PPD", make_roles({N, N, N, N, N}, true)},
        {"Res2Net+BA", make_roles({N, B, B, N, N}, false)},
        {"Res2Net+RA", make_roles({N, N, N, R, R}, false)},
        {"Res2Net+BA+RA", make_roles({N, B, B, R, R}, false)},
        {"Res2Net+RA+PPD", make_roles({N, N, N, R, R}, true)},
        {"Res2Net+BA+RA+PPD (Proposed)", make_roles({N, B, B, R, R}, true)},
    };
}

namespace {

// Train on all folds but the first, score on the first.
metrics::Summary single_split_eval(const dataset::DatasetIndex& idx, const RunOptions& opt) {
    const int n = static_cast<int>(idx.entries.size());
    const dataset::FoldSplit split = dataset::make_folds(n, opt.folds, opt.seed);
    std::vector<dataset::DatasetEntry> train_e, test_e;
    for (int g = 0; g < opt.folds; ++g)
        for (int i : split.folds[g]) (g == 0 ? test_e : train_e).push_back(idx.entries[i]);

    model::Mfsnet m(opt.model, opt.seed);
    std::vector<PreparedSample> samples;
    samples.reserve(train_e.size());
    for (const auto& e : train_e) samples.push_back(prepare_entry(e, opt));
    train_model(m, samples, opt);
    return metrics::aggregate(evaluate_entries(m, test_e, opt));
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

const char* role_name(LevelRole r) { return r == LevelRole::None ? "-" : r == LevelRole::BA ? "BA" : "RA"; }

}  // namespace

AblationResult run_ablation(const dataset::DatasetIndex& idx, const RunOptions& opt,
                            const Config& cfg, const std::string& out_dir) {
    const std::string header = report_header(cfg, opt.seed);
    AblationResult res;

    {
        std::ostringstream csv, md;
        csv << "Instance,Conv1,Conv2,Conv3,Conv4,Conv5,mDSC,mIoU,mFM,mSen,mSpe\n";
        md << "| Instance | Conv1 | Conv2 | Conv3 | Conv4 | Conv5 | mDSC | mIoU | mFM | mSen | "
              "mSpe |\n|---|---|---|---|---|---|---|---|---|---|---|\n";
        for (const auto& row : orientation_rows()) {
            RunOptions o = opt;
            o.model.ablation = row.ablation;
            const metrics::Summary s = single_split_eval(idx, o);
            csv << row.label;
            md << "| " << row.label << " |";
            for (int lv = 0; lv < 5; ++lv) {
                csv << ',' << role_name(row.ablation.roles[lv]);
                md << ' ' << role_name(row.ablation.roles[lv]) << " |";
            }
            for (int k = 0; k < 5; ++k) {
                csv << ',' << fmt3(s.mean[k]);
                md << ' ' << fmt3(s.mean[k]) << " |";
            }
            csv << '\n';
            md << '\n';
        }
        res.orientation_csv = header + csv.str();
        res.orientation_md = header + md.str();
    }

    {
        std::ostringstream csv, md;
        csv << "Architecture,mDSC,mIoU,mFM,mSen,mSpe\n";
        md << "| Architecture | mDSC | mIoU | mFM | mSen | mSpe |\n|---|---|---|---|---|---|\n";
        for (const auto& row : component_rows()) {
            RunOptions o = opt;
            o.model.ablation = row.ablation;
            const metrics::Summary s = single_split_eval(idx, o);
            csv << '"' << row.label << '"';
            md << "| " << row.label << " |";
            for (int k = 0; k < 5; ++k) {
                csv << ',' << fmt3(s.mean[k]);
                md << ' ' << fmt3(s.mean[k]) << " |";
            }
            csv << '\n';
            md << '\n';
        }
        res.component_csv = header + csv.str();
        res.component_md = header + md.str();
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(out_dir + "/orientations.csv", res.orientation_csv);
        write_file(out_dir + "/orientations.md", res.orientation_md);
        write_file(out_dir + "/components.csv", res.component_csv);
        write_file(out_dir + "/components.md", res.component_md);
    }
    return res;
}

std::vector<double> default_delta_grid() { return {0.1, 0.3, 0.5, 0.7, 0.9}; }

std::string sweep_delta(const dataset::DatasetIndex& idx, const std::vector<double>& deltas,
                        const RunOptions& opt, const Config& cfg, const std::string& out_path) {
    std::ostringstream csv;
    csv << report_header(cfg, opt.seed) << "delta,mDSC,mIoU\n";
    char dbuf[32];
    for (double d : deltas) {
        RunOptions o = opt;
        o.lw.delta = d;
        const metrics::Summary s = single_split_eval(idx, o);
        std::snprintf(dbuf, sizeof(dbuf), "%.2f", d);
        csv << dbuf << ',' << fmt3(s.mean[0]) << ',' << fmt3(s.mean[1]) << '\n';
    }
    const std::string out = csv.str();
    if (!out_path.empty()) write_file(out_path, out);
    return out;
}

}  // namespace mfs::harness
