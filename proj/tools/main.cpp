// Command-line front end: preprocessing, synthetic data, training,
// inference, evaluation, cross-validation, ablations, delta sweep.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfs/dataset.hpp"
#include "mfs/harness.hpp"
#include "mfs/imageio.hpp"
#include "mfs/imgproc.hpp"
#include "mfs/metrics.hpp"
#include "mfs/model.hpp"

namespace fs = std::filesystem;
using namespace mfs;

namespace {

// Flags shared by the model-running subcommands. Values of -1 (or empty)
// mean "keep the config file's value".
struct CommonArgs {
    std::string config_path;
    uint64_t seed = 1;
    std::string backbone;
    int folds = -1;
    int epochs = -1;
    int side = -1;
    double delta = -1.0;
    bool no_preprocess = false;
};

void add_common(CLI::App* sc, CommonArgs& a) {
    sc->add_option("--config", a.config_path, "config file path");
    sc->add_option("--seed", a.seed, "run seed")->capture_default_str();
    sc->add_option("--backbone", a.backbone, "backbone size")
        ->check(CLI::IsMember({"toy", "full"}));
    sc->add_option("--epochs", a.epochs, "training epochs");
    sc->add_option("--side", a.side, "network input side");
    sc->add_option("--delta", a.delta, "hybrid loss mixing weight");
    sc->add_flag("--no-preprocess", a.no_preprocess, "skip artifact removal");
}

// Config file, then CLI overrides folded back in so report headers echo
// the effective settings.
std::pair<Config, harness::RunOptions> resolve(const CommonArgs& a, bool with_folds) {
    Config cfg = harness::default_config();
    if (!a.config_path.empty()) {
        Config file = Config::load(a.config_path);
        for (const auto& [k, v] : file.entries()) cfg.set(k, v);
    }
    if (!a.backbone.empty()) cfg.set("model.backbone", a.backbone);
    if (a.epochs > 0) cfg.set("train.epochs", std::to_string(a.epochs));
    if (a.side > 0) cfg.set("preprocess.side", std::to_string(a.side));
    if (a.delta >= 0.0) cfg.set("loss.delta", std::to_string(a.delta));
    if (a.no_preprocess) cfg.set("preprocess.enabled", "false");
    if (with_folds && a.folds > 0) cfg.set("cv.folds", std::to_string(a.folds));
    harness::RunOptions opt = harness::RunOptions::from_config(cfg);
    opt.seed = a.seed;
    return {cfg, opt};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-focus segmentation for skin lesion images"};
    app.require_subcommand(1);

    // ---- preprocess ----
    auto* pp = app.add_subcommand("preprocess", "remove hair artifacts from a directory of images");
    std::string pp_in, pp_out;
    imgproc::HairRemovalParams hp;
    int pp_side = 0;
    bool pp_dump = false;
    pp->add_option("--in", pp_in, "input image directory")->required();
    pp->add_option("--out", pp_out, "output directory")->required();
    pp->add_option("--threshold", hp.threshold, "hair mask threshold")->capture_default_str();
    pp->add_option("--kernel", hp.kernel, "cross element side")->capture_default_str();
    pp->add_option("--radius", hp.radius, "inpainting radius")->capture_default_str();
    pp->add_option("--side", pp_side, "also resize output to side x side");
    pp->add_flag("--dump-stages", pp_dump, "write intermediate stages per image");

    // ---- synth ----
    auto* sy = app.add_subcommand("synth", "generate a synthetic lesion dataset");
    std::string sy_out;
    int sy_n = 200, sy_side = 128;
    uint64_t sy_seed = 1;
    bool sy_no_hair = false;
    sy->add_option("--out", sy_out, "dataset root to create")->required();
    sy->add_option("--n", sy_n, "number of samples")->capture_default_str();
    sy->add_option("--side", sy_side, "image side")->capture_default_str();
    sy->add_option("--seed", sy_seed, "generator seed")->capture_default_str();
    sy->add_flag("--no-hair", sy_no_hair, "skip hair strokes");

    // ---- train ----
    auto* tr = app.add_subcommand("train", "train on a dataset and save a checkpoint");
    CommonArgs tr_a;
    std::string tr_data, tr_out = "model.ckpt";
    add_common(tr, tr_a);
    tr->add_option("--data", tr_data, "dataset root (images/ + masks/)")->required();
    tr->add_option("--out", tr_out, "checkpoint path")->capture_default_str();

    // ---- infer ----
    auto* in = app.add_subcommand("infer", "predict masks for a directory of images");
    CommonArgs in_a;
    std::string in_ckpt, in_in, in_out;
    add_common(in, in_a);
    in->add_option("--checkpoint", in_ckpt, "checkpoint path")->required();
    in->add_option("--in", in_in, "input image directory")->required();
    in->add_option("--out", in_out, "output mask directory")->required();

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "score a checkpoint against a labelled dataset");
    CommonArgs ev_a;
    std::string ev_ckpt, ev_data, ev_out;
    add_common(ev, ev_a);
    ev->add_option("--checkpoint", ev_ckpt, "checkpoint path")->required();
    ev->add_option("--data", ev_data, "dataset root")->required();
    ev->add_option("--out", ev_out, "per-image CSV path");

    // ---- cv ----
    auto* cv = app.add_subcommand("cv", "k-fold cross-validation with a fold table report");
    CommonArgs cv_a;
    std::string cv_data, cv_out = "cv_report";
    add_common(cv, cv_a);
    cv->add_option("--folds", cv_a.folds, "fold count");
    cv->add_option("--data", cv_data, "dataset root")->required();
    cv->add_option("--out", cv_out, "report path prefix")->capture_default_str();

    // ---- ablate ----
    auto* ab = app.add_subcommand("ablate", "attention-orientation and component ablations");
    CommonArgs ab_a;
    std::string ab_data, ab_out = "ablation";
    add_common(ab, ab_a);
    ab->add_option("--folds", ab_a.folds, "fold count for the split");
    ab->add_option("--data", ab_data, "dataset root")->required();
    ab->add_option("--out", ab_out, "report directory")->capture_default_str();

    // ---- sweep-delta ----
    auto* sw = app.add_subcommand("sweep-delta", "loss mixing-weight sweep");
    CommonArgs sw_a;
    std::string sw_data, sw_out = "delta_sweep.csv";
    std::vector<double> sw_deltas;
    add_common(sw, sw_a);
    sw->remove_option(sw->get_option("--delta"));
    sw->add_option("--delta", sw_deltas, "delta values (repeatable; default grid otherwise)");
    sw->add_option("--folds", sw_a.folds, "fold count for the split");
    sw->add_option("--data", sw_data, "dataset root")->required();
    sw->add_option("--out", sw_out, "CSV output path")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (pp->parsed()) {
            fs::create_directories(pp_out);
            dataset::DatasetIndex idx;  // reuse the image scanner via a bare directory walk
            std::vector<fs::path> files;
            for (const auto& de : fs::directory_iterator(pp_in)) {
                if (!de.is_regular_file()) continue;
                std::string ext = de.path().extension().string();
                for (auto& c : ext) c = static_cast<char>(std::tolower(c));
                if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp")
                    files.push_back(de.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                const RgbImage img = imageio::load_rgb(f.string());
                imgproc::HairRemovalStages st;
                RgbImage clean = imgproc::remove_hair(img, hp, pp_dump ? &st : nullptr);
                if (pp_side > 0) clean = imgproc::resize_rgb(clean, pp_side, pp_side);
                const std::string stem = f.stem().string();
                imageio::save_rgb(pp_out + "/" + stem + ".png", clean);
                if (pp_dump) {
                    imageio::save_rgb(pp_out + "/" + stem + "_0_input.png", img);
                    imageio::save_gray(pp_out + "/" + stem + "_1_gray.png", st.gray);
                    imageio::save_gray(pp_out + "/" + stem + "_2_blackhat.png", st.blackhat);
                    imageio::save_mask(pp_out + "/" + stem + "_3_mask.png", st.mask);
                    imageio::save_rgb(pp_out + "/" + stem + "_4_inpainted.png", st.inpainted);
                }
            }
            std::cout << "preprocessed " << files.size() << " images -> " << pp_out << '\n';
        } else if (sy->parsed()) {
            dataset::DatasetIndex idx =
                dataset::synth_dataset(sy_out, sy_n, sy_seed, sy_side, !sy_no_hair);
            std::cout << "wrote " << idx.entries.size() << " samples under " << sy_out << '\n';
        } else if (tr->parsed()) {
            auto [cfg, opt] = resolve(tr_a, false);
            const dataset::DatasetIndex idx = dataset::load_dataset(tr_data, "train");
            model::Mfsnet m(opt.model, opt.seed);
            std::vector<harness::PreparedSample> samples;
            samples.reserve(idx.entries.size());
            for (const auto& e : idx.entries) samples.push_back(harness::prepare_entry(e, opt));
            const double final_loss = harness::train_model(m, samples, opt);
            m.save(tr_out, opt.seed);
            std::cout << "final epoch mean loss " << final_loss << "; saved " << tr_out << '\n';
        } else if (in->parsed()) {
            auto [cfg, opt] = resolve(in_a, false);
            model::Mfsnet m(opt.model, opt.seed);
            m.load(in_ckpt);
            fs::create_directories(in_out);
            int count = 0;
            std::vector<fs::path> files;
            for (const auto& de : fs::directory_iterator(in_in))
                if (de.is_regular_file()) files.push_back(de.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                const RgbImage img = imageio::load_rgb(f.string());
                const BinaryMask pred = m.predict(img, opt.side, opt.preprocess, opt.hair);
                imageio::save_mask(in_out + "/" + f.stem().string() + ".png", pred);
                ++count;
            }
            std::cout << "wrote " << count << " masks -> " << in_out << '\n';
        } else if (ev->parsed()) {
            auto [cfg, opt] = resolve(ev_a, false);
            model::Mfsnet m(opt.model, opt.seed);
            m.load(ev_ckpt);
            const dataset::DatasetIndex idx = dataset::load_dataset(ev_data, "eval");
            const auto scores = harness::evaluate_entries(m, idx.entries, opt);
            const metrics::Summary s = metrics::aggregate(scores);
            if (!ev_out.empty()) {
                std::ofstream f(ev_out, std::ios::binary);
                f << metrics::per_image_csv(scores);
            }
            std::cout << "n=" << s.n;
            const char* names[5] = {"DSC", "IoU", "FM", "Sen", "Spe"};
            for (int k = 0; k < 5; ++k) std::cout << ' ' << names[k] << '=' << s.mean[k];
            std::cout << '\n';
        } else if (cv->parsed()) {
            auto [cfg, opt] = resolve(cv_a, true);
            const dataset::DatasetIndex idx = dataset::load_dataset(cv_data, "dataset");
            const harness::CvResult r = harness::run_cv(idx, opt, cfg, cv_out);
            std::cout << r.csv;
        } else if (ab->parsed()) {
            auto [cfg, opt] = resolve(ab_a, true);
            const dataset::DatasetIndex idx = dataset::load_dataset(ab_data, "dataset");
            harness::run_ablation(idx, opt, cfg, ab_out);
            std::cout << "ablation reports under " << ab_out << '\n';
        } else if (sw->parsed()) {
            auto [cfg, opt] = resolve(sw_a, true);
            const dataset::DatasetIndex idx = dataset::load_dataset(sw_data, "dataset");
            const std::vector<double> grid =
                sw_deltas.empty() ? harness::default_delta_grid() : sw_deltas;
            std::cout << harness::sweep_delta(idx, grid, opt, cfg, sw_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
