#include "mfs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mfs/imageio.hpp"

namespace fs = std::filesystem;

namespace mfs::dataset {

namespace {

bool is_image_file(const fs::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == ".png" || e == ".jpg" || e == ".jpeg" || e == ".bmp";
}

std::map<std::string, std::string> scan_dir(const fs::path& dir, const char* what) {
    std::map<std::string, std::string> stems;
    if (!fs::exists(dir)) throw std::runtime_error(std::string("missing directory: ") + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        const std::string stem = p.stem().string();
        if (stems.count(stem))
            throw std::runtime_error(std::string("duplicate ") + what + " stem: " + stem + " (" +
                                     stems[stem] + " vs " + p.string() + ")");
        stems[stem] = p.string();
    }
    return stems;
}

}  // namespace

DatasetIndex load_dataset(const std::string& root, const std::string& tag) {
    const auto images = scan_dir(fs::path(root) / "images", "image");
    const auto masks = scan_dir(fs::path(root) / "masks", "mask");

    std::vector<std::string> missing;
    DatasetIndex idx;
    idx.tag = tag;
    for (const auto& [stem, ipath] : images) {
        auto it = masks.find(stem);
        if (it == masks.end()) {
            missing.push_back(stem);
            continue;
        }
        idx.entries.push_back({ipath, it->second, stem});
    }
    if (!missing.empty()) {
        std::ostringstream o;
        o << "images without masks:";
        for (const auto& s : missing) o << ' ' << s;
        throw std::runtime_error(o.str());
    }
    for (const auto& [stem, mpath] : masks)
        if (!images.count(stem)) std::cerr << "warning: mask without image: " << stem << '\n';
    if (idx.entries.empty()) std::cerr << "warning: empty dataset at " << root << '\n';
    return idx;
}

FoldSplit make_folds(int n_entries, int k, uint64_t seed) {
    if (k < 1) throw std::invalid_argument("make_folds: k must be >= 1");
    if (n_entries < 0) throw std::invalid_argument("make_folds: negative entry count");
    std::vector<int> order(n_entries);
    for (int i = 0; i < n_entries; ++i) order[i] = i;
    std::mt19937_64 gen(seed);
    std::shuffle(order.begin(), order.end(), gen);

    FoldSplit split;
    split.seed = seed;
    split.folds.assign(k, {});
    for (int i = 0; i < n_entries; ++i) split.folds[i % k].push_back(order[i]);
    return split;
}

namespace {

struct Pcg {
    std::mt19937_64 gen;
    explicit Pcg(uint64_t seed) : gen(seed) {}
    double uni(double a, double b) {
        std::uniform_real_distribution<double> d(a, b);
        return d(gen);
    }
    int irange(int a, int b) {  // inclusive
        std::uniform_int_distribution<int> d(a, b);
        return d(gen);
    }
};

uint8_t clamp_u8(double v) { return static_cast<uint8_t>(std::clamp(v, 0.0, 255.0)); }

void draw_stroke(RgbImage& img, Pcg& rng) {
    const int side = img.h;
    double x = rng.uni(0, side - 1);
    double y = rng.uni(0, side - 1);
    double ang = rng.uni(0, 2 * M_PI);
    const double len = rng.uni(0.3, 0.9) * side;
    const int dark = rng.irange(10, 60);
    const bool thick = rng.uni(0, 1) < 0.3;
    const int steps = static_cast<int>(len);
    for (int s = 0; s < steps; ++s) {
        ang += rng.uni(-0.06, 0.06);  // gentle curvature
        x += std::cos(ang);
        y += std::sin(ang);
        const int xi = static_cast<int>(std::lround(x));
        const int yi = static_cast<int>(std::lround(y));
        if (xi < 0 || xi >= side || yi < 0 || yi >= side) break;
        for (int ch = 0; ch < 3; ++ch) img.at(yi, xi, ch) = static_cast<uint8_t>(dark);
        if (thick && xi + 1 < side)
            for (int ch = 0; ch < 3; ++ch) img.at(yi, xi + 1, ch) = static_cast<uint8_t>(dark);
    }
}

}  // namespace

SynthSample synth_sample(uint64_t seed, int side, bool with_hair) {
    if (side < 16) throw std::invalid_argument("synth_sample: side too small");
    Pcg rng(seed * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull);

    // lesion ellipse
    const double cx = rng.uni(0.35, 0.65) * side;
    const double cy = rng.uni(0.35, 0.65) * side;
    const double ax = rng.uni(0.15, 0.35) * side;
    const double ay = rng.uni(0.15, 0.35) * side;
    const double th = rng.uni(0, M_PI);
    const double ct = std::cos(th), st = std::sin(th);

    // per-image tone jitter
    const double skin[3] = {205 + rng.uni(-15, 15), 170 + rng.uni(-15, 15), 150 + rng.uni(-15, 15)};
    const double lesion[3] = {120 + rng.uni(-10, 10), 80 + rng.uni(-10, 10), 60 + rng.uni(-10, 10)};

    SynthSample s{RgbImage(side, side), BinaryMask(side, side)};
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const double dx = c - cx, dy = r - cy;
            const double u = (dx * ct + dy * st) / ax;
            const double v = (-dx * st + dy * ct) / ay;
            const bool in = u * u + v * v <= 1.0;
            s.mask.px[static_cast<size_t>(r) * side + c] = in ? 1 : 0;
            const double* base = in ? lesion : skin;
            const double amp = in ? 6.0 : 8.0;
            for (int ch = 0; ch < 3; ++ch)
                s.image.at(r, c, ch) = clamp_u8(base[ch] + rng.uni(-amp, amp));
        }

    if (with_hair) {
        const int n = rng.irange(6, 14);
        for (int i = 0; i < n; ++i) draw_stroke(s.image, rng);
    }
    return s;
}

DatasetIndex synth_dataset(const std::string& root, int n, uint64_t seed, int side,
                           bool with_hair) {
    if (n < 0) throw std::invalid_argument("synth_dataset: negative count");
    const fs::path base(root);
    fs::create_directories(base / "images");
    fs::create_directories(base / "masks");

    DatasetIndex idx;
    idx.tag = "synthetic";
    char name[32];
    for (int i = 0; i < n; ++i) {
        const SynthSample s = synth_sample(seed + static_cast<uint64_t>(i), side, with_hair);
        std::snprintf(name, sizeof(name), "synth_%04d", i);
        const std::string ipath = (base / "images" / (std::string(name) + ".png")).string();
        const std::string mpath = (base / "masks" / (std::string(name) + ".png")).string();
        imageio::save_rgb(ipath, s.image);
        imageio::save_mask(mpath, s.mask);
        idx.entries.push_back({ipath, mpath, name});
    }
    return idx;
}

}  // namespace mfs::dataset
