#pragma once

#include <string>
#include <vector>

#include "mfs/config.hpp"
#include "mfs/dataset.hpp"
#include "mfs/metrics.hpp"
#include "mfs/model.hpp"

namespace mfs::harness {

// Everything a run needs, bound from the config file (see default_config).
struct RunOptions {
    int side = 128;
    bool preprocess = true;
    imgproc::HairRemovalParams hair;
    int epochs = 6;
    int batch = 8;
    double lr = 1e-3;
    double clip_norm = 0.5;
    bool flips = true;
    loss::LossWeights lw;
    model::ModelConfig model;
    int folds = 5;
    uint64_t seed = 1;

    static RunOptions from_config(const Config& cfg);
};

Config default_config();
// The run's reproducibility header: sorted config echo plus seed.
std::string report_header(const Config& cfg, uint64_t seed);

// A training-ready sample: normalized input, mask and boundary target at
// network resolution.
struct PreparedSample {
    Tensor x;       // [3,S,S]
    BinaryMask g;   // S x S
    BinaryMask gb;  // boundary band of g
};

PreparedSample prepare_sample(const RgbImage& img, const BinaryMask& mask, const RunOptions& opt);
PreparedSample prepare_entry(const dataset::DatasetEntry& e, const RunOptions& opt);

// Epochs of shuffled mini-batches with optional flip augmentation; returns
// the final epoch's mean loss. Throws on non-finite loss.
double train_model(model::Mfsnet& m, const std::vector<PreparedSample>& samples,
                   const RunOptions& opt);

metrics::SampleScores evaluate_entry(const model::Mfsnet& m, const dataset::DatasetEntry& e,
                                     const RunOptions& opt);
std::vector<metrics::SampleScores> evaluate_entries(const model::Mfsnet& m,
                                                    const std::vector<dataset::DatasetEntry>& es,
                                                    const RunOptions& opt);

struct CvResult {
    std::vector<metrics::FoldResult> folds;
    std::string csv;
    std::string markdown;
};

// Per-fold train/test over a seeded split; writes <out_prefix>.csv and
// <out_prefix>.md when out_prefix is nonempty.
CvResult run_cv(const dataset::DatasetIndex& idx, const RunOptions& opt, const Config& cfg,
                const std::string& out_prefix);

struct AblationRow {
    std::string label;
    model::AblationConfig ablation;
};

// The five orientation instances plus the proposed row.
std::vector<AblationRow> orientation_rows();
// The seven component rows, backbone-only through the full model.
std::vector<AblationRow> component_rows();

struct AblationResult {
    std::string orientation_csv, orientation_md;
    std::string component_csv, component_md;
};

// Each row trains from scratch (same seed) on one train/test split and is
// scored on the held-out part.
AblationResult run_ablation(const dataset::DatasetIndex& idx, const RunOptions& opt,
                            const Config& cfg, const std::string& out_dir);

// Trains/evaluates per delta on one split; CSV columns delta,mDSC,mIoU.
std::string sweep_delta(const dataset::DatasetIndex& idx, const std::vector<double>& deltas,
                        const RunOptions& opt, const Config& cfg, const std::string& out_path);

std::vector<double> default_delta_grid();  // 0.1, 0.3, 0.5, 0.7, 0.9

}  // namespace mfs::harness
