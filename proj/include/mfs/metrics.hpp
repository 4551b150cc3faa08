#pragma once

#include <string>
#include <vector>

#include "mfs/image.hpp"

namespace mfs::metrics {

// All five scores lie in [0,1]. Degenerate denominators resolve so that a
// perfect predictor scores 1 (e.g. DSC/IoU of two empty masks is 1).
double dsc(const BinaryMask& s, const BinaryMask& g);
double iou(const BinaryMask& s, const BinaryMask& g);
double fmeasure(const BinaryMask& s, const BinaryMask& g);
double sensitivity(const BinaryMask& s, const BinaryMask& g);
double specificity(const BinaryMask& s, const BinaryMask& g);

struct SampleScores {
    std::string id;
    double dsc = 0, iou = 0, fm = 0, sen = 0, spe = 0;
};

SampleScores score_pair(const std::string& id, const BinaryMask& s, const BinaryMask& g);

// Arithmetic mean and sample standard deviation (0 when n < 2), in the
// order dsc, iou, fm, sen, spe.
struct Summary {
    int n = 0;
    double mean[5] = {0, 0, 0, 0, 0};
    double stdev[5] = {0, 0, 0, 0, 0};
};

Summary aggregate(const std::vector<SampleScores>& scores);

struct FoldResult {
    int fold = 0;  // 1-based
    Summary summary;
};

// Per-fold rows plus an Average row (mean +/- std across fold means),
// columns Dataset, Fold, mDSC, mIoU, mFM, mSen, mSpe, 3 decimals.
std::string fold_table_csv(const std::string& dataset, const std::vector<FoldResult>& folds);
std::string fold_table_markdown(const std::string& dataset, const std::vector<FoldResult>& folds);

std::string per_image_csv(const std::vector<SampleScores>& scores);

}  // namespace mfs::metrics
