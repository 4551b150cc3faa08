#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfs/image.hpp"

namespace mfs::dataset {

struct DatasetEntry {
    std::string image_path;
    std::string mask_path;
    std::string id;  // shared stem
};

struct DatasetIndex {
    std::vector<DatasetEntry> entries;
    std::string tag;  // ph2 | isic2017 | ham10000 | synthetic | custom
};

// Expects root/images and root/masks matched by file stem. The index is
// sorted by id. Unmatched mask files are reported to stderr; an image with
// no mask, or a duplicated stem, is a hard error listing the stems.
DatasetIndex load_dataset(const std::string& root, const std::string& tag);

struct FoldSplit {
    std::vector<std::vector<int>> folds;  // entry indices per fold
    uint64_t seed = 0;
};

// Seeded shuffle followed by round-robin assignment; fold sizes differ by
// at most one.
FoldSplit make_folds(int n_entries, int k, uint64_t seed);

struct SynthSample {
    RgbImage image;
    BinaryMask mask;
};

// One textured-skin image with an elliptical lesion and (optionally) dark
// hair strokes that are absent from the mask.
SynthSample synth_sample(uint64_t seed, int side, bool with_hair);

// Writes n samples under root/images and root/masks and returns the index.
DatasetIndex synth_dataset(const std::string& root, int n, uint64_t seed, int side,
                           bool with_hair);

}  // namespace mfs::dataset
