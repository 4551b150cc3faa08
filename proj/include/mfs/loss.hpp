#pragma once

#include "mfs/autograd.hpp"
#include "mfs/image.hpp"

namespace mfs::loss {

struct LossWeights {
    double delta = 0.9;    // BCE share of the hybrid loss
    double lambda_w = 5.0;  // pixel-weight amplitude
    int pool_k = 31;        // pixel-weight window (odd)
    double eps = 1.0;       // IoU smoothing
    void validate() const;
};

// Per-term multipliers of the total objective; 0 drops a term entirely
// (its output may then be absent).
struct TotalLossTerms {
    double o_s = 1.0, o4 = 1.0, o5 = 1.0, b2 = 1.0, b3 = 1.0;
};

// Supervised outputs at native strides; null Var = not produced.
struct SupervisedOutputs {
    Var o_s, o4, o5, b2, b3;
};

// w = 1 + lambda_w * |meanpool_k(G) - G|. The pooling window is clipped at
// the image border and the mean divides by the in-image pixel count, so a
// constant mask yields w == 1 everywhere.
Tensor pixel_weights(const BinaryMask& g, double lambda_w = 5.0, int pool_k = 31);
// Same on [H,W] or [N,1,H,W] tensors holding {0,1} values.
Tensor pixel_weights_t(const Tensor& g, double lambda_w = 5.0, int pool_k = 31);

// Weighted pixel losses; g and w are data (no gradient), shapes must equal
// the logits'. Values of g must be {0,1}.
Var weighted_bce(const Var& logits, const Tensor& g, const Tensor& w);
Var weighted_iou(const Var& logits, const Tensor& g, const Tensor& w, double eps = 1.0);

// delta * wBCE + (1-delta) * wIoU with w derived from g via pixel_weights.
Var hybrid_loss(const Var& logits, const Tensor& g, const LossWeights& lw);

// Mean BCE against a boundary target. If gb is larger than the logits it is
// max-pooled down (integer factor), preserving thin edges.
Var boundary_bce(const Var& logits, const Tensor& gb);

// Deep-supervision objective. Segmentation maps are upsampled to g's
// resolution before their hybrid terms. Throws invalid_argument when a term
// with nonzero weight has no output.
Var total_loss(const SupervisedOutputs& outs, const Tensor& g, const Tensor& gb,
               const LossWeights& lw, const TotalLossTerms& terms = {});

}  // namespace mfs::loss
