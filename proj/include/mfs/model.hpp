#pragma once

#include <map>
#include <optional>
#include <string>

#include "mfs/attention.hpp"
#include "mfs/backbone.hpp"
#include "mfs/decoder.hpp"
#include "mfs/imgproc.hpp"
#include "mfs/loss.hpp"

namespace mfs::model {

enum class LevelRole { None, BA, RA };

// Which attention module (if any) sits at each backbone level, plus the
// component toggles the ablation rows exercise.
struct AblationConfig {
    std::array<LevelRole, 5> roles{LevelRole::None, LevelRole::BA, LevelRole::BA, LevelRole::RA,
                                   LevelRole::RA};
    bool use_ppd = true;
    // Which boundary stream feeds the RA branches when several levels carry
    // BA: the shallowest, the deepest, or their sum.
    enum class BaSource { Shallowest, Deepest, Sum };
    BaSource ba_source = BaSource::Deepest;

    std::vector<int> ba_levels() const;  // ascending, 1-based
    std::vector<int> ra_levels() const;
    std::string describe() const;
};

struct ModelConfig {
    backbone::BackboneConfig backbone;
    AblationConfig ablation;
    int rfb_width = 32;
    int ra_width = 64;

    std::string describe() const;
    uint64_t hash() const;
};

struct MfsnetOutputs {
    Var o_s;                     // global map logits
    std::map<int, Var> ra;      // level -> refinement logits
    std::map<int, Var> ba_pred;  // level -> boundary logits
    Var final_logits;            // shallowest refinement (or o_s)
    Var final_prob;              // sigmoid(resize(final_logits)) at input size
};

class Mfsnet {
  public:
    Mfsnet(const ModelConfig& cfg, uint64_t seed);

    MfsnetOutputs forward(const Var& x, bool training) const;
    MfsnetOutputs forward(const Tensor& x, bool training) const;

    // Full-image inference: optional hair removal, resize+normalize to
    // `side`, forward in eval mode, threshold the final map at probability
    // 0.5, and resize the mask back to the source dims.
    BinaryMask predict(const RgbImage& img, int side, bool preprocess,
                       const imgproc::HairRemovalParams& hair = {}) const;

    nn::ParamStore& params() { return ps_; }
    const nn::ParamStore& params() const { return ps_; }
    const ModelConfig& config() const { return cfg_; }

    void save(const std::string& path, uint64_t seed) const;
    // Shapes must match this model's configuration.
    nn::CheckpointMeta load(const std::string& path);

  private:
    ModelConfig cfg_;
    nn::ParamStore ps_;
    std::optional<backbone::Res2NetBackbone> backbone_;
    std::optional<decoder::RfbBlock> rfb4_, rfb5_;
    std::optional<decoder::Ppd> ppd_;
    std::optional<nn::Conv2d> global_head_;  // global-map source when the decoder is off
    std::map<int, attention::BoundaryAttention> ba_;
    std::map<int, attention::ReverseAttention> ra_;

    Var boundary_stream(const std::map<int, Var>& gated) const;
};

// Sum of hybrid terms over the global and refinement maps plus boundary BCE
// terms, matching the deep-supervision objective for the standard wiring and
// generalizing to ablation wirings. g, gb: [N,1,H,W].
Var training_loss(const MfsnetOutputs& outs, const Tensor& g, const Tensor& gb,
                  const loss::LossWeights& lw);

// One optimizer update; throws runtime_error (with the offending value) on a
// non-finite loss. Returns the loss value.
double train_step(Mfsnet& model, nn::Adam& opt, const Tensor& x, const Tensor& g, const Tensor& gb,
                  const loss::LossWeights& lw);

}  // namespace mfs::model
