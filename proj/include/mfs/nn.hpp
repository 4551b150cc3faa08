#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mfs/autograd.hpp"

namespace mfs::nn {

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(uint64_t seed) : gen(seed) {}
    double normal(double stddev) {
        std::normal_distribution<double> d(0.0, stddev);
        return d(gen);
    }
    double uniform() {
        std::uniform_real_distribution<double> d(0.0, 1.0);
        return d(gen);
    }
    // [lo, hi] inclusive
    int64_t randint(int64_t lo, int64_t hi) {
        std::uniform_int_distribution<int64_t> d(lo, hi);
        return d(gen);
    }
};

// Named registry of trainable leaves and persistent buffers (BN running
// stats). Buffer pointers stay valid as long as the owning modules live.
class ParamStore {
  public:
    Var add_param(const std::string& name, Tensor init);
    void add_buffer(const std::string& name, Tensor* buf);

    const std::vector<std::pair<std::string, Var>>& params() const { return params_; }
    const std::vector<std::pair<std::string, Tensor*>>& buffers() const { return buffers_; }
    Var param(const std::string& name) const;  // throws if absent
    size_t param_count() const;                // total scalar count

  private:
    std::vector<std::pair<std::string, Var>> params_;
    std::vector<std::pair<std::string, Tensor*>> buffers_;
};

struct Conv2d {
    Var w, b;
    int stride = 1, pad_h = 0, pad_w = 0, dil = 1;

    Conv2d() = default;
    // Kaiming-normal fan-in init; bias zero (omitted when with_bias=false).
    // pad_w < 0 means "same as pad".
    Conv2d(ParamStore& ps, const std::string& name, int cin, int cout, int kh, int kw, int stride,
           int pad, Rng& rng, bool with_bias = true, int dil = 1, int pad_w = -1);
    Var operator()(const Var& x) const { return conv2d(x, w, b, stride, pad_h, pad_w, dil); }
};

struct BatchNorm2d {
    Var gamma, beta;
    std::unique_ptr<Tensor> rmean, rvar;
    double momentum = 0.1, eps = 1e-5;

    BatchNorm2d() = default;
    BatchNorm2d(ParamStore& ps, const std::string& name, int c);
    Var operator()(const Var& x, bool training) const {
        return batchnorm2d(x, gamma, beta, *rmean, *rvar, training, momentum, eps);
    }
};

// conv -> BN -> optional ReLU
struct ConvBn {
    Conv2d conv;
    BatchNorm2d bn;

    ConvBn() = default;
    ConvBn(ParamStore& ps, const std::string& name, int cin, int cout, int kh, int kw, int stride,
           int pad, Rng& rng, int dil = 1, int pad_w = -1);
    Var operator()(const Var& x, bool training, bool with_relu = true) const {
        Var y = bn(conv(x), training);
        return with_relu ? relu(y) : y;
    }
};

// Adam with global-norm gradient clipping.
class Adam {
  public:
    Adam(const ParamStore& ps, double lr, double clip_norm = 0.5);
    void zero_grad(ParamStore& ps);
    // Returns the pre-clip global gradient norm.
    double step(ParamStore& ps);
    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }

  private:
    double lr_, clip_norm_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

struct CheckpointMeta {
    uint32_t version = 1;
    uint64_t config_hash = 0;
    uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const ParamStore& ps, const CheckpointMeta& meta);
// Loads into an already-constructed store; shapes must match. Returns meta.
CheckpointMeta load_checkpoint(const std::string& path, ParamStore& ps);

uint64_t fnv1a(const std::string& s);

}  // namespace mfs::nn
