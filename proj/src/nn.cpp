#include "mfs/nn.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mfs::nn {

Var ParamStore::add_param(const std::string& name, Tensor init) {
    for (const auto& [n, v] : params_)
        if (n == name) throw std::logic_error("duplicate param: " + name);
    Var v = leaf(std::move(init));
    params_.emplace_back(name, v);
    return v;
}

void ParamStore::add_buffer(const std::string& name, Tensor* buf) {
    for (const auto& [n, b] : buffers_)
        if (n == name) throw std::logic_error("duplicate buffer: " + name);
    buffers_.emplace_back(name, buf);
}

Var ParamStore::param(const std::string& name) const {
    for (const auto& [n, v] : params_)
        if (n == name) return v;
    throw std::out_of_range("no such param: " + name);
}

size_t ParamStore::param_count() const {
    size_t total = 0;
    for (const auto& [n, v] : params_) total += v->value.numel();
    return total;
}

Conv2d::Conv2d(ParamStore& ps, const std::string& name, int cin, int cout, int kh, int kw,
               int stride_, int pad_, Rng& rng, bool with_bias, int dil_, int pad_w_) {
    stride = stride_;
    pad_h = pad_;
    pad_w = pad_w_ < 0 ? pad_ : pad_w_;
    dil = dil_;
    const double fan_in = static_cast<double>(cin) * kh * kw;
    const double stddev = std::sqrt(2.0 / fan_in);
    Tensor wt({cout, cin, kh, kw});
    for (int64_t i = 0; i < wt.numel(); ++i) wt.data()[i] = rng.normal(stddev);
    w = ps.add_param(name + ".w", std::move(wt));
    if (with_bias) b = ps.add_param(name + ".b", Tensor({cout}, 0.0));
}

BatchNorm2d::BatchNorm2d(ParamStore& ps, const std::string& name, int c) {
    gamma = ps.add_param(name + ".gamma", Tensor({c}, 1.0));
    beta = ps.add_param(name + ".beta", Tensor({c}, 0.0));
    rmean = std::make_unique<Tensor>(std::vector<int>{c}, 0.0);
    rvar = std::make_unique<Tensor>(std::vector<int>{c}, 1.0);
    ps.add_buffer(name + ".rmean", rmean.get());
    ps.add_buffer(name + ".rvar", rvar.get());
}

ConvBn::ConvBn(ParamStore& ps, const std::string& name, int cin, int cout, int kh, int kw,
               int stride, int pad, Rng& rng, int dil, int pad_w)
    : conv(ps, name + ".conv", cin, cout, kh, kw, stride, pad, rng, /*with_bias=*/false, dil,
           pad_w),
      bn(ps, name + ".bn", cout) {}

Adam::Adam(const ParamStore& ps, double lr, double clip_norm) : lr_(lr), clip_norm_(clip_norm) {
    for (const auto& [n, v] : ps.params()) {
        m_.emplace_back(v->value.shape(), 0.0);
        v_.emplace_back(v->value.shape(), 0.0);
    }
}

void Adam::zero_grad(ParamStore& ps) {
    for (auto& [n, v] : const_cast<std::vector<std::pair<std::string, Var>>&>(ps.params()))
        if (!v->grad.empty()) v->grad.fill(0.0);
}

double Adam::step(ParamStore& ps) {
    const auto& params = ps.params();
    if (params.size() != m_.size()) throw std::logic_error("Adam: param set changed");
    double sq = 0.0;
    for (const auto& [n, v] : params) {
        if (v->grad.empty()) continue;
        const double* g = v->grad.data();
        for (int64_t i = 0; i < v->grad.numel(); ++i) sq += g[i] * g[i];
    }
    const double norm = std::sqrt(sq);
    const double scale = (clip_norm_ > 0.0 && norm > clip_norm_) ? clip_norm_ / norm : 1.0;

    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Var v = params[pi].second;
        if (v->grad.empty()) continue;
        double* m = m_[pi].data();
        double* vv = v_[pi].data();
        double* p = v->value.data();
        const double* g = v->grad.data();
        for (int64_t i = 0; i < v->value.numel(); ++i) {
            const double gi = g[i] * scale;
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * gi;
            vv[i] = beta2_ * vv[i] + (1.0 - beta2_) * gi * gi;
            p[i] -= lr_ * (m[i] / bc1) / (std::sqrt(vv[i] / bc2) + eps_);
        }
    }
    return norm;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

constexpr char kMagic[8] = {'M', 'F', 'S', 'C', 'K', 'P', 'T', '\0'};

void write_u32(std::ofstream& f, uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ofstream& f, uint64_t v) { f.write(reinterpret_cast<const char*>(&v), 8); }
void write_str(std::ofstream& f, const std::string& s) {
    write_u32(f, static_cast<uint32_t>(s.size()));
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_tensor(std::ofstream& f, const Tensor& t) {
    write_u32(f, static_cast<uint32_t>(t.ndim()));
    for (int i = 0; i < t.ndim(); ++i) write_u32(f, static_cast<uint32_t>(t.dim(i)));
    f.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.numel() * 8));
}

uint32_t read_u32(std::ifstream& f) {
    uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
uint64_t read_u64(std::ifstream& f) {
    uint64_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
std::string read_str(std::ifstream& f) {
    const uint32_t len = read_u32(f);
    if (len > (1u << 20)) throw std::runtime_error("checkpoint: corrupt string length");
    std::string s(len, '\0');
    f.read(s.data(), len);
    return s;
}
void read_tensor_into(std::ifstream& f, Tensor& dst, const std::string& name) {
    const uint32_t nd = read_u32(f);
    if (nd > 8) throw std::runtime_error("checkpoint: corrupt rank for " + name);
    std::vector<int> shape(nd);
    for (uint32_t i = 0; i < nd; ++i) shape[i] = static_cast<int>(read_u32(f));
    Tensor t(shape);
    f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * 8));
    if (!f) throw std::runtime_error("checkpoint: truncated tensor " + name);
    if (!t.same_shape(dst))
        throw std::runtime_error("checkpoint: shape mismatch for " + name + " (file " +
                                 t.shape_str() + ", model " + dst.shape_str() + ")");
    dst = std::move(t);
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& ps, const CheckpointMeta& meta) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f.write(kMagic, 8);
    write_u32(f, meta.version);
    write_u64(f, meta.config_hash);
    write_u64(f, meta.seed);
    write_u32(f, static_cast<uint32_t>(ps.params().size()));
    for (const auto& [name, v] : ps.params()) {
        write_str(f, name);
        write_tensor(f, v->value);
    }
    write_u32(f, static_cast<uint32_t>(ps.buffers().size()));
    for (const auto& [name, buf] : ps.buffers()) {
        write_str(f, name);
        write_tensor(f, *buf);
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

CheckpointMeta load_checkpoint(const std::string& path, ParamStore& ps) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    CheckpointMeta meta;
    meta.version = read_u32(f);
    if (meta.version != 1) throw std::runtime_error("unsupported checkpoint version");
    meta.config_hash = read_u64(f);
    meta.seed = read_u64(f);

    const uint32_t np = read_u32(f);
    if (np != ps.params().size()) throw std::runtime_error("checkpoint: param count mismatch");
    for (uint32_t i = 0; i < np; ++i) {
        const std::string name = read_str(f);
        read_tensor_into(f, ps.param(name)->value, name);
    }
    const uint32_t nb = read_u32(f);
    if (nb != ps.buffers().size()) throw std::runtime_error("checkpoint: buffer count mismatch");
    for (uint32_t i = 0; i < nb; ++i) {
        const std::string name = read_str(f);
        Tensor* dst = nullptr;
        for (const auto& [n, b] : ps.buffers())
            if (n == name) dst = b;
        if (!dst) throw std::runtime_error("checkpoint: unknown buffer " + name);
        read_tensor_into(f, *dst, name);
    }
    return meta;
}

}  // namespace mfs::nn
