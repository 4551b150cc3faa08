#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfs {

// Dense row-major double tensor. NCHW for feature maps, [1] for scalars.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape)
        : shape_(std::move(shape)), data_(numel_of(shape_), 0.0) {}
    Tensor(std::vector<int> shape, double fill)
        : shape_(std::move(shape)), data_(numel_of(shape_), fill) {}
    Tensor(std::vector<int> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (static_cast<int64_t>(data_.size()) != numel_of(shape_))
            throw std::invalid_argument("tensor: data size does not match shape");
    }

    static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
    int ndim() const { return static_cast<int>(shape_.size()); }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // NCHW accessors.
    double& at4(int n, int c, int y, int x) {
        return data_[((static_cast<int64_t>(n) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }
    double at4(int n, int c, int y, int x) const {
        return data_[((static_cast<int64_t>(n) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }
    double& at2(int y, int x) { return data_[static_cast<int64_t>(y) * shape_[1] + x]; }
    double at2(int y, int x) const { return data_[static_cast<int64_t>(y) * shape_[1] + x]; }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    std::string shape_str() const {
        std::string s = "[";
        for (size_t i = 0; i < shape_.size(); ++i)
            s += (i ? "," : "") + std::to_string(shape_[i]);
        return s + "]";
    }

    static int64_t numel_of(const std::vector<int>& shape) {
        int64_t n = 1;
        for (int d : shape) {
            if (d < 0) throw std::invalid_argument("tensor: negative dimension");
            n *= d;
        }
        return shape.empty() ? 0 : n;
    }

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

}  // namespace mfs
