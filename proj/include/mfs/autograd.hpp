#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mfs/tensor.hpp"

namespace mfs {

// Reverse-mode autodiff node. Graphs are built define-by-run; backward()
// walks the tape in reverse topological order.
struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;  // accumulates into parents' grads

    void accumulate(const Tensor& g);
    void ensure_grad();
};

using Var = std::shared_ptr<Node>;

// Trainable leaf.
Var leaf(Tensor v);
// Non-differentiable data.
Var constant(Tensor v);
// Internal: op result node. requires_grad is inherited from parents.
Var make_op(Tensor v, std::vector<Var> parents, std::function<void(Node&)> fn);

// Backpropagate from a scalar root (numel()==1); seeds d(root)/d(root)=1.
void backward(const Var& root);

// ---- elementwise / structural ops ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var relu(const Var& x);
Var sigmoid_v(const Var& x);
Var sum_all(const Var& x);  // -> [1]

// Concatenate along the channel axis; all inputs [N,Ci,H,W].
Var concat_ch(const std::vector<Var>& xs);
// View of channels [c0, c1) of x [N,C,H,W].
Var slice_ch(const Var& x, int c0, int c1);

// Multiply by a constant mask; mask is [N,1,H,W] (broadcast over channels)
// or exactly x's shape. No gradient flows through the mask.
Var mul_mask(const Var& x, const Tensor& mask);

// ---- spatial ops (NCHW) ----
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad_h, int pad_w,
           int dil = 1);
Var maxpool2d(const Var& x, int k, int stride, int pad);
Var bilinear_resize(const Var& x, int oh, int ow);
Var batchnorm2d(const Var& x, const Var& gamma, const Var& beta, Tensor& running_mean,
                Tensor& running_var, bool training, double momentum = 0.1, double eps = 1e-5);

// ---- tensor (non-autograd) helpers ----
Tensor bilinear_resize_t(const Tensor& x, int oh, int ow);  // [N,C,H,W] or [H,W]
Tensor sigmoid_t(const Tensor& x);
// Max-pool [N,C,H,W] (or [H,W]) down to (oh, ow); input dims must be multiples.
Tensor maxpool_to_t(const Tensor& x, int oh, int ow);

}  // namespace mfs
