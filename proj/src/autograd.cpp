#include "mfs/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace mfs {

void Node::ensure_grad() {
    if (grad.empty()) grad = Tensor(value.shape(), 0.0);
}

void Node::accumulate(const Tensor& g) {
    if (!g.same_shape(value)) throw std::logic_error("grad shape mismatch");
    ensure_grad();
    double* dst = grad.data();
    const double* src = g.data();
    for (int64_t i = 0; i < grad.numel(); ++i) dst[i] += src[i];
}

Var leaf(Tensor v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = true;
    return n;
}

Var constant(Tensor v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = false;
    return n;
}

Var make_op(Tensor v, std::vector<Var> parents, std::function<void(Node&)> fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    for (const auto& p : parents)
        if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(fn);
    }
    return n;
}

void backward(const Var& root) {
    if (root->value.numel() != 1) throw std::invalid_argument("backward: root must be scalar");
    if (!root->requires_grad) return;

    // Iterative post-order topo sort (graphs can be deep).
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (idx < n->parents.size()) {
            Node* p = n->parents[idx++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad.data()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
}

static void check_same(const Var& a, const Var& b, const char* op) {
    if (!a->value.same_shape(b->value))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a->value.shape_str() +
                                    " vs " + b->value.shape_str());
}

Var add(const Var& a, const Var& b) {
    check_same(a, b, "add");
    Tensor out(a->value.shape());
    const double* pa = a->value.data();
    const double* pb = b->value.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] + pb[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad);
        if (b->requires_grad) b->accumulate(n.grad);
    });
}

Var sub(const Var& a, const Var& b) {
    check_same(a, b, "sub");
    Tensor out(a->value.shape());
    const double* pa = a->value.data();
    const double* pb = b->value.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] - pb[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad);
        if (b->requires_grad) {
            Tensor g(n.grad.shape());
            const double* pg = n.grad.data();
            double* pd = g.data();
            for (int64_t i = 0; i < g.numel(); ++i) pd[i] = -pg[i];
            b->accumulate(g);
        }
    });
}

Var mul(const Var& a, const Var& b) {
    check_same(a, b, "mul");
    Tensor out(a->value.shape());
    const double* pa = a->value.data();
    const double* pb = b->value.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * pb[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& n) {
        const double* pg = n.grad.data();
        if (a->requires_grad) {
            Tensor g(n.grad.shape());
            double* pd = g.data();
            const double* pb2 = b->value.data();
            for (int64_t i = 0; i < g.numel(); ++i) pd[i] = pg[i] * pb2[i];
            a->accumulate(g);
        }
        if (b->requires_grad) {
            Tensor g(n.grad.shape());
            double* pd = g.data();
            const double* pa2 = a->value.data();
            for (int64_t i = 0; i < g.numel(); ++i) pd[i] = pg[i] * pa2[i];
            b->accumulate(g);
        }
    });
}

Var scale(const Var& a, double s) {
    Tensor out(a->value.shape());
    const double* pa = a->value.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * s;
    return make_op(std::move(out), {a}, [a, s](Node& n) {
        Tensor g(n.grad.shape());
        const double* pg = n.grad.data();
        double* pd = g.data();
        for (int64_t i = 0; i < g.numel(); ++i) pd[i] = pg[i] * s;
        a->accumulate(g);
    });
}

Var add_scalar(const Var& a, double s) {
    Tensor out(a->value.shape());
    const double* pa = a->value.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] + s;
    return make_op(std::move(out), {a}, [a](Node& n) { a->accumulate(n.grad); });
}

Var relu(const Var& x) {
    Tensor out(x->value.shape());
    const double* px = x->value.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = px[i] > 0.0 ? px[i] : 0.0;
    return make_op(std::move(out), {x}, [x](Node& n) {
        Tensor g(n.grad.shape());
        const double* pg = n.grad.data();
        const double* px2 = x->value.data();
        double* pd = g.data();
        for (int64_t i = 0; i < g.numel(); ++i) pd[i] = px2[i] > 0.0 ? pg[i] : 0.0;
        x->accumulate(g);
    });
}

Var sigmoid_v(const Var& x) {
    Tensor out(x->value.shape());
    const double* px = x->value.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = 1.0 / (1.0 + std::exp(-px[i]));
    Tensor saved = out;
    return make_op(std::move(out), {x}, [x, saved](Node& n) {
        Tensor g(n.grad.shape());
        const double* pg = n.grad.data();
        const double* ps = saved.data();
        double* pd = g.data();
        for (int64_t i = 0; i < g.numel(); ++i) pd[i] = pg[i] * ps[i] * (1.0 - ps[i]);
        x->accumulate(g);
    });
}

Var sum_all(const Var& x) {
    double s = 0.0;
    const double* px = x->value.data();
    for (int64_t i = 0; i < x->value.numel(); ++i) s += px[i];
    return make_op(Tensor::scalar(s), {x}, [x](Node& n) {
        Tensor g(x->value.shape(), n.grad.data()[0]);
        x->accumulate(g);
    });
}

Var concat_ch(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_ch: no inputs");
    const int nb = xs[0]->value.dim(0);
    const int h = xs[0]->value.dim(2);
    const int w = xs[0]->value.dim(3);
    int ctot = 0;
    for (const auto& x : xs) {
        if (x->value.ndim() != 4 || x->value.dim(0) != nb || x->value.dim(2) != h ||
            x->value.dim(3) != w)
            throw std::invalid_argument("concat_ch: incompatible shapes");
        ctot += x->value.dim(1);
    }
    Tensor out({nb, ctot, h, w});
    const size_t plane = static_cast<size_t>(h) * w;
    size_t coff = 0;
    for (const auto& x : xs) {
        const int c = x->value.dim(1);
        for (int n = 0; n < nb; ++n) {
            const double* src = x->value.data() + static_cast<size_t>(n) * c * plane;
            double* dst = out.data() + (static_cast<size_t>(n) * ctot + coff) * plane;
            std::copy(src, src + static_cast<size_t>(c) * plane, dst);
        }
        coff += c;
    }
    std::vector<Var> parents = xs;
    return make_op(std::move(out), parents, [parents, nb, ctot, plane](Node& n) {
        size_t off = 0;
        for (const auto& x : parents) {
            const int c = x->value.dim(1);
            if (x->requires_grad) {
                Tensor g(x->value.shape());
                for (int b = 0; b < nb; ++b) {
                    const double* src = n.grad.data() + (static_cast<size_t>(b) * ctot + off) * plane;
                    double* dst = g.data() + static_cast<size_t>(b) * c * plane;
                    std::copy(src, src + static_cast<size_t>(c) * plane, dst);
                }
                x->accumulate(g);
            }
            off += c;
        }
    });
}

Var slice_ch(const Var& x, int c0, int c1) {
    if (x->value.ndim() != 4) throw std::invalid_argument("slice_ch: need NCHW");
    const int nb = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
    if (c0 < 0 || c1 > c || c0 >= c1) throw std::invalid_argument("slice_ch: bad range");
    const int cs = c1 - c0;
    const size_t plane = static_cast<size_t>(h) * w;
    Tensor out({nb, cs, h, w});
    for (int n = 0; n < nb; ++n) {
        const double* src = x->value.data() + (static_cast<size_t>(n) * c + c0) * plane;
        double* dst = out.data() + static_cast<size_t>(n) * cs * plane;
        std::copy(src, src + static_cast<size_t>(cs) * plane, dst);
    }
    return make_op(std::move(out), {x}, [x, c0, cs, nb, c, plane](Node& n) {
        Tensor g(x->value.shape(), 0.0);
        for (int b = 0; b < nb; ++b) {
            const double* src = n.grad.data() + static_cast<size_t>(b) * cs * plane;
            double* dst = g.data() + (static_cast<size_t>(b) * c + c0) * plane;
            std::copy(src, src + static_cast<size_t>(cs) * plane, dst);
        }
        x->accumulate(g);
    });
}

Var mul_mask(const Var& x, const Tensor& mask) {
    if (x->value.ndim() != 4) throw std::invalid_argument("mul_mask: need NCHW");
    const int nb = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
    const bool broadcast = mask.ndim() == 4 && mask.dim(0) == nb && mask.dim(1) == 1 &&
                           mask.dim(2) == h && mask.dim(3) == w;
    if (!broadcast && !mask.same_shape(x->value))
        throw std::invalid_argument("mul_mask: mask must be [N,1,H,W] or match input");
    const size_t plane = static_cast<size_t>(h) * w;
    Tensor out(x->value.shape());
    auto apply = [&](const double* in, double* o) {
        for (int n = 0; n < nb; ++n)
            for (int ch = 0; ch < c; ++ch) {
                const size_t xoff = (static_cast<size_t>(n) * c + ch) * plane;
                const size_t moff = broadcast ? static_cast<size_t>(n) * plane : xoff;
                const double* pm = mask.data() + moff;
                for (size_t i = 0; i < plane; ++i) o[xoff + i] = in[xoff + i] * pm[i];
            }
    };
    apply(x->value.data(), out.data());
    Tensor m = mask;  // keep alive
    return make_op(std::move(out), {x}, [x, m, nb, c, plane, broadcast](Node& n) {
        Tensor g(x->value.shape());
        for (int b = 0; b < nb; ++b)
            for (int ch = 0; ch < c; ++ch) {
                const size_t xoff = (static_cast<size_t>(b) * c + ch) * plane;
                const size_t moff = broadcast ? static_cast<size_t>(b) * plane : xoff;
                const double* pm = m.data() + moff;
                const double* pg = n.grad.data() + xoff;
                double* pd = g.data() + xoff;
                for (size_t i = 0; i < plane; ++i) pd[i] = pg[i] * pm[i];
            }
        x->accumulate(g);
    });
}

Tensor sigmoid_t(const Tensor& x) {
    Tensor out(x.shape());
    const double* px = x.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = 1.0 / (1.0 + std::exp(-px[i]));
    return out;
}

}  // namespace mfs
