#include "fewb/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fewb/kernels.hpp"

namespace fewb {

namespace {

thread_local Tape* g_active_tape = nullptr;

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << "]";
    return os.str();
}

using NodePtr = std::shared_ptr<detail::TensorNode>;

NodePtr make_node(std::vector<std::size_t> shape, std::vector<real> value) {
    auto n = std::make_shared<detail::TensorNode>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    if (n->value.size() != shape_product(n->shape))
        throw ShapeError("tensor data length does not match shape " + shape_str(n->shape));
    return n;
}

/// Wire up an op result: track gradients only if some input needs them and a
/// tape is active; otherwise drop the closure so inference stays cheap.
Tensor finish_op(NodePtr out, std::vector<NodePtr> inputs,
                 std::function<void()> backward) {
    Tape* tape = Tape::active();
    bool needs = false;
    for (const auto& in : inputs)
        if (in->requires_grad) needs = true;
    if (tape && needs) {
        out->requires_grad = true;
        out->inputs = std::move(inputs);
        out->backward = std::move(backward);
        tape->record(out);
    }
    return Tensor(std::move(out));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

}  // namespace

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "softplus") return Activation::Softplus;
    if (name == "softmax") return Activation::SoftmaxLastDim;
    throw ConfigError("unknown activation: " + name);
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softplus: return "softplus";
        case Activation::SoftmaxLastDim: return "softmax";
    }
    return "?";
}

// ---- Tensor ----

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<real> values) {
    return Tensor(make_node(std::move(shape), std::move(values)));
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = shape_product(shape);
    return Tensor(make_node(std::move(shape), std::vector<real>(n, real(0))));
}

Tensor Tensor::scalar(real v) { return Tensor(make_node({1}, {v})); }

Tensor Tensor::variable(std::vector<std::size_t> shape, std::vector<real> values) {
    auto n = make_node(std::move(shape), std::move(values));
    n->requires_grad = true;
    return Tensor(std::move(n));
}

std::size_t Tensor::rows() const {
    return node_->shape.empty() ? 1 : node_->shape.front();
}

std::size_t Tensor::cols() const {
    if (node_->shape.size() < 2) return node_->shape.empty() ? 1 : node_->shape[0];
    std::size_t c = 1;
    for (std::size_t i = 1; i < node_->shape.size(); ++i) c *= node_->shape[i];
    return c;
}

real Tensor::item() const {
    if (size() != 1)
        throw ContractError("item() requires a single-element tensor, got " +
                            shape_str(node_->shape));
    return node_->value[0];
}

real Tensor::at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

bool Tensor::all_finite() const {
    for (real v : node_->value)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor Tensor::detached() const { return Tensor::from(node_->shape, node_->value); }

// ---- Tape ----

Tape::Tape() {
    prev_ = g_active_tape;
    g_active_tape = this;
}

Tape::~Tape() { g_active_tape = prev_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::set_active(Tape* t) { g_active_tape = t; }

void Tape::record(const NodePtr& node) {
    node->node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
}

void Tape::backward(const Tensor& loss) {
    if (consumed_) throw ContractError("backward() called twice on the same tape");
    if (loss.size() != 1)
        throw ContractError("backward() requires a scalar loss");
    if (!std::isfinite(loss.values()[0])) {
        // Find the first node that went non-finite for the diagnostic.
        int first_bad = -1;
        for (const auto& n : nodes_) {
            for (real v : n->value)
                if (!std::isfinite(v)) { first_bad = n->node_id; break; }
            if (first_bad >= 0) break;
        }
        consumed_ = true;
        throw NumericError("non-finite loss in backward()", first_bad);
    }
    consumed_ = true;
    auto out = loss.node();
    if (!out->requires_grad) {
        nodes_.clear();
        return;  // loss does not depend on any tracked input
    }
    out->ensure_grad();
    out->grad[0] += real(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
        if ((*it)->backward) (*it)->backward();
    nodes_.clear();
}

// ---- ops ----

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& bias) {
    if (x.shape().size() != 2 || w.shape().size() != 2 || bias.shape().size() != 1)
        throw ShapeError("affine: expected x[BxI], w[IxO], bias[O]");
    const std::size_t B = x.shape()[0], I = x.shape()[1];
    const std::size_t O = w.shape()[1];
    if (w.shape()[0] != I || bias.shape()[0] != O)
        throw ShapeError("affine: inner dimensions disagree: x" + shape_str(x.shape()) +
                         " w" + shape_str(w.shape()) + " bias" + shape_str(bias.shape()));

    auto out = make_node({B, O}, std::vector<real>(B * O));
    kernels::matmul(x.values().data(), w.values().data(), out->value.data(), B, I, O);
    kernels::add_bias(out->value.data(), bias.values().data(), B, O);

    auto xn = x.node(); auto wn = w.node(); auto bn = bias.node();
    auto on = out;
    return finish_op(out, {xn, wn, bn}, [xn, wn, bn, on, B, I, O] {
        const real* dy = on->grad.data();
        if (xn->requires_grad) {
            xn->ensure_grad();
            kernels::matmul_nt_acc(dy, wn->value.data(), xn->grad.data(), B, O, I);
        }
        if (wn->requires_grad) {
            wn->ensure_grad();
            kernels::matmul_tn_acc(xn->value.data(), dy, wn->grad.data(), B, I, O);
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            kernels::bias_grad_acc(dy, bn->grad.data(), B, O);
        }
    });
}

namespace {

template <typename Fwd, typename Dfn>
Tensor elementwise(const Tensor& x, Fwd fwd, Dfn dfn) {
    auto out = make_node(x.shape(), std::vector<real>(x.size()));
    const auto& xv = x.values();
    for (std::size_t i = 0; i < xv.size(); ++i) out->value[i] = fwd(xv[i]);
    auto xn = x.node(); auto on = out;
    return finish_op(out, {xn}, [xn, on, dfn] {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < on->value.size(); ++i)
            xn->grad[i] += on->grad[i] * dfn(xn->value[i], on->value[i]);
    });
}

}  // namespace

Tensor relu(const Tensor& x) {
    return elementwise(
        x, [](real v) { return v > 0 ? v : real(0); },
        [](real xi, real) { return xi > 0 ? real(1) : real(0); });
}

Tensor tanh(const Tensor& x) {
    return elementwise(
        x, [](real v) { return std::tanh(v); },
        [](real, real yi) { return real(1) - yi * yi; });
}

Tensor sigmoid(const Tensor& x) {
    return elementwise(
        x,
        [](real v) { return v >= 0 ? real(1) / (real(1) + std::exp(-v))
                                   : std::exp(v) / (real(1) + std::exp(v)); },
        [](real, real yi) { return yi * (real(1) - yi); });
}

Tensor softplus(const Tensor& x) {
    return elementwise(
        x,
        [](real v) {
            if (v > real(30)) return v;
            if (v < real(-30)) return std::exp(v);
            return std::log1p(std::exp(v));
        },
        [](real xi, real) {
            return xi >= 0 ? real(1) / (real(1) + std::exp(-xi))
                           : std::exp(xi) / (real(1) + std::exp(xi));
        });
}

Tensor softmax_lastdim(const Tensor& x) {
    const std::size_t B = x.rows(), A = x.cols();
    auto out = make_node(x.shape(), std::vector<real>(x.size()));
    const auto& xv = x.values();
    for (std::size_t b = 0; b < B; ++b) {
        const real* row = xv.data() + b * A;
        real m = row[0];
        for (std::size_t j = 1; j < A; ++j) m = std::max(m, row[j]);
        real z = 0;
        for (std::size_t j = 0; j < A; ++j) {
            out->value[b * A + j] = std::exp(row[j] - m);
            z += out->value[b * A + j];
        }
        for (std::size_t j = 0; j < A; ++j) out->value[b * A + j] /= z;
    }
    auto xn = x.node(); auto on = out;
    return finish_op(out, {xn}, [xn, on, B, A] {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t b = 0; b < B; ++b) {
            const real* y = on->value.data() + b * A;
            const real* dy = on->grad.data() + b * A;
            real dot = 0;
            for (std::size_t j = 0; j < A; ++j) dot += dy[j] * y[j];
            for (std::size_t j = 0; j < A; ++j)
                xn->grad[b * A + j] += y[j] * (dy[j] - dot);
        }
    });
}

Tensor activation(const Tensor& x, Activation kind) {
    switch (kind) {
        case Activation::Identity: return x;
        case Activation::Relu: return relu(x);
        case Activation::Tanh: return tanh(x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Softplus: return softplus(x);
        case Activation::SoftmaxLastDim: return softmax_lastdim(x);
    }
    throw ContractError("unreachable activation kind");
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    auto out = make_node(a.shape(), std::vector<real>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) out->value[i] = a.values()[i] + b.values()[i];
    auto an = a.node(); auto bn = b.node(); auto on = out;
    return finish_op(out, {an, bn}, [an, bn, on] {
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += on->grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    auto out = make_node(a.shape(), std::vector<real>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) out->value[i] = a.values()[i] - b.values()[i];
    auto an = a.node(); auto bn = b.node(); auto on = out;
    return finish_op(out, {an, bn}, [an, bn, on] {
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] -= on->grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    auto out = make_node(a.shape(), std::vector<real>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) out->value[i] = a.values()[i] * b.values()[i];
    auto an = a.node(); auto bn = b.node(); auto on = out;
    return finish_op(out, {an, bn}, [an, bn, on] {
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i)
                an->grad[i] += on->grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i)
                bn->grad[i] += on->grad[i] * an->value[i];
        }
    });
}

Tensor scale(const Tensor& x, real c) {
    return elementwise(
        x, [c](real v) { return c * v; }, [c](real, real) { return c; });
}

Tensor add_scalar(const Tensor& x, real c) {
    return elementwise(
        x, [c](real v) { return v + c; }, [](real, real) { return real(1); });
}

Tensor neg(const Tensor& x) { return scale(x, real(-1)); }

Tensor exp(const Tensor& x) {
    return elementwise(
        x, [](real v) { return std::exp(v); }, [](real, real yi) { return yi; });
}

Tensor log(const Tensor& x) {
    return elementwise(
        x, [](real v) { return std::log(v); },
        [](real xi, real) { return real(1) / xi; });
}

Tensor square(const Tensor& x) {
    return elementwise(
        x, [](real v) { return v * v; }, [](real xi, real) { return real(2) * xi; });
}

Tensor clamp(const Tensor& x, real lo, real hi) {
    return elementwise(
        x, [lo, hi](real v) { return std::min(hi, std::max(lo, v)); },
        [lo, hi](real xi, real) { return (xi > lo && xi < hi) ? real(1) : real(0); });
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
    if (shape_product(shape) != x.size())
        throw ShapeError("reshape: element count mismatch");
    auto out = make_node(std::move(shape), x.values());
    auto xn = x.node(); auto on = out;
    return finish_op(out, {xn}, [xn, on] {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += on->grad[i];
    });
}

Tensor concat_lastdim(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[0] != b.shape()[0])
        throw ShapeError("concat_lastdim: expected [BxDa], [BxDb]");
    const std::size_t B = a.shape()[0], Da = a.shape()[1], Db = b.shape()[1];
    auto out = make_node({B, Da + Db}, std::vector<real>(B * (Da + Db)));
    for (std::size_t r = 0; r < B; ++r) {
        std::copy_n(a.values().data() + r * Da, Da, out->value.data() + r * (Da + Db));
        std::copy_n(b.values().data() + r * Db, Db, out->value.data() + r * (Da + Db) + Da);
    }
    auto an = a.node(); auto bn = b.node(); auto on = out;
    return finish_op(out, {an, bn}, [an, bn, on, B, Da, Db] {
        for (std::size_t r = 0; r < B; ++r) {
            const real* dy = on->grad.data() + r * (Da + Db);
            if (an->requires_grad) {
                an->ensure_grad();
                for (std::size_t i = 0; i < Da; ++i) an->grad[r * Da + i] += dy[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::size_t i = 0; i < Db; ++i) bn->grad[r * Db + i] += dy[Da + i];
            }
        }
    });
}

Tensor gather_lastdim(const Tensor& x, const std::vector<std::size_t>& idx) {
    const std::size_t B = x.rows(), A = x.cols();
    if (idx.size() != B) throw ShapeError("gather_lastdim: index count != rows");
    for (auto j : idx)
        if (j >= A) throw ShapeError("gather_lastdim: index out of range");
    auto out = make_node({B}, std::vector<real>(B));
    for (std::size_t b = 0; b < B; ++b) out->value[b] = x.values()[b * A + idx[b]];
    auto xn = x.node(); auto on = out;
    return finish_op(out, {xn}, [xn, on, idx, A] {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t b = 0; b < on->grad.size(); ++b)
            xn->grad[b * A + idx[b]] += on->grad[b];
    });
}

Tensor sum_all(const Tensor& x) {
    real s = 0;
    for (real v : x.values()) s += v;
    auto out = make_node({1}, {s});
    auto xn = x.node(); auto on = out;
    return finish_op(out, {xn}, [xn, on] {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (auto& g : xn->grad) g += on->grad[0];
    });
}

Tensor mean_all(const Tensor& x) {
    real s = 0;
    for (real v : x.values()) s += v;
    const real inv = real(1) / static_cast<real>(x.size());
    auto out = make_node({1}, {s * inv});
    auto xn = x.node(); auto on = out;
    return finish_op(out, {xn}, [xn, on, inv] {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (auto& g : xn->grad) g += on->grad[0] * inv;
    });
}

}  // namespace fewb
