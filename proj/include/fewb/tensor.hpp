#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fewb/common.hpp"

namespace fewb {

class Tape;

enum class Activation { Identity, Relu, Tanh, Sigmoid, Softplus, SoftmaxLastDim };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

namespace detail {

struct TensorNode {
    std::vector<std::size_t> shape;
    std::vector<real> value;
    std::vector<real> grad;  // sized lazily by ensure_grad()
    bool requires_grad = false;
    int node_id = -1;  // position on the tape that recorded this node
    std::function<void()> backward;
    std::vector<std::shared_ptr<TensorNode>> inputs;

    std::size_t size() const { return value.size(); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), real(0));
    }
};

}  // namespace detail

/// Dense row-major tensor. Copies share the underlying node (shallow handle);
/// use detached() for an independent constant copy.
class Tensor {
public:
    Tensor() = default;

    /// Constant (no gradient) tensor.
    static Tensor from(std::vector<std::size_t> shape, std::vector<real> values);
    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor scalar(real v);
    /// Gradient-tracking leaf; the backing storage for parameters.
    static Tensor variable(std::vector<std::size_t> shape, std::vector<real> values);

    bool defined() const { return node_ != nullptr; }
    const std::vector<std::size_t>& shape() const { return node_->shape; }
    std::size_t size() const { return node_->value.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    const std::vector<real>& values() const { return node_->value; }
    std::vector<real>& values() { return node_->value; }
    const std::vector<real>& grad() const { return node_->grad; }
    void zero_grad() { node_->grad.assign(node_->value.size(), real(0)); }
    bool requires_grad() const { return node_->requires_grad; }
    int node_id() const { return node_->node_id; }

    /// Value of a single-element tensor.
    real item() const;
    real at(std::size_t r, std::size_t c) const;

    bool all_finite() const;

    /// Constant copy, cut off from any tape history.
    Tensor detached() const;

    std::shared_ptr<detail::TensorNode> node() const { return node_; }
    explicit Tensor(std::shared_ptr<detail::TensorNode> n) : node_(std::move(n)) {}

private:
    std::shared_ptr<detail::TensorNode> node_;
};

/// Records the operations of one forward pass for reverse-mode
/// differentiation. Strictly single-threaded: the active tape is
/// thread-local, and ops executed while a tape is active are registered on
/// it. With no active tape, ops run forward-only.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active();

    /// Reverse pass from a scalar loss. Seeds d(loss)/d(loss) = 1 and
    /// accumulates into the grad of every reachable gradient-tracking node.
    /// The tape is consumed; calling backward twice is a ContractError.
    /// A non-finite loss raises NumericError carrying the first bad node.
    void backward(const Tensor& loss);

    void record(const std::shared_ptr<detail::TensorNode>& node);
    std::size_t num_nodes() const { return nodes_.size(); }

private:
    friend class NoGrad;
    static void set_active(Tape* t);

    std::vector<std::shared_ptr<detail::TensorNode>> nodes_;
    bool consumed_ = false;
    Tape* prev_ = nullptr;
};

/// Suspends the active tape for the current scope; ops run forward-only.
class NoGrad {
public:
    NoGrad() : saved_(Tape::active()) { Tape::set_active(nullptr); }
    ~NoGrad() { Tape::set_active(saved_); }
    NoGrad(const NoGrad&) = delete;
    NoGrad& operator=(const NoGrad&) = delete;

private:
    Tape* saved_;
};

// ---- ops (all register on the active tape when one exists) ----

/// out[b,o] = sum_i x[b,i] * w[i,o] + bias[o]
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& bias);

Tensor activation(const Tensor& x, Activation kind);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor softmax_lastdim(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, real c);
Tensor add_scalar(const Tensor& x, real c);
Tensor neg(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor square(const Tensor& x);
Tensor clamp(const Tensor& x, real lo, real hi);

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);
Tensor concat_lastdim(const Tensor& a, const Tensor& b);
/// out[b] = x[b, idx[b]]
Tensor gather_lastdim(const Tensor& x, const std::vector<std::size_t>& idx);

Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

}  // namespace fewb
