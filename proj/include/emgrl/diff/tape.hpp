#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emgrl/diff/params.hpp"

namespace emgrl::diff {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Vec& value() const;
    std::size_t size() const { return value().size(); }
    double scalar() const;
    std::size_t id() const noexcept { return id_; }
    Tape* tape() const noexcept { return tape_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Result of a reverse pass; the tape itself is left untouched.
class Adjoints {
public:
    /// Gradient of the loss with respect to `v`. Zero vector when `v` does not
    /// influence the loss.
    Vec wrt(Var v) const;

    /// Gradients keyed like `params`. Blocks never read on the tape get zeros.
    ParamSet params(const ParamSet& params) const;

private:
    friend class Tape;
    const Tape* tape_ = nullptr;
    std::vector<Vec> adj_;
};

/// Linear record of primitive operations in execution order. Node ids are
/// assigned monotonically, so reverse id order is a valid reverse topological
/// order.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf holding a fixed value. Its adjoint is still available via Adjoints::wrt.
    Var constant(Vec value);
    Var scalar(double value) { return constant(Vec{value}); }

    /// Leaf bound to a parameter block. Repeated calls for the same block
    /// return the same node.
    Var param(const ParamSet& params, const std::string& name);

    /// Reverse pass from a scalar node. Throws on non-scalar loss.
    Adjoints backward(Var loss) const;

    std::size_t size() const noexcept { return nodes_.size(); }

    // Shape of a node; vectors have cols == 1.
    std::size_t rows(Var v) const { return nodes_.at(v.id()).rows; }
    std::size_t cols(Var v) const { return nodes_.at(v.id()).cols; }

    /// Backward rule: receives the node's output adjoint and accumulates into
    /// the adjoints of its inputs.
    using BackFn = std::function<void(const Tape&, const Vec& grad_out, std::vector<Vec>& adj)>;

    /// Records a new node. Used by the primitive operations.
    Var record(Vec value, BackFn back, std::size_t rows = 0, std::size_t cols = 1);

    const Vec& value_of(std::size_t id) const { return nodes_[id].value; }

private:
    friend class Var;
    friend class Adjoints;

    struct Node {
        Vec value;
        BackFn back;
        std::size_t rows = 0;
        std::size_t cols = 1;
    };

    std::vector<Node> nodes_;
    std::map<std::pair<const ParamSet*, std::string>, std::size_t> param_nodes_;
};

/// Accumulates `g` into `adj[id]`, allocating on first touch.
void accumulate(std::vector<Vec>& adj, std::size_t id, std::span<const double> g);

// Primitive operations. Every op checks shapes and records itself on the
// tape of its first operand.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// a * scale + shift, elementwise.
Var affine(Var a, double scale, double shift = 0.0);
/// a + s with `s` a single-element node broadcast over `a`.
Var broadcast_add(Var a, Var s);
Var tanh(Var a);
Var sigmoid(Var a);
Var square(Var a);
Var abs(Var a);
Var sum(Var a);
Var mean(Var a);
Var dot(Var a, Var b);
Var concat(std::span<const Var> parts);
Var concat(Var a, Var b);
Var slice(Var a, std::size_t offset, std::size_t length);
/// Elementwise mean of equally sized vectors. Empty list gives zeros of `dim`.
Var mean_of(Tape& tape, std::span<const Var> items, std::size_t dim);

/// W x + b, W given as a param node with shape (out x in).
Var linear(Var x, Var weight, Var bias);
/// Convenience: linear with `<prefix>.w` / `<prefix>.b` taken from `params`.
Var linear(Var x, const ParamSet& params, const std::string& prefix);

/// Valid (unpadded) dilated cross-correlation:
/// y[t] = sum_j kernel[j] * signal[t + j * dilation].
Var conv1d_dilated(Var signal, Var kernel, std::size_t dilation);

Var softmax(Var logits);
Var log_softmax(Var logits);

/// Receptive field of stacked convolutions with the given kernel size and dilations.
std::size_t receptive_field(std::size_t kernel_size, std::span<const std::size_t> dilations);

// Value-only helpers that share the tape ops' definitions and error paths.
Vec softmax(std::span<const double> logits);
Vec conv1d_dilated(std::span<const double> signal, std::span<const double> kernel, std::size_t dilation);
Vec linear_forward(std::span<const double> x, const Block& weight, const Block& bias);

}  // namespace emgrl::diff
