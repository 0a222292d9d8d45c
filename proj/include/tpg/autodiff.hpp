#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tpg/dense_array.hpp"

namespace tpg {

// Reverse-mode autodiff over DenseArray. Nodes form an acyclic graph held by
// shared_ptr; a Var is a value-semantic handle to one node. Graphs are built
// fresh per training step and discarded, so there is no tape reuse to manage.
struct GraphNode {
    DenseArray value;
    DenseArray grad;  // same shape as value, zero until backward fills it
    std::string op;
    std::vector<std::shared_ptr<GraphNode>> parents;
    // Distributes this node's grad into its parents' grads. Null for leaves.
    std::function<void(GraphNode&)> backprop;
};

class Var {
public:
    Var() = default;

    // Leaf node. Parameters and constants alike; the caller keeps handles to
    // the leaves it wants gradients for.
    static Var leaf(DenseArray value, std::string name = "leaf");

    const DenseArray& value() const { return node_->value; }
    const DenseArray& grad() const { return node_->grad; }
    const std::shared_ptr<GraphNode>& node() const { return node_; }
    bool empty() const { return node_ == nullptr; }

    // value of a single-element node
    double scalar() const;

    explicit Var(std::shared_ptr<GraphNode> n) : node_(std::move(n)) {}

private:
    std::shared_ptr<GraphNode> node_;
};

// Elementwise binary ops accept equal shapes, or a rhs whose shape equals the
// lhs shape with the leading (batch) axis dropped; the rhs is then broadcast
// across that axis. No other broadcasting.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);

// [m,k] x [k,n] -> [m,n]
Var matmul(const Var& a, const Var& b);

Var relu(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var log(const Var& a);  // rejects nonpositive entries; pre-clamp via clamp()
Var exp(const Var& a);

// reductions to shape [1]
Var mean(const Var& a);
Var sum(const Var& a);

// rank-1: along axis 0; rank-2: along axis 1 (column concat)
Var concat(const Var& a, const Var& b);

// scalar-constant helpers
Var scale(const Var& a, double c);
Var add_const(const Var& a, double c);
Var clamp(const Var& a, double lo, double hi);

// Identity forward; backward injects -lambda * upstream into the input.
// lambda must be >= 0.
Var gradient_reversal(const Var& x, double lambda);

// Fused softmax cross-entropy: logits [batch, classes], one class id per row.
// Value is the mean negative log softmax probability of the true class.
Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels);

// Dispatch by op tag over the primitive set; used by the generic gradient
// checks. Tags: add subtract multiply matmul relu tanh sigmoid log exp mean
// sum concat.
Var primitive_forward(const std::string& op_tag, const std::vector<Var>& inputs);

// Reverse pass from a scalar root (shape [1] or []). Zeroes the grads of
// every reachable node, then accumulates; repeated calls therefore
// reset-then-accumulate. Rejects non-scalar roots.
void backward(const Var& root);

}  // namespace tpg
