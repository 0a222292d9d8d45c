#include "tpg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace tpg {

namespace {

std::shared_ptr<GraphNode> make_node(DenseArray value, std::string op,
                                     std::vector<std::shared_ptr<GraphNode>> parents,
                                     std::function<void(GraphNode&)> backprop) {
    auto n = std::make_shared<GraphNode>();
    n->grad = DenseArray::zeros(value.shape());
    n->value = std::move(value);
    n->op = std::move(op);
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
    return n;
}

[[noreturn]] void shape_error(const std::string& op, const Var& a, const Var& b) {
    throw std::invalid_argument(op + ": incompatible shapes " + shape_to_string(a.value().shape()) +
                                " and " + shape_to_string(b.value().shape()));
}

// rhs broadcasts over lhs's leading axis when its shape equals lhs's shape
// with that axis dropped
bool trailing_broadcast(const DenseArray& a, const DenseArray& b) {
    if (a.rank() != b.rank() + 1 || b.rank() == 0) return false;
    for (std::size_t i = 0; i < b.rank(); ++i)
        if (a.shape()[i + 1] != b.shape()[i]) return false;
    return true;
}

using BinFn = double (*)(double, double);

Var elementwise_binary(const std::string& op, const Var& a, const Var& b, BinFn fwd,
                       BinFn dfda, BinFn dfdb) {
    const DenseArray& av = a.value();
    const DenseArray& bv = b.value();
    DenseArray out(av.shape());
    if (av.same_shape(bv)) {
        for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i], bv[i]);
        auto node = make_node(std::move(out), op, {a.node(), b.node()},
                              [fwd, dfda, dfdb](GraphNode& self) {
                                  GraphNode& pa = *self.parents[0];
                                  GraphNode& pb = *self.parents[1];
                                  for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                      pa.grad[i] += self.grad[i] * dfda(pa.value[i], pb.value[i]);
                                      pb.grad[i] += self.grad[i] * dfdb(pa.value[i], pb.value[i]);
                                  }
                              });
        return Var(node);
    }
    if (trailing_broadcast(av, bv)) {
        const std::size_t inner = bv.size();
        const std::size_t batch = av.size() / inner;
        for (std::size_t r = 0; r < batch; ++r)
            for (std::size_t i = 0; i < inner; ++i)
                out[r * inner + i] = fwd(av[r * inner + i], bv[i]);
        auto node = make_node(std::move(out), op, {a.node(), b.node()},
                              [fwd, dfda, dfdb, batch, inner](GraphNode& self) {
                                  GraphNode& pa = *self.parents[0];
                                  GraphNode& pb = *self.parents[1];
                                  for (std::size_t r = 0; r < batch; ++r)
                                      for (std::size_t i = 0; i < inner; ++i) {
                                          const std::size_t k = r * inner + i;
                                          pa.grad[k] += self.grad[k] * dfda(pa.value[k], pb.value[i]);
                                          pb.grad[i] += self.grad[k] * dfdb(pa.value[k], pb.value[i]);
                                      }
                              });
        return Var(node);
    }
    shape_error(op, a, b);
}

Var elementwise_unary(const std::string& op, const Var& a, double (*fwd)(double),
                      double (*dval)(double, double) /* (x, y=f(x)) -> df/dx */) {
    const DenseArray& av = a.value();
    DenseArray out(av.shape());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
    auto node = make_node(std::move(out), op, {a.node()}, [dval](GraphNode& self) {
        GraphNode& pa = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            pa.grad[i] += self.grad[i] * dval(pa.value[i], self.value[i]);
    });
    return Var(node);
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Var Var::leaf(DenseArray value, std::string name) {
    return Var(make_node(std::move(value), std::move(name), {}, nullptr));
}

double Var::scalar() const {
    if (node_->value.size() != 1)
        throw std::logic_error("scalar(): node has shape " + shape_to_string(node_->value.shape()));
    return node_->value[0];
}

Var add(const Var& a, const Var& b) {
    return elementwise_binary(
        "add", a, b, [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
    return elementwise_binary(
        "subtract", a, b, [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
    return elementwise_binary(
        "multiply", a, b, [](double x, double y) { return x * y; },
        [](double, double y) { return y; }, [](double x, double) { return x; });
}

Var matmul(const Var& a, const Var& b) {
    const DenseArray& av = a.value();
    const DenseArray& bv = b.value();
    if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) shape_error("matmul", a, b);
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    DenseArray out({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double x = av.at(i, j);
            for (std::size_t c = 0; c < n; ++c) out.at(i, c) += x * bv.at(j, c);
        }
    auto node = make_node(std::move(out), "matmul", {a.node(), b.node()}, [m, k, n](GraphNode& self) {
        GraphNode& pa = *self.parents[0];
        GraphNode& pb = *self.parents[1];
        // dA = dC * B^T, dB = A^T * dC
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < n; ++c) {
                const double g = self.grad.at(i, c);
                for (std::size_t j = 0; j < k; ++j) {
                    pa.grad.at(i, j) += g * pb.value.at(j, c);
                    pb.grad.at(j, c) += g * pa.value.at(i, j);
                }
            }
    });
    return Var(node);
}

Var relu(const Var& a) {
    return elementwise_unary(
        "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(const Var& a) {
    return elementwise_unary(
        "tanh", a, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
    return elementwise_unary(
        "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

Var log(const Var& a) {
    const DenseArray& av = a.value();
    for (std::size_t i = 0; i < av.size(); ++i)
        require(av[i] > 0.0, "log: nonpositive input " + std::to_string(av[i]) + " at index " +
                                 std::to_string(i) + "; clamp first");
    return elementwise_unary(
        "log", a, [](double x) { return std::log(x); },
        [](double x, double) { return 1.0 / x; });
}

Var exp(const Var& a) {
    return elementwise_unary(
        "exp", a, [](double x) { return std::exp(x); },
        [](double, double y) { return y; });
}

Var mean(const Var& a) {
    const std::size_t n = a.value().size();
    require(n > 0, "mean: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a.value()[i];
    auto node = make_node(DenseArray::scalar(s / static_cast<double>(n)), "mean", {a.node()},
                          [n](GraphNode& self) {
                              GraphNode& pa = *self.parents[0];
                              const double g = self.grad[0] / static_cast<double>(n);
                              for (std::size_t i = 0; i < n; ++i) pa.grad[i] += g;
                          });
    return Var(node);
}

Var sum(const Var& a) {
    const std::size_t n = a.value().size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a.value()[i];
    auto node = make_node(DenseArray::scalar(s), "sum", {a.node()}, [n](GraphNode& self) {
        GraphNode& pa = *self.parents[0];
        for (std::size_t i = 0; i < n; ++i) pa.grad[i] += self.grad[0];
    });
    return Var(node);
}

Var concat(const Var& a, const Var& b) {
    const DenseArray& av = a.value();
    const DenseArray& bv = b.value();
    if (av.rank() == 1 && bv.rank() == 1) {
        DenseArray out({av.size() + bv.size()});
        std::copy(av.data(), av.data() + av.size(), out.data());
        std::copy(bv.data(), bv.data() + bv.size(), out.data() + av.size());
        const std::size_t na = av.size();
        auto node = make_node(std::move(out), "concat", {a.node(), b.node()}, [na](GraphNode& self) {
            GraphNode& pa = *self.parents[0];
            GraphNode& pb = *self.parents[1];
            for (std::size_t i = 0; i < na; ++i) pa.grad[i] += self.grad[i];
            for (std::size_t i = 0; i < pb.grad.size(); ++i) pb.grad[i] += self.grad[na + i];
        });
        return Var(node);
    }
    if (av.rank() == 2 && bv.rank() == 2 && av.rows() == bv.rows()) {
        const std::size_t rows = av.rows(), ca = av.cols(), cb = bv.cols();
        DenseArray out({rows, ca + cb});
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < ca; ++c) out.at(r, c) = av.at(r, c);
            for (std::size_t c = 0; c < cb; ++c) out.at(r, ca + c) = bv.at(r, c);
        }
        auto node = make_node(std::move(out), "concat", {a.node(), b.node()},
                              [rows, ca, cb](GraphNode& self) {
                                  GraphNode& pa = *self.parents[0];
                                  GraphNode& pb = *self.parents[1];
                                  for (std::size_t r = 0; r < rows; ++r) {
                                      for (std::size_t c = 0; c < ca; ++c)
                                          pa.grad.at(r, c) += self.grad.at(r, c);
                                      for (std::size_t c = 0; c < cb; ++c)
                                          pb.grad.at(r, c) += self.grad.at(r, ca + c);
                                  }
                              });
        return Var(node);
    }
    shape_error("concat", a, b);
}

Var scale(const Var& a, double c) {
    const DenseArray& av = a.value();
    DenseArray out(av.shape());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * c;
    auto node = make_node(std::move(out), "scale", {a.node()}, [c](GraphNode& self) {
        GraphNode& pa = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * c;
    });
    return Var(node);
}

Var add_const(const Var& a, double c) {
    const DenseArray& av = a.value();
    DenseArray out(av.shape());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + c;
    auto node = make_node(std::move(out), "add_const", {a.node()}, [](GraphNode& self) {
        GraphNode& pa = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
    });
    return Var(node);
}

Var clamp(const Var& a, double lo, double hi) {
    require(lo < hi, "clamp: lo must be < hi");
    const DenseArray& av = a.value();
    DenseArray out(av.shape());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::min(std::max(av[i], lo), hi);
    auto node = make_node(std::move(out), "clamp", {a.node()}, [lo, hi](GraphNode& self) {
        GraphNode& pa = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            if (pa.value[i] > lo && pa.value[i] < hi) pa.grad[i] += self.grad[i];
    });
    return Var(node);
}

Var gradient_reversal(const Var& x, double lambda) {
    require(lambda >= 0.0, "gradient_reversal: lambda must be >= 0, got " + std::to_string(lambda));
    DenseArray out = x.value();  // bit-exact identity
    auto node = make_node(std::move(out), "gradient_reversal", {x.node()}, [lambda](GraphNode& self) {
        GraphNode& pa = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += -lambda * self.grad[i];
    });
    return Var(node);
}

Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels) {
    const DenseArray& z = logits.value();
    require(z.rank() == 2, "softmax_cross_entropy: logits must be rank-2, got " +
                               shape_to_string(z.shape()));
    const std::size_t batch = z.rows(), classes = z.cols();
    require(labels.size() == batch, "softmax_cross_entropy: " + std::to_string(labels.size()) +
                                        " labels for batch of " + std::to_string(batch));
    for (int y : labels)
        require(y >= 0 && static_cast<std::size_t>(y) < classes,
                "softmax_cross_entropy: class id " + std::to_string(y) + " outside [0," +
                    std::to_string(classes) + ")");

    // stable log-softmax: the row-max shift is a constant, so gradients are
    // unaffected
    double loss = 0.0;
    for (std::size_t r = 0; r < batch; ++r) {
        double zmax = z.at(r, 0);
        for (std::size_t c = 1; c < classes; ++c) zmax = std::max(zmax, z.at(r, c));
        double denom = 0.0;
        for (std::size_t c = 0; c < classes; ++c) denom += std::exp(z.at(r, c) - zmax);
        loss += std::log(denom) - (z.at(r, static_cast<std::size_t>(labels[r])) - zmax);
    }
    loss /= static_cast<double>(batch);

    auto node = make_node(DenseArray::scalar(loss), "softmax_cross_entropy", {logits.node()},
                          [labels, batch, classes](GraphNode& self) {
                              GraphNode& pz = *self.parents[0];
                              const double g = self.grad[0] / static_cast<double>(batch);
                              for (std::size_t r = 0; r < batch; ++r) {
                                  double zmax = pz.value.at(r, 0);
                                  for (std::size_t c = 1; c < classes; ++c)
                                      zmax = std::max(zmax, pz.value.at(r, c));
                                  double denom = 0.0;
                                  for (std::size_t c = 0; c < classes; ++c)
                                      denom += std::exp(pz.value.at(r, c) - zmax);
                                  for (std::size_t c = 0; c < classes; ++c) {
                                      const double p = std::exp(pz.value.at(r, c) - zmax) / denom;
                                      const double onehot =
                                          (static_cast<std::size_t>(labels[r]) == c) ? 1.0 : 0.0;
                                      pz.grad.at(r, c) += g * (p - onehot);
                                  }
                              }
                          });
    return Var(node);
}

Var primitive_forward(const std::string& op_tag, const std::vector<Var>& inputs) {
    auto unary = [&](const char* name) -> const Var& {
        require(inputs.size() == 1, std::string(name) + ": expected 1 input, got " +
                                        std::to_string(inputs.size()));
        return inputs[0];
    };
    auto binary = [&](const char* name) {
        require(inputs.size() == 2, std::string(name) + ": expected 2 inputs, got " +
                                        std::to_string(inputs.size()));
    };
    if (op_tag == "add") { binary("add"); return add(inputs[0], inputs[1]); }
    if (op_tag == "subtract") { binary("subtract"); return sub(inputs[0], inputs[1]); }
    if (op_tag == "multiply") { binary("multiply"); return mul(inputs[0], inputs[1]); }
    if (op_tag == "matmul") { binary("matmul"); return matmul(inputs[0], inputs[1]); }
    if (op_tag == "relu") return relu(unary("relu"));
    if (op_tag == "tanh") return tanh(unary("tanh"));
    if (op_tag == "sigmoid") return sigmoid(unary("sigmoid"));
    if (op_tag == "log") return log(unary("log"));
    if (op_tag == "exp") return exp(unary("exp"));
    if (op_tag == "mean") return mean(unary("mean"));
    if (op_tag == "sum") return sum(unary("sum"));
    if (op_tag == "concat") { binary("concat"); return concat(inputs[0], inputs[1]); }
    throw std::invalid_argument("primitive_forward: unknown op tag '" + op_tag + "'");
}

void backward(const Var& root) {
    if (root.empty()) throw std::invalid_argument("backward: empty root");
    const DenseArray& rv = root.value();
    if (rv.size() != 1 || rv.rank() > 1)
        throw std::invalid_argument("backward: root must be scalar, got shape " +
                                    shape_to_string(rv.shape()));

    // iterative post-order DFS
    std::vector<GraphNode*> order;
    std::unordered_set<GraphNode*> seen;
    std::vector<std::pair<GraphNode*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    seen.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            GraphNode* p = node->parents[next++].get();
            if (seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (GraphNode* n : order) n->grad.fill(0.0);
    root.node()->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

}  // namespace tpg
