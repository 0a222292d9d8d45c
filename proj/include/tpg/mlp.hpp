#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tpg/autodiff.hpp"
#include "tpg/params.hpp"
#include "tpg/rng.hpp"

namespace tpg {

enum class Nonlinearity { kRelu, kTanh };
enum class OutputHead { kLinear, kSigmoid };

// Fully-connected network shape. layer_sizes = [in, hidden..., out]; the
// hidden nonlinearity applies after every layer but the last, the head after
// the last.
struct MlpSpec {
    std::vector<std::size_t> layer_sizes;
    Nonlinearity hidden = Nonlinearity::kRelu;
    OutputHead head = OutputHead::kLinear;

    void validate() const;
    std::size_t input_width() const { return layer_sizes.front(); }
    std::size_t output_width() const { return layer_sizes.back(); }
};

// Weights W{k} [fan_in, fan_out] drawn from N(0, sqrt(2) * sqrt(2/(fan_in +
// fan_out))); biases b{k} zero. Deterministic given seed.
ParameterStore init_xavier_sqrt2(const MlpSpec& spec, std::uint64_t seed);

// One materialization of a network as graph leaves, in parameter-store order.
// Leaves created per training step; frozen nets reuse the same mechanism and
// simply never have their grads read.
struct GraphNet {
    const MlpSpec* spec = nullptr;
    std::vector<Var> leaves;  // W0, b0, W1, b1, ...

    Var operator()(const Var& input) const;

    // harvest d(root)/d(param) after backward(), keyed like the store
    ParameterStore gradients(const ParameterStore& params) const;
};

GraphNet materialize(const MlpSpec& spec, const ParameterStore& params);

// One-hot encode labels as [batch, num_classes]
DenseArray one_hot(const std::vector<int>& labels, std::size_t num_classes);

// Forward pass with optional label conditioning: the one-hot encoding is
// appended to the input columns, so the first layer must be sized
// input_width + num_classes.
Var mlp_forward(const GraphNet& net, const Var& input, const std::vector<int>* labels,
                std::size_t num_classes);

}  // namespace tpg
