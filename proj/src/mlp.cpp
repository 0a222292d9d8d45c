#include "tpg/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace tpg {

void MlpSpec::validate() const {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("MlpSpec: need at least input and output sizes");
    for (std::size_t s : layer_sizes)
        if (s == 0) throw std::invalid_argument("MlpSpec: zero layer size");
}

ParameterStore init_xavier_sqrt2(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    ParameterStore store;
    for (std::size_t k = 0; k + 1 < spec.layer_sizes.size(); ++k) {
        const std::size_t fan_in = spec.layer_sizes[k];
        const std::size_t fan_out = spec.layer_sizes[k + 1];
        const double stddev =
            std::sqrt(2.0) * std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
        DenseArray w({fan_in, fan_out});
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal(0.0, stddev);
        store.add("W" + std::to_string(k), std::move(w));
        store.add("b" + std::to_string(k), DenseArray::zeros({fan_out}));
    }
    return store;
}

GraphNet materialize(const MlpSpec& spec, const ParameterStore& params) {
    GraphNet net;
    net.spec = &spec;
    net.leaves.reserve(params.count());
    for (const auto& [name, value] : params.entries()) net.leaves.push_back(Var::leaf(value, name));
    return net;
}

Var GraphNet::operator()(const Var& input) const {
    const std::size_t layers = spec->layer_sizes.size() - 1;
    if (leaves.size() != 2 * layers)
        throw std::logic_error("GraphNet: parameter count does not match spec");
    if (input.value().rank() != 2 || input.value().cols() != spec->input_width())
        throw std::invalid_argument("GraphNet: input " + shape_to_string(input.value().shape()) +
                                    " does not match first layer width " +
                                    std::to_string(spec->input_width()));
    Var h = input;
    for (std::size_t k = 0; k < layers; ++k) {
        h = add(matmul(h, leaves[2 * k]), leaves[2 * k + 1]);
        if (k + 1 < layers) {
            h = spec->hidden == Nonlinearity::kRelu ? relu(h) : tanh(h);
        } else if (spec->head == OutputHead::kSigmoid) {
            h = sigmoid(h);
        }
    }
    return h;
}

ParameterStore GraphNet::gradients(const ParameterStore& params) const {
    ParameterStore grads;
    for (std::size_t i = 0; i < leaves.size(); ++i)
        grads.add(params.entries()[i].first, leaves[i].grad());
    return grads;
}

DenseArray one_hot(const std::vector<int>& labels, std::size_t num_classes) {
    DenseArray enc({labels.size(), num_classes});
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= num_classes)
            throw std::invalid_argument("one_hot: class id " + std::to_string(labels[r]) +
                                        " outside [0," + std::to_string(num_classes) + ")");
        enc.at(r, static_cast<std::size_t>(labels[r])) = 1.0;
    }
    return enc;
}

Var mlp_forward(const GraphNet& net, const Var& input, const std::vector<int>* labels,
                std::size_t num_classes) {
    if (!labels) return net(input);
    if (input.value().rank() != 2 || input.value().rows() != labels->size())
        throw std::invalid_argument("mlp_forward: " + std::to_string(labels->size()) +
                                    " labels for input " + shape_to_string(input.value().shape()));
    Var cond = concat(input, Var::leaf(one_hot(*labels, num_classes), "onehot"));
    return net(cond);
}

}  // namespace tpg
