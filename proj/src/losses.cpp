#include "tpg/losses.hpp"

#include <stdexcept>

namespace tpg {

Var safe_log(const Var& v, double lo) { return log(clamp(v, lo, 1.0)); }

Var hinge_loss(const Var& scores, const std::vector<int>& labels) {
    const DenseArray& s = scores.value();
    const std::size_t batch = s.rank() == 2 ? s.rows() : s.size();
    if (s.rank() == 2 && s.cols() != 1)
        throw std::invalid_argument("hinge_loss: need one score per sample, got " +
                                    shape_to_string(s.shape()));
    if (labels.size() != batch)
        throw std::invalid_argument("hinge_loss: " + std::to_string(labels.size()) +
                                    " labels for batch of " + std::to_string(batch));
    DenseArray y(s.shape());
    for (std::size_t i = 0; i < batch; ++i) {
        if (labels[i] != 1 && labels[i] != -1)
            throw std::invalid_argument("hinge_loss: label " + std::to_string(labels[i]) +
                                        " not in {-1,+1}");
        y[i] = static_cast<double>(labels[i]);
    }
    // mean relu(1 - y*s)
    return mean(relu(add_const(scale(mul(Var::leaf(y, "hinge_labels"), scores), -1.0), 1.0)));
}

Var cross_entropy_loss(const Var& logits, const std::vector<int>& labels) {
    return softmax_cross_entropy(logits, labels);
}

}  // namespace tpg
