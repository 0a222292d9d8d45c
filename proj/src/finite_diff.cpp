#include "tpg/finite_diff.hpp"

#include <cmath>
#include <stdexcept>

namespace tpg {

ParameterStore finite_difference_gradient(const std::function<double(const ParameterStore&)>& f,
                                          const ParameterStore& theta, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_gradient: eps must be > 0");

    ParameterStore grads;
    ParameterStore probe = theta;
    for (std::size_t e = 0; e < theta.entries().size(); ++e) {
        const auto& [name, value] = theta.entries()[e];
        DenseArray g(value.shape());
        for (std::size_t i = 0; i < value.size(); ++i) {
            DenseArray& pv = probe.entries()[e].second;
            const double saved = pv[i];
            pv[i] = saved + eps;
            const double hi = f(probe);
            pv[i] = saved - eps;
            const double lo = f(probe);
            pv[i] = saved;
            if (!std::isfinite(hi) || !std::isfinite(lo))
                throw std::runtime_error("finite_difference_gradient: non-finite f at " + name +
                                         "[" + std::to_string(i) + "]");
            g[i] = (hi - lo) / (2.0 * eps);
        }
        grads.add(name, std::move(g));
    }
    return grads;
}

}  // namespace tpg
