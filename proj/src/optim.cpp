#include "tpg/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tpg {

AdamState::AdamState(const ParameterStore& params, AdamParams hp_) : hp(hp_) {
    for (const auto& [name, value] : params.entries()) {
        m.add(name, DenseArray::zeros(value.shape()));
        v.add(name, DenseArray::zeros(value.shape()));
    }
}

void adam_step(ParameterStore& params, const ParameterStore& grads, AdamState& state, double mu,
               double weight_decay) {
    if (!(mu > 0.0)) throw std::invalid_argument("adam_step: mu must be > 0");
    if (!params.same_layout(grads))
        throw std::invalid_argument("adam_step: gradient layout does not match parameters");
    if (!params.same_layout(state.m))
        throw std::invalid_argument("adam_step: optimizer state does not match parameters");

    state.t += 1;
    const double b1 = state.hp.beta1, b2 = state.hp.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));

    for (std::size_t e = 0; e < params.entries().size(); ++e) {
        auto& [name, theta] = params.entries()[e];
        const DenseArray& g = grads.entries()[e].second;
        DenseArray& m = state.m.entries()[e].second;
        DenseArray& v = state.v.entries()[e].second;
        const bool decay = weight_decay != 0.0 && !name.empty() && name[0] == 'W';
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double gi = decay ? g[i] + weight_decay * theta[i] : g[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= mu * mhat / (std::sqrt(vhat) + state.hp.eps);
        }
    }
}

void ScheduleParams::validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ScheduleParams: p outside [0,1]");
    if (!(w_c > 0.0)) throw std::invalid_argument("ScheduleParams: w_c must be > 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("ScheduleParams: alpha must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("ScheduleParams: beta must be > 0");
    if (!(mu0 > 0.0)) throw std::invalid_argument("ScheduleParams: mu0 must be > 0");
}

double lambda_schedule(const ScheduleParams& s) {
    return s.w_c * (2.0 / (1.0 + std::exp(-10.0 * s.p)) - 1.0);
}

double lr_schedule(const ScheduleParams& s) {
    return s.mu0 / std::pow(1.0 + s.alpha * s.p, s.beta);
}

double step_decay(std::int64_t epoch, double mu0, std::int64_t period, double factor) {
    if (epoch < 0 || period <= 0) throw std::invalid_argument("step_decay: bad epoch/period");
    if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("step_decay: factor outside (0,1)");
    return mu0 * std::pow(factor, static_cast<double>(epoch / period));
}

}  // namespace tpg
