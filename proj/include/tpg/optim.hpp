#pragma once

#include <cstdint>

#include "tpg/params.hpp"

namespace tpg {

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Per-parameter first/second moments and the shared step counter.
struct AdamState {
    AdamState() = default;
    AdamState(const ParameterStore& params, AdamParams hp);

    AdamParams hp;
    ParameterStore m;
    ParameterStore v;
    std::int64_t t = 0;
};

// Bias-corrected Adam update. Weight decay is added to the gradient as
// weight_decay * theta before the moment updates, and only for weight
// matrices (names beginning with 'W'); biases are not decayed.
void adam_step(ParameterStore& params, const ParameterStore& grads, AdamState& state, double mu,
               double weight_decay = 0.0);

// Training-progress schedules: p grows linearly 0 -> 1 over a run.
struct ScheduleParams {
    double p = 0.0;
    double w_c = 0.1;
    double alpha = 10.0;
    double beta = 0.75;
    double mu0 = 1e-3;

    void validate() const;
};

// w_c * (2/(1+exp(-10 p)) - 1): zero at p=0, saturating toward w_c
double lambda_schedule(const ScheduleParams& s);

// mu0 / (1 + alpha p)^beta
double lr_schedule(const ScheduleParams& s);

// mu0 * factor^floor(epoch/period)
double step_decay(std::int64_t epoch, double mu0, std::int64_t period, double factor);

}  // namespace tpg
