#pragma once

#include <functional>

#include "tpg/params.hpp"

namespace tpg {

// Central-difference gradient (f(theta+eps*e_i) - f(theta-eps*e_i)) / (2 eps)
// per coordinate. The independent oracle for backward(); touches no autodiff
// internals. Rejects eps <= 0 and non-finite f evaluations, naming the
// offending coordinate.
ParameterStore finite_difference_gradient(const std::function<double(const ParameterStore&)>& f,
                                          const ParameterStore& theta, double eps);

}  // namespace tpg
