#pragma once

#include <functional>
#include <vector>

#include "playrec/tensor.hpp"

namespace playrec {

// Central-finite-difference verification harness.
//
// `forward` evaluates the scalar objective from the tensors' current values.
// `compute_grads` evaluates the same objective and fills each tensor's grad
// with the analytic gradient (it must zero the grads itself). The harness
// perturbs every coordinate by +/-eps and reports the worst relative error
// max |a - n| / max(|a|, |n|, 1e-8) over all coordinates.
double grad_check(const std::vector<Tensor*>& tensors,
                  const std::function<double()>& forward,
                  const std::function<void()>& compute_grads, double eps = 1e-5);

}  // namespace playrec
