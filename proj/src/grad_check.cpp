#include "playrec/grad_check.hpp"

#include <cmath>

#include "playrec/errors.hpp"

namespace playrec {

double grad_check(const std::vector<Tensor*>& tensors,
                  const std::function<double()>& forward,
                  const std::function<void()>& compute_grads, double eps) {
    compute_grads();
    // Snapshot analytic gradients before the probing runs overwrite state.
    std::vector<std::vector<double>> analytic;
    analytic.reserve(tensors.size());
    for (Tensor* t : tensors) {
        if (!t->has_grad()) throw DomainError("grad_check: tensor has no gradient");
        analytic.push_back(t->g);
    }
    double worst = 0.0;
    for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
        Tensor& t = *tensors[ti];
        for (std::size_t i = 0; i < t.numel(); ++i) {
            const double saved = t.v[i];
            t.v[i] = saved + eps;
            const double up = forward();
            t.v[i] = saved - eps;
            const double down = forward();
            t.v[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw DomainError("grad_check: non-finite objective during probing");
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[ti][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            const double rel = std::abs(a - numeric) / denom;
            if (rel > worst) worst = rel;
        }
    }
    return worst;
}

}  // namespace playrec
