#include "playrec/tensor.hpp"

#include <cmath>
#include <sstream>

namespace playrec {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    v.assign(shape_numel(shape), 0.0);
}

void Tensor::ensure_grad() {
    if (g.size() != v.size()) g.assign(v.size(), 0.0);
}

void Tensor::zero_grad() { g.assign(v.size(), 0.0); }

bool Tensor::all_finite() const {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

}  // namespace playrec
