#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace playrec {

// Dense row-major tensor of doubles with an optional same-shape gradient
// buffer. Parameters keep the gradient allocated; activations usually leave
// it absent and pass gradient arrays explicitly through backward functions.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> v;  // values, row-major
    std::vector<double> g;  // gradient; empty means absent

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s);

    std::size_t numel() const { return v.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape[i]; }

    bool has_grad() const { return !g.empty(); }
    void ensure_grad();
    void zero_grad();

    // 2-D accessors (rows = shape[0], cols = shape[1]).
    double& at(std::size_t r, std::size_t c) { return v[r * shape[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * shape[1] + c]; }
    double& gat(std::size_t r, std::size_t c) { return g[r * shape[1] + c]; }
    double gat(std::size_t r, std::size_t c) const { return g[r * shape[1] + c]; }

    bool all_finite() const;
    std::string shape_str() const;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
bool same_shape(const Tensor& a, const Tensor& b);

}  // namespace playrec
