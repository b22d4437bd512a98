#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "playrec/tensor.hpp"

namespace playrec {

// Differentiable kernels for the encoder tower. Each op comes as a forward
// function (optionally filling a cache) and a backward function that maps the
// output gradient to input/parameter gradients. Parameter gradients
// accumulate into Tensor::g, so callers zero grads once per step.

enum class Activation { None, Tanh, Relu };

enum class Mode { Train, Infer };

// ---------------------------------------------------------------------------
// Embedding lookup

// Gathers table rows for `ids` into an ids.size() x d matrix. Positions where
// pad[i] != 0 emit a zero row and receive no gradient.
Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids,
                        std::span<const std::uint8_t> pad);

// Scatters dy rows into table.g (table must have grad allocated).
void embedding_lookup_backward(Tensor& table, std::span<const std::int32_t> ids,
                               std::span<const std::uint8_t> pad, const Tensor& dy);

// ---------------------------------------------------------------------------
// 1-D max pooling along the sequence (row) axis, per channel

struct MaxPool1dCache {
    std::size_t rows_in = 0, cols = 0, window = 1, stride = 1;
    std::vector<std::size_t> argmax;  // input row index per output element
};

// L' = floor((L - window) / stride) + 1. Requires L >= window >= 1.
Tensor maxpool1d(const Tensor& x, std::size_t window, std::size_t stride,
                 MaxPool1dCache* cache = nullptr);

// Routes each output gradient to its argmax row (first occurrence on ties).
Tensor maxpool1d_backward(const MaxPool1dCache& cache, const Tensor& dy);

// ---------------------------------------------------------------------------
// Bidirectional LSTM

// One direction's parameters. Gate rows are stacked [input; forget;
// candidate; output], so wx is [4h x d_in], wh is [4h x h], b is [4h].
struct LstmCellRef {
    Tensor* wx = nullptr;
    Tensor* wh = nullptr;
    Tensor* b = nullptr;
};

struct BiLstmRef {
    LstmCellRef fwd, bwd;
    std::size_t hidden = 0;
};

struct LstmDirCache {
    // Per real timestep, in processing order.
    std::vector<std::vector<double>> gate_i, gate_f, gate_g, gate_o, cell, cell_tanh, hidden_out;
};

struct BiLstmCache {
    std::size_t rows = 0, d_in = 0, hidden = 0;
    std::vector<std::size_t> real;  // indices of non-padded rows, ascending
    LstmDirCache fw, bw;
    const Tensor* x = nullptr;  // borrowed input, needed for weight grads
};

// Forward direction runs left-to-right and backward direction right-to-left
// over non-padded rows only; padded rows emit zeros in both halves. Output is
// [L x 2h] with the forward half in columns [0, h).
Tensor bilstm(const Tensor& x, const BiLstmRef& p, std::span<const std::uint8_t> pad,
              BiLstmCache* cache);

// Backpropagation through time. Accumulates into parameter grads, returns dx.
Tensor bilstm_backward(const BiLstmCache& cache, const BiLstmRef& p, const Tensor& dy);

// ---------------------------------------------------------------------------
// 1-D convolution (valid cross-correlation) with ReLU

struct Conv1dCache {
    std::size_t rows_in = 0, c_in = 0, c_out = 0, k = 0;
    const Tensor* x = nullptr;
    std::vector<std::uint8_t> active;  // post-ReLU activity mask per output element
};

// kernel is [k x c_in x c_out]; bias is [c_out]; x is [L x c_in] with L >= k.
// Output is [(L - k + 1) x c_out].
Tensor conv1d_relu(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                   Conv1dCache* cache);

Tensor conv1d_relu_backward(const Conv1dCache& cache, Tensor& kernel, Tensor& bias,
                            const Tensor& dy);

// ---------------------------------------------------------------------------
// Dropout (inverted: survivors scaled by 1/(1-p) at train time)

struct DropoutCache {
    double scale = 1.0;
    std::vector<std::uint8_t> keep;  // empty when dropout was an identity
};

// In Train mode each entry is zeroed independently with probability p and
// survivors are scaled by 1/(1-p); in Infer mode this is the identity.
Tensor dropout(const Tensor& x, double p, Mode mode, std::mt19937_64& rng,
               DropoutCache* cache = nullptr);

Tensor dropout_backward(const DropoutCache& cache, const Tensor& dy);

// ---------------------------------------------------------------------------
// Fully connected layer: y = act(W^T x + b), W is [n x m], x is [n], y is [m]

struct DenseCache {
    const Tensor* x = nullptr;
    std::vector<double> y;  // post-activation output
    Activation act = Activation::None;
};

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b, Activation act,
             DenseCache* cache);

Tensor dense_backward(const DenseCache& cache, Tensor& w, Tensor& b, const Tensor& dy);

// ---------------------------------------------------------------------------
// L2 penalty over designated weight tensors: lambda * sum ||W||^2

double l2_penalty(std::span<Tensor* const> weights, double lambda);

// Adds 2*lambda*W to each tensor's grad, scaled by the upstream dloss.
void l2_penalty_backward(std::span<Tensor* const> weights, double lambda, double dloss);

// ---------------------------------------------------------------------------
// Scalar helpers

inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double z = std::exp(-x);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(x);
    return z / (1.0 + z);
}

// log(1 + e^x), overflow-safe
inline double softplus(double x) {
    const double a = x > 0.0 ? x : 0.0;
    return a + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace playrec
