#include "playrec/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "playrec/errors.hpp"
#include "playrec/rng.hpp"

namespace playrec {

// ---------------------------------------------------------------------------
// Embedding lookup

Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids,
                        std::span<const std::uint8_t> pad) {
    if (table.rank() != 2) throw DomainError("embedding_lookup: table must be V x d");
    if (pad.size() != ids.size()) throw DomainError("embedding_lookup: pad/ids length mismatch");
    const std::size_t vocab = table.dim(0);
    const std::size_t d = table.dim(1);
    Tensor out({ids.size(), d});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::int32_t id = ids[i];
        if (id < 0 || static_cast<std::size_t>(id) >= vocab)
            throw DomainError("embedding_lookup: id " + std::to_string(id) +
                              " out of range (vocab=" + std::to_string(vocab) + ")");
        if (pad[i]) continue;  // zero row
        const double* src = &table.v[static_cast<std::size_t>(id) * d];
        std::copy(src, src + d, &out.v[i * d]);
    }
    return out;
}

void embedding_lookup_backward(Tensor& table, std::span<const std::int32_t> ids,
                               std::span<const std::uint8_t> pad, const Tensor& dy) {
    const std::size_t d = table.dim(1);
    if (dy.rank() != 2 || dy.dim(0) != ids.size() || dy.dim(1) != d)
        throw DomainError("embedding_lookup_backward: dy shape mismatch");
    table.ensure_grad();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (pad[i]) continue;
        double* dst = &table.g[static_cast<std::size_t>(ids[i]) * d];
        const double* src = &dy.v[i * d];
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
}

// ---------------------------------------------------------------------------
// Max pooling

Tensor maxpool1d(const Tensor& x, std::size_t window, std::size_t stride,
                 MaxPool1dCache* cache) {
    if (x.rank() != 2) throw DomainError("maxpool1d: input must be L x d");
    if (window < 1 || stride < 1) throw DomainError("maxpool1d: window and stride must be >= 1");
    const std::size_t rows = x.dim(0), cols = x.dim(1);
    if (rows < window)
        throw DomainError("maxpool1d: input length " + std::to_string(rows) +
                          " shorter than window " + std::to_string(window));
    const std::size_t out_rows = (rows - window) / stride + 1;
    Tensor out({out_rows, cols});
    if (cache) {
        cache->rows_in = rows;
        cache->cols = cols;
        cache->window = window;
        cache->stride = stride;
        cache->argmax.assign(out_rows * cols, 0);
    }
    for (std::size_t o = 0; o < out_rows; ++o) {
        const std::size_t start = o * stride;
        for (std::size_t c = 0; c < cols; ++c) {
            double best = x.at(start, c);
            std::size_t best_r = start;
            for (std::size_t r = start + 1; r < start + window; ++r) {
                const double val = x.at(r, c);
                if (val > best) {  // strict: first occurrence wins ties
                    best = val;
                    best_r = r;
                }
            }
            out.at(o, c) = best;
            if (cache) cache->argmax[o * cols + c] = best_r;
        }
    }
    return out;
}

Tensor maxpool1d_backward(const MaxPool1dCache& cache, const Tensor& dy) {
    const std::size_t out_rows = (cache.rows_in - cache.window) / cache.stride + 1;
    if (dy.rank() != 2 || dy.dim(0) != out_rows || dy.dim(1) != cache.cols)
        throw DomainError("maxpool1d_backward: dy shape mismatch");
    Tensor dx({cache.rows_in, cache.cols});
    for (std::size_t o = 0; o < out_rows; ++o)
        for (std::size_t c = 0; c < cache.cols; ++c)
            dx.at(cache.argmax[o * cache.cols + c], c) += dy.at(o, c);
    return dx;
}

// ---------------------------------------------------------------------------
// Bidirectional LSTM

namespace {

void check_cell_shapes(const LstmCellRef& cell, std::size_t h, std::size_t d_in,
                       const char* which) {
    const bool ok = cell.wx && cell.wh && cell.b && cell.wx->rank() == 2 &&
                    cell.wh->rank() == 2 && cell.b->rank() == 1 &&
                    cell.wx->dim(0) == 4 * h && cell.wx->dim(1) == d_in &&
                    cell.wh->dim(0) == 4 * h && cell.wh->dim(1) == h && cell.b->dim(0) == 4 * h;
    if (!ok) throw DomainError(std::string("bilstm: bad ") + which + " cell parameter shapes");
}

// Runs one direction over x rows given by `order`; appends per-step caches.
void run_direction(const Tensor& x, const LstmCellRef& cell, std::size_t h,
                   const std::vector<std::size_t>& order, LstmDirCache& dc) {
    const std::size_t d_in = x.dim(1);
    std::vector<double> hprev(h, 0.0), cprev(h, 0.0), z(4 * h);
    const std::size_t steps = order.size();
    dc.gate_i.assign(steps, {});
    dc.gate_f.assign(steps, {});
    dc.gate_g.assign(steps, {});
    dc.gate_o.assign(steps, {});
    dc.cell.assign(steps, {});
    dc.cell_tanh.assign(steps, {});
    dc.hidden_out.assign(steps, {});
    for (std::size_t s = 0; s < steps; ++s) {
        const double* xt = &x.v[order[s] * d_in];
        for (std::size_t r = 0; r < 4 * h; ++r) {
            double acc = cell.b->v[r];
            const double* wxr = &cell.wx->v[r * d_in];
            for (std::size_t j = 0; j < d_in; ++j) acc += wxr[j] * xt[j];
            const double* whr = &cell.wh->v[r * h];
            for (std::size_t j = 0; j < h; ++j) acc += whr[j] * hprev[j];
            z[r] = acc;
        }
        auto& gi = dc.gate_i[s];
        auto& gf = dc.gate_f[s];
        auto& gg = dc.gate_g[s];
        auto& go = dc.gate_o[s];
        auto& ct = dc.cell[s];
        auto& th = dc.cell_tanh[s];
        auto& hs = dc.hidden_out[s];
        gi.resize(h);
        gf.resize(h);
        gg.resize(h);
        go.resize(h);
        ct.resize(h);
        th.resize(h);
        hs.resize(h);
        for (std::size_t j = 0; j < h; ++j) {
            gi[j] = sigmoid(z[j]);
            gf[j] = sigmoid(z[h + j]);
            gg[j] = std::tanh(z[2 * h + j]);
            go[j] = sigmoid(z[3 * h + j]);
            ct[j] = gf[j] * cprev[j] + gi[j] * gg[j];
            th[j] = std::tanh(ct[j]);
            hs[j] = go[j] * th[j];
        }
        hprev = hs;
        cprev = ct;
    }
}

// BPTT over one direction; accumulates parameter grads and dx rows.
void backward_direction(const BiLstmCache& cache, const LstmCellRef& cell,
                        const LstmDirCache& dc, const std::vector<std::size_t>& order,
                        const Tensor& dy, std::size_t col_off, Tensor& dx) {
    const std::size_t h = cache.hidden;
    const Tensor& x = *cache.x;
    const std::size_t d_in = cache.d_in;
    cell.wx->ensure_grad();
    cell.wh->ensure_grad();
    cell.b->ensure_grad();
    const std::size_t steps = order.size();
    std::vector<double> dh(h, 0.0), dcell(h, 0.0), dz(4 * h);
    for (std::size_t si = steps; si-- > 0;) {
        const std::size_t row = order[si];
        for (std::size_t j = 0; j < h; ++j) dh[j] += dy.at(row, col_off + j);
        const auto& gi = dc.gate_i[si];
        const auto& gf = dc.gate_f[si];
        const auto& gg = dc.gate_g[si];
        const auto& go = dc.gate_o[si];
        const auto& th = dc.cell_tanh[si];
        const std::vector<double>* cprev = si > 0 ? &dc.cell[si - 1] : nullptr;
        for (std::size_t j = 0; j < h; ++j) {
            const double dout = dh[j];
            dcell[j] += dout * go[j] * (1.0 - th[j] * th[j]);
            const double d_go = dout * th[j];
            const double d_gi = dcell[j] * gg[j];
            const double d_gf = dcell[j] * (cprev ? (*cprev)[j] : 0.0);
            const double d_gg = dcell[j] * gi[j];
            dz[j] = d_gi * gi[j] * (1.0 - gi[j]);
            dz[h + j] = d_gf * gf[j] * (1.0 - gf[j]);
            dz[2 * h + j] = d_gg * (1.0 - gg[j] * gg[j]);
            dz[3 * h + j] = d_go * go[j] * (1.0 - go[j]);
        }
        const double* xt = &x.v[row * d_in];
        const std::vector<double>* hprev = si > 0 ? &dc.hidden_out[si - 1] : nullptr;
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t r = 0; r < 4 * h; ++r) {
            const double dzr = dz[r];
            if (dzr == 0.0) continue;
            double* gwx = &cell.wx->g[r * d_in];
            for (std::size_t j = 0; j < d_in; ++j) gwx[j] += dzr * xt[j];
            double* gwh = &cell.wh->g[r * h];
            if (hprev)
                for (std::size_t j = 0; j < h; ++j) gwh[j] += dzr * (*hprev)[j];
            cell.b->g[r] += dzr;
            const double* wxr = &cell.wx->v[r * d_in];
            double* dxr = &dx.v[row * d_in];
            for (std::size_t j = 0; j < d_in; ++j) dxr[j] += dzr * wxr[j];
            const double* whr = &cell.wh->v[r * h];
            for (std::size_t j = 0; j < h; ++j) dh[j] += dzr * whr[j];
        }
        for (std::size_t j = 0; j < h; ++j) dcell[j] *= gf[j];  // flows to previous step
    }
}

}  // namespace

Tensor bilstm(const Tensor& x, const BiLstmRef& p, std::span<const std::uint8_t> pad,
              BiLstmCache* cache) {
    if (x.rank() != 2) throw DomainError("bilstm: input must be L x d");
    const std::size_t rows = x.dim(0), d_in = x.dim(1);
    if (pad.size() != rows) throw DomainError("bilstm: pad mask length mismatch");
    const std::size_t h = p.hidden;
    check_cell_shapes(p.fwd, h, d_in, "forward");
    check_cell_shapes(p.bwd, h, d_in, "backward");

    std::vector<std::size_t> real;
    real.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i)
        if (!pad[i]) real.push_back(i);

    BiLstmCache local;
    BiLstmCache& c = cache ? *cache : local;
    c.rows = rows;
    c.d_in = d_in;
    c.hidden = h;
    c.real = real;
    c.x = &x;

    run_direction(x, p.fwd, h, c.real, c.fw);
    std::vector<std::size_t> rev(c.real.rbegin(), c.real.rend());
    run_direction(x, p.bwd, h, rev, c.bw);

    Tensor out({rows, 2 * h});
    for (std::size_t s = 0; s < c.real.size(); ++s) {
        const std::size_t row = c.real[s];
        const auto& hf = c.fw.hidden_out[s];
        const auto& hb = c.bw.hidden_out[c.real.size() - 1 - s];
        for (std::size_t j = 0; j < h; ++j) {
            out.at(row, j) = hf[j];
            out.at(row, h + j) = hb[j];
        }
    }
    return out;
}

Tensor bilstm_backward(const BiLstmCache& cache, const BiLstmRef& p, const Tensor& dy) {
    if (dy.rank() != 2 || dy.dim(0) != cache.rows || dy.dim(1) != 2 * cache.hidden)
        throw DomainError("bilstm_backward: dy shape mismatch");
    Tensor dx({cache.rows, cache.d_in});
    backward_direction(cache, p.fwd, cache.fw, cache.real, dy, 0, dx);
    std::vector<std::size_t> rev(cache.real.rbegin(), cache.real.rend());
    backward_direction(cache, p.bwd, cache.bw, rev, dy, cache.hidden, dx);
    return dx;
}

// ---------------------------------------------------------------------------
// Convolution

Tensor conv1d_relu(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                   Conv1dCache* cache) {
    if (x.rank() != 2 || kernel.rank() != 3 || bias.rank() != 1)
        throw DomainError("conv1d_relu: expected x [L x c_in], kernel [k x c_in x c_out]");
    const std::size_t rows = x.dim(0), c_in = x.dim(1);
    const std::size_t k = kernel.dim(0), c_out = kernel.dim(2);
    if (kernel.dim(1) != c_in) throw DomainError("conv1d_relu: kernel c_in mismatch");
    if (bias.dim(0) != c_out) throw DomainError("conv1d_relu: bias width mismatch");
    if (rows < k)
        throw DomainError("conv1d_relu: input length " + std::to_string(rows) +
                          " shorter than filter " + std::to_string(k) + " (caller must pad)");
    const std::size_t out_rows = rows - k + 1;
    Tensor out({out_rows, c_out});
    if (cache) {
        cache->rows_in = rows;
        cache->c_in = c_in;
        cache->c_out = c_out;
        cache->k = k;
        cache->x = &x;
        cache->active.assign(out_rows * c_out, 0);
    }
    for (std::size_t t = 0; t < out_rows; ++t) {
        for (std::size_t co = 0; co < c_out; ++co) {
            double acc = bias.v[co];
            for (std::size_t dt = 0; dt < k; ++dt) {
                const double* xr = &x.v[(t + dt) * c_in];
                const double* kr = &kernel.v[(dt * c_in) * c_out + co];
                for (std::size_t ci = 0; ci < c_in; ++ci) acc += xr[ci] * kr[ci * c_out];
            }
            const bool on = acc > 0.0;
            out.at(t, co) = on ? acc : 0.0;
            if (cache && on) cache->active[t * c_out + co] = 1;
        }
    }
    return out;
}

Tensor conv1d_relu_backward(const Conv1dCache& cache, Tensor& kernel, Tensor& bias,
                            const Tensor& dy) {
    const std::size_t out_rows = cache.rows_in - cache.k + 1;
    if (dy.rank() != 2 || dy.dim(0) != out_rows || dy.dim(1) != cache.c_out)
        throw DomainError("conv1d_relu_backward: dy shape mismatch");
    kernel.ensure_grad();
    bias.ensure_grad();
    const Tensor& x = *cache.x;
    Tensor dx({cache.rows_in, cache.c_in});
    for (std::size_t t = 0; t < out_rows; ++t) {
        for (std::size_t co = 0; co < cache.c_out; ++co) {
            if (!cache.active[t * cache.c_out + co]) continue;
            const double d = dy.at(t, co);
            if (d == 0.0) continue;
            bias.g[co] += d;
            for (std::size_t dt = 0; dt < cache.k; ++dt) {
                const double* xr = &x.v[(t + dt) * cache.c_in];
                double* dxr = &dx.v[(t + dt) * cache.c_in];
                const std::size_t koff = (dt * cache.c_in) * cache.c_out + co;
                for (std::size_t ci = 0; ci < cache.c_in; ++ci) {
                    kernel.g[koff + ci * cache.c_out] += d * xr[ci];
                    dxr[ci] += d * kernel.v[koff + ci * cache.c_out];
                }
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Dropout

Tensor dropout(const Tensor& x, double p, Mode mode, std::mt19937_64& rng,
               DropoutCache* cache) {
    if (p < 0.0 || p >= 1.0) throw DomainError("dropout: p must be in [0, 1)");
    if (mode == Mode::Infer || p == 0.0) {
        if (cache) {
            cache->scale = 1.0;
            cache->keep.clear();
        }
        return x;
    }
    const double scale = 1.0 / (1.0 - p);
    Tensor out = x;
    DropoutCache local;
    DropoutCache& c = cache ? *cache : local;
    c.scale = scale;
    c.keep.assign(x.numel(), 0);
    for (std::size_t i = 0; i < x.numel(); ++i) {
        if (rand_unit(rng) >= p) {
            c.keep[i] = 1;
            out.v[i] = x.v[i] * scale;
        } else {
            out.v[i] = 0.0;
        }
    }
    return out;
}

Tensor dropout_backward(const DropoutCache& cache, const Tensor& dy) {
    if (cache.keep.empty()) return dy;  // identity pass
    if (dy.numel() != cache.keep.size()) throw DomainError("dropout_backward: size mismatch");
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.numel(); ++i)
        dx.v[i] = cache.keep[i] ? dy.v[i] * cache.scale : 0.0;
    return dx;
}

// ---------------------------------------------------------------------------
// Dense

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b, Activation act,
             DenseCache* cache) {
    if (x.rank() != 1 || w.rank() != 2 || b.rank() != 1)
        throw DomainError("dense: expected x [n], w [n x m], b [m]");
    const std::size_t n = x.dim(0), m = w.dim(1);
    if (w.dim(0) != n || b.dim(0) != m)
        throw DomainError("dense: shape mismatch, x " + x.shape_str() + " w " + w.shape_str());
    Tensor out({m});
    for (std::size_t j = 0; j < m; ++j) out.v[j] = b.v[j];
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x.v[i];
        if (xi == 0.0) continue;
        const double* wr = &w.v[i * m];
        for (std::size_t j = 0; j < m; ++j) out.v[j] += xi * wr[j];
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (act == Activation::Tanh)
            out.v[j] = std::tanh(out.v[j]);
        else if (act == Activation::Relu)
            out.v[j] = out.v[j] > 0.0 ? out.v[j] : 0.0;
    }
    if (cache) {
        cache->x = &x;
        cache->y = out.v;
        cache->act = act;
    }
    return out;
}

Tensor dense_backward(const DenseCache& cache, Tensor& w, Tensor& b, const Tensor& dy) {
    const std::size_t n = w.dim(0), m = w.dim(1);
    if (dy.numel() != m) throw DomainError("dense_backward: dy width mismatch");
    w.ensure_grad();
    b.ensure_grad();
    const Tensor& x = *cache.x;
    std::vector<double> dz(m);
    for (std::size_t j = 0; j < m; ++j) {
        double d = dy.v[j];
        if (cache.act == Activation::Tanh)
            d *= 1.0 - cache.y[j] * cache.y[j];
        else if (cache.act == Activation::Relu)
            d *= cache.y[j] > 0.0 ? 1.0 : 0.0;
        dz[j] = d;
        b.g[j] += d;
    }
    Tensor dx({n});
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x.v[i];
        const double* wr = &w.v[i * m];
        double* gw = &w.g[i * m];
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            gw[j] += dz[j] * xi;
            acc += dz[j] * wr[j];
        }
        dx.v[i] = acc;
    }
    return dx;
}

// ---------------------------------------------------------------------------
// L2 penalty

double l2_penalty(std::span<Tensor* const> weights, double lambda) {
    if (lambda < 0.0) throw DomainError("l2_penalty: lambda must be >= 0");
    double acc = 0.0;
    for (const Tensor* w : weights)
        for (double x : w->v) acc += x * x;
    return lambda * acc;
}

void l2_penalty_backward(std::span<Tensor* const> weights, double lambda, double dloss) {
    const double c = 2.0 * lambda * dloss;
    if (c == 0.0) return;
    for (Tensor* w : weights) {
        w->ensure_grad();
        for (std::size_t i = 0; i < w->numel(); ++i) w->g[i] += c * w->v[i];
    }
}

}  // namespace playrec
