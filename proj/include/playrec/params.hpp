#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "playrec/tensor.hpp"

namespace playrec {

// Named parameter collection with per-parameter Adam state and a versioned
// binary checkpoint format:
//   magic "PRPS", u32 version, u32 flags (bit0: Adam state present),
//   u64 meta length + bytes (UTF-8, typically a JSON blob),
//   u64 param count, then per parameter in name order:
//     u64 name length + bytes, u64 rank, u64 extents...,
//     f64 values..., and when flagged: f64 m..., f64 v..., u64 t.
class ParamStore {
  public:
    Tensor& add(const std::string& name, std::vector<std::size_t> shape);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) != 0; }
    std::size_t size() const { return params_.size(); }

    // Name-ordered traversal; deterministic.
    std::vector<std::pair<std::string, Tensor*>> items();
    std::vector<std::pair<std::string, const Tensor*>> items() const;

    void zero_grads();
    std::size_t total_params() const;

    // One Adam update with bias correction over every parameter, consuming
    // the gradients currently stored in each tensor. Throws on non-finite
    // gradients, naming the offending parameter.
    void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void reset_adam();

    void save(const std::string& path, const std::string& meta, bool with_adam) const;
    static ParamStore load(const std::string& path, std::string* meta_out = nullptr,
                           bool* had_adam = nullptr);

    // FNV-1a over parameter names and value bytes, name order. Stamps
    // recommendation indexes so stale model/index pairs are rejected.
    std::uint64_t checksum() const;

  private:
    struct AdamState {
        std::vector<double> m, v;
        std::uint64_t t = 0;
    };
    std::map<std::string, Tensor> params_;
    std::map<std::string, AdamState> adam_;
};

}  // namespace playrec
