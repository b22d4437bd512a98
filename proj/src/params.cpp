#include "playrec/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "playrec/errors.hpp"

namespace playrec {

namespace {

constexpr char kMagic[4] = {'P', 'R', 'P', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagAdam = 1u;

template <typename T>
void write_pod(std::ostream& os, const T& x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& x) {
    is.read(reinterpret_cast<char*>(&x), sizeof(T));
    if (!is) throw FormatError("checkpoint: truncated file");
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& is, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw FormatError("checkpoint: truncated float data");
}

}  // namespace

Tensor& ParamStore::add(const std::string& name, std::vector<std::size_t> shape) {
    if (params_.count(name)) throw DomainError("ParamStore: duplicate parameter " + name);
    auto [it, ok] = params_.emplace(name, Tensor(std::move(shape)));
    it->second.ensure_grad();
    AdamState st;
    st.m.assign(it->second.numel(), 0.0);
    st.v.assign(it->second.numel(), 0.0);
    adam_.emplace(name, std::move(st));
    return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw DomainError("ParamStore: no parameter named " + name);
    return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw DomainError("ParamStore: no parameter named " + name);
    return it->second;
}

std::vector<std::pair<std::string, Tensor*>> ParamStore::items() {
    std::vector<std::pair<std::string, Tensor*>> out;
    out.reserve(params_.size());
    for (auto& [k, t] : params_) out.emplace_back(k, &t);
    return out;
}

std::vector<std::pair<std::string, const Tensor*>> ParamStore::items() const {
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.reserve(params_.size());
    for (auto& [k, t] : params_) out.emplace_back(k, &t);
    return out;
}

void ParamStore::zero_grads() {
    for (auto& [k, t] : params_) t.zero_grad();
}

std::size_t ParamStore::total_params() const {
    std::size_t n = 0;
    for (auto& [k, t] : params_) n += t.numel();
    return n;
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
    for (auto& [name, t] : params_) {
        if (!t.has_grad()) throw DomainError("adam_step: missing gradient for " + name);
        AdamState& st = adam_[name];
        st.t += 1;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
        for (std::size_t i = 0; i < t.numel(); ++i) {
            const double g = t.g[i];
            if (!std::isfinite(g))
                throw DomainError("adam_step: non-finite gradient in parameter " + name);
            st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * g;
            st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * g * g;
            const double mhat = st.m[i] / bc1;
            const double vhat = st.v[i] / bc2;
            t.v[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

void ParamStore::reset_adam() {
    for (auto& [name, st] : adam_) {
        std::fill(st.m.begin(), st.m.end(), 0.0);
        std::fill(st.v.begin(), st.v.end(), 0.0);
        st.t = 0;
    }
}

void ParamStore::save(const std::string& path, const std::string& meta, bool with_adam) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("checkpoint: cannot open for writing: " + path);
    os.write(kMagic, 4);
    write_pod(os, kVersion);
    write_pod(os, with_adam ? kFlagAdam : 0u);
    write_pod(os, static_cast<std::uint64_t>(meta.size()));
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    write_pod(os, static_cast<std::uint64_t>(params_.size()));
    for (const auto& [name, t] : params_) {
        write_pod(os, static_cast<std::uint64_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod(os, static_cast<std::uint64_t>(t.rank()));
        for (std::size_t d : t.shape) write_pod(os, static_cast<std::uint64_t>(d));
        write_doubles(os, t.v);
        if (with_adam) {
            const AdamState& st = adam_.at(name);
            write_doubles(os, st.m);
            write_doubles(os, st.v);
            write_pod(os, st.t);
        }
    }
    if (!os) throw FormatError("checkpoint: write failed: " + path);
}

ParamStore ParamStore::load(const std::string& path, std::string* meta_out, bool* had_adam) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("checkpoint: cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("checkpoint: bad magic in " + path);
    std::uint32_t version = 0, flags = 0;
    read_pod(is, version);
    if (version != kVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    read_pod(is, flags);
    std::uint64_t meta_len = 0;
    read_pod(is, meta_len);
    std::string meta(meta_len, '\0');
    is.read(meta.data(), static_cast<std::streamsize>(meta_len));
    if (!is) throw FormatError("checkpoint: truncated meta");
    std::uint64_t count = 0;
    read_pod(is, count);
    ParamStore store;
    const bool with_adam = (flags & kFlagAdam) != 0;
    for (std::uint64_t p = 0; p < count; ++p) {
        std::uint64_t name_len = 0;
        read_pod(is, name_len);
        std::string name(name_len, '\0');
        is.read(name.data(), static_cast<std::streamsize>(name_len));
        if (!is) throw FormatError("checkpoint: truncated name");
        std::uint64_t rank = 0;
        read_pod(is, rank);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) {
            std::uint64_t e = 0;
            read_pod(is, e);
            d = static_cast<std::size_t>(e);
        }
        Tensor& t = store.add(name, shape);
        read_doubles(is, t.v, shape_numel(shape));
        if (with_adam) {
            AdamState& st = store.adam_[name];
            read_doubles(is, st.m, t.numel());
            read_doubles(is, st.v, t.numel());
            read_pod(is, st.t);
        }
    }
    if (meta_out) *meta_out = meta;
    if (had_adam) *had_adam = with_adam;
    return store;
}

std::uint64_t ParamStore::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [name, t] : params_) {
        feed(name.data(), name.size());
        feed(t.v.data(), t.v.size() * sizeof(double));
    }
    return h;
}

}  // namespace playrec
