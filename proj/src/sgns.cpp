#include "playrec/sgns.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "playrec/errors.hpp"
#include "playrec/ops.hpp"
#include "playrec/rng.hpp"

namespace playrec {

namespace {

// Cumulative-weight sampler over the unigram distribution ^ power.
struct UnigramSampler {
    std::vector<double> cdf;

    UnigramSampler(const std::vector<std::int64_t>& counts, double power) {
        cdf.resize(counts.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            acc += std::pow(static_cast<double>(counts[i]), power);
            cdf[i] = acc;
        }
    }

    std::size_t draw(std::mt19937_64& rng) const {
        const double u = rand_unit(rng) * cdf.back();
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        return static_cast<std::size_t>(it - cdf.begin());
    }
};

}  // namespace

TrackEmbeddingTable train_sgns(const Corpus& corpus, const SgnsConfig& cfg, std::uint64_t seed,
                               SgnsStats* stats) {
    const std::size_t vocab = corpus.vocab_size();
    if (vocab == 0) throw DomainError("train_sgns: corpus has no vocabulary");
    if (cfg.dim < 1) throw DomainError("train_sgns: dim must be >= 1");
    if (vocab < cfg.negatives + 1)
        throw DomainError("train_sgns: vocab size " + std::to_string(vocab) +
                          " is smaller than negatives+1");

    auto rng = make_rng(mix_seed(seed, hash_str("sgns")));
    std::vector<double> in(vocab * cfg.dim);   // input-side vectors
    std::vector<double> out(vocab * cfg.dim, 0.0);  // context-side vectors
    const double init = 0.5 / static_cast<double>(cfg.dim);
    for (double& x : in) x = rand_uniform(rng, -init, init);

    std::size_t sampleable = 0;
    for (std::int64_t c : corpus.vocab.play_counts)
        if (c > 0) ++sampleable;
    if (sampleable < 2)
        throw DomainError("train_sgns: need at least two played tracks to sample negatives");
    UnigramSampler sampler(corpus.vocab.play_counts, cfg.unigram_power);

    std::vector<std::vector<TrackId>> sentences;
    sentences.reserve(corpus.examples.size());
    std::size_t total_tokens = 0;
    for (const SessionExample& ex : corpus.examples) {
        std::vector<TrackId> s(ex.current.tracks);
        s.insert(s.end(), ex.future.tracks.begin(), ex.future.tracks.end());
        total_tokens += s.size();
        sentences.push_back(std::move(s));
    }

    if (stats) stats->epoch_mean_loss.assign(cfg.epochs, 0.0);
    std::vector<double> grad_center(cfg.dim);
    std::size_t tokens_done = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t pairs = 0;
        for (const auto& sentence : sentences) {
            for (std::size_t center = 0; center < sentence.size(); ++center) {
                double lr = cfg.lr;
                if (cfg.lr_linear_decay) {
                    const double progress = static_cast<double>(tokens_done) /
                                            static_cast<double>(cfg.epochs * total_tokens + 1);
                    lr = std::max(cfg.lr * (1.0 - progress), cfg.lr * 1e-4);
                }
                ++tokens_done;
                const std::size_t lo = center >= cfg.window ? center - cfg.window : 0;
                const std::size_t hi = std::min(center + cfg.window, sentence.size() - 1);
                double* vc = &in[static_cast<std::size_t>(sentence[center]) * cfg.dim];
                for (std::size_t ctx = lo; ctx <= hi; ++ctx) {
                    if (ctx == center) continue;
                    const auto target = static_cast<std::size_t>(sentence[ctx]);
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    // Positive target plus `negatives` sampled non-targets.
                    for (std::size_t s = 0; s <= cfg.negatives; ++s) {
                        std::size_t word;
                        double label;
                        if (s == 0) {
                            word = target;
                            label = 1.0;
                        } else {
                            do {
                                word = sampler.draw(rng);
                            } while (word == target);
                            label = 0.0;
                        }
                        double* vo = &out[word * cfg.dim];
                        double dot = 0.0;
                        for (std::size_t j = 0; j < cfg.dim; ++j) dot += vc[j] * vo[j];
                        const double pred = sigmoid(dot);
                        loss_sum += label > 0.5 ? softplus(-dot) : softplus(dot);
                        const double g = (pred - label) * lr;
                        for (std::size_t j = 0; j < cfg.dim; ++j) {
                            grad_center[j] += g * vo[j];
                            vo[j] -= g * vc[j];
                        }
                    }
                    for (std::size_t j = 0; j < cfg.dim; ++j) vc[j] -= grad_center[j];
                    ++pairs;
                }
            }
        }
        if (stats && pairs > 0)
            stats->epoch_mean_loss[epoch] = loss_sum / static_cast<double>(pairs);
    }

    TrackEmbeddingTable table;
    table.vocab = vocab;
    table.dim = cfg.dim;
    table.vectors = std::move(in);
    for (double x : table.vectors)
        if (!std::isfinite(x)) throw DomainError("train_sgns: non-finite embedding produced");
    return table;
}

double cosine(const double* a, const double* b, std::size_t n) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw DomainError("cosine: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DomainError("cosine: width mismatch");
    if (a.empty()) throw DomainError("cosine: empty vector");
    return cosine(a.data(), b.data(), a.size());
}

namespace {
constexpr char kTableMagic[4] = {'P', 'R', 'W', '2'};
constexpr std::uint32_t kTableVersion = 1;
}  // namespace

void save_embedding_table(const TrackEmbeddingTable& table, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("save_embedding_table: cannot open for writing: " + path);
    os.write(kTableMagic, 4);
    const std::uint32_t version = kTableVersion;
    const std::uint64_t v = table.vocab, d = table.dim;
    os.write(reinterpret_cast<const char*>(&version), sizeof(version));
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    os.write(reinterpret_cast<const char*>(&d), sizeof(d));
    os.write(reinterpret_cast<const char*>(table.vectors.data()),
             static_cast<std::streamsize>(table.vectors.size() * sizeof(double)));
    if (!os) throw FormatError("save_embedding_table: write failed: " + path);
}

TrackEmbeddingTable load_embedding_table(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("load_embedding_table: cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kTableMagic, 4) != 0)
        throw FormatError("load_embedding_table: bad magic in " + path);
    std::uint32_t version = 0;
    std::uint64_t v = 0, d = 0;
    is.read(reinterpret_cast<char*>(&version), sizeof(version));
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    is.read(reinterpret_cast<char*>(&d), sizeof(d));
    if (!is) throw FormatError("load_embedding_table: truncated header");
    if (version != kTableVersion)
        throw FormatError("load_embedding_table: unsupported version " + std::to_string(version));
    TrackEmbeddingTable table;
    table.vocab = v;
    table.dim = d;
    table.vectors.resize(v * d);
    is.read(reinterpret_cast<char*>(table.vectors.data()),
            static_cast<std::streamsize>(table.vectors.size() * sizeof(double)));
    if (!is) throw FormatError("load_embedding_table: truncated data");
    return table;
}

void export_embedding_table_text(const TrackEmbeddingTable& table, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw FormatError("export_embedding_table_text: cannot open: " + path);
    os.precision(17);
    for (std::size_t i = 0; i < table.vocab; ++i) {
        os << i;
        for (std::size_t j = 0; j < table.dim; ++j) os << " " << table.vectors[i * table.dim + j];
        os << "\n";
    }
}

}  // namespace playrec
