#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "playrec/data.hpp"

namespace playrec {

// Pretrained track vectors; one row per vocab entry.
struct TrackEmbeddingTable {
    std::size_t vocab = 0;
    std::size_t dim = 0;
    std::vector<double> vectors;  // row-major, vocab x dim

    const double* row(std::size_t i) const { return &vectors[i * dim]; }
    double* row(std::size_t i) { return &vectors[i * dim]; }
};

struct SgnsConfig {
    std::size_t dim = 32;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double lr = 0.025;
    bool lr_linear_decay = true;
    double unigram_power = 0.75;
};

struct SgnsStats {
    std::vector<double> epoch_mean_loss;  // mean per-pair loss, one entry per epoch
};

// Skip-gram with negative sampling over each user's current+future playlists
// concatenated into one sentence. Negatives are drawn from the unigram
// distribution raised to `unigram_power`, resampled when they hit the context
// track. Returns the input-side vectors. Deterministic in `seed`;
// single-threaded by design.
TrackEmbeddingTable train_sgns(const Corpus& corpus, const SgnsConfig& cfg, std::uint64_t seed,
                               SgnsStats* stats = nullptr);

// a.b / (|a||b|); throws on a zero vector.
double cosine(const std::vector<double>& a, const std::vector<double>& b);
double cosine(const double* a, const double* b, std::size_t n);

// Binary checkpoint: magic "PRW2", u32 version, u64 vocab, u64 dim, f64 data.
void save_embedding_table(const TrackEmbeddingTable& table, const std::string& path);
TrackEmbeddingTable load_embedding_table(const std::string& path);

// Text export: one track per line, index then components.
void export_embedding_table_text(const TrackEmbeddingTable& table, const std::string& path);

}  // namespace playrec
