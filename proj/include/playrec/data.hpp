#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace playrec {

// Dense vocabulary index once a vocab has been built; raw corpora may use
// arbitrary non-negative integers before that.
using TrackId = std::int32_t;

// Ordered track sequence. Order is significant and never canonicalized.
struct Playlist {
    std::vector<TrackId> tracks;
    std::size_t length() const { return tracks.size(); }
    bool operator==(const Playlist&) const = default;
};

// One play in a user's listening history. `position` only needs to be
// monotone within a user; wall-clock time is out of scope.
struct PlayEvent {
    TrackId track = 0;
    std::int64_t position = 0;
    bool skipped = false;
    bool thumbed_down = false;
};

// Fixed-width binary user profile. Block layout is corpus-specific; the
// synthetic generator wires genre bits into [0, genres) and leaves the rest
// zero. An all-zero vector is a legal "no profile" value.
struct SideInfo {
    std::vector<std::uint8_t> bits;
    std::size_t width() const { return bits.size(); }
    bool operator==(const SideInfo&) const = default;
};

// One training/eval record: what the user played recently, what they played
// next, and who they are.
struct SessionExample {
    std::string user_id;
    Playlist current;
    Playlist future;
    SideInfo side;
    bool operator==(const SessionExample&) const = default;
};

struct Vocab {
    // raw id -> dense index; dense indices are assigned 0..V-1 in descending
    // play-count order, ties broken by ascending raw id.
    std::unordered_map<std::int64_t, TrackId> raw_to_dense;
    std::vector<std::int64_t> dense_to_raw;
    std::vector<std::int64_t> play_counts;  // per dense index
    std::size_t size() const { return dense_to_raw.size(); }
};

struct Corpus {
    std::vector<SessionExample> examples;
    Vocab vocab;
    std::size_t side_width = 0;
    // Latent genre per dense track id; filled by the synthetic generator,
    // empty for ingested corpora.
    std::vector<int> track_genres;

    std::size_t vocab_size() const { return vocab.size(); }
    std::size_t num_users() const { return examples.size(); }
};

// Splits a user's ordered history into (current, future). Skipped and
// thumbed-down events are removed first; of the remaining plays the last
// min(50, n) are kept, the final 25 become the future playlist and the
// preceding ones the current playlist. Fewer than 26 valid plays yield
// nothing (the current playlist must be nonempty).
std::optional<SessionExample> sessionize(const std::vector<PlayEvent>& events,
                                         const std::string& user_id, const SideInfo& side);

constexpr std::size_t kFuturePlaylistLen = 25;
constexpr std::size_t kMaxSessionLen = 50;

// User-level partition: no user appears in both halves, train gets
// round(ratio * n) users, deterministic in `seed`.
std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, double ratio,
                                           std::uint64_t seed);

// Builds a dense vocabulary over the examples' raw ids, dropping tracks with
// play count <= min_plays, then rewrites playlists to dense ids. Examples
// whose current or future playlist empties out are dropped.
Corpus build_vocab(const std::vector<SessionExample>& raw_examples, std::size_t side_width,
                   long min_plays);

// ---------------------------------------------------------------------------
// Synthetic corpus generator

// Latent structure: each user prefers a small genre set; histories follow a
// first-order Markov chain over genres that stays in the current genre with
// probability `rho`, so track order carries signal when rho > 1/genres. The
// genre block of the side vector copies the user's true preferences with
// per-bit flip probability `eta`.
struct SynthConfig {
    std::uint64_t users = 2000;
    std::uint64_t vocab = 500;
    int genres = 8;
    int tracks_per_genre = 0;  // 0 = spread vocab evenly over genres
    int pref_genres_min = 1;
    int pref_genres_max = 3;
    double rho = 0.8;        // genre persistence, in [0, 1]
    double eta = 0.1;        // side-info bit flip probability
    std::size_t side_width = 86;
    int min_history = 26;
    int max_history = 50;
    double skip_noise = 0.05;  // extra skipped/thumbed events injected per play
    long min_plays = 5;        // vocabulary cutoff: drop tracks with <= this many plays
};

Corpus generate_synthetic_corpus(const SynthConfig& cfg, std::uint64_t seed);

// Descriptive stats used by the synth subcommand's summary output.
struct CorpusStats {
    std::size_t users = 0;
    std::size_t vocab = 0;
    std::size_t total_plays = 0;
    double mean_current_len = 0.0;
    double mean_future_len = 0.0;
    std::uint64_t within_genre_adjacent = 0;  // adjacent same-genre pairs
    std::uint64_t cross_genre_adjacent = 0;   // adjacent cross-genre pairs
};

CorpusStats corpus_stats(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Persistence: UTF-8 lines, header {"side_width": F, "vocab_size": V}
// followed by one record per line:
//   {"user": str, "current": [int...], "future": [int...], "side": [0/1...]}

void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

// Genre ground truth sidecar (JSON array, one genre index per dense track).
void save_track_genres(const std::vector<int>& genres, const std::string& path);
std::vector<int> load_track_genres(const std::string& path);

}  // namespace playrec
