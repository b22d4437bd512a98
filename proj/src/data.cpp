#include "playrec/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "playrec/errors.hpp"
#include "playrec/logging.hpp"
#include "playrec/rng.hpp"

namespace playrec {

using nlohmann::json;

std::optional<SessionExample> sessionize(const std::vector<PlayEvent>& events,
                                         const std::string& user_id, const SideInfo& side) {
    std::vector<TrackId> plays;
    plays.reserve(events.size());
    for (const PlayEvent& e : events) {
        if (e.skipped || e.thumbed_down) continue;
        plays.push_back(e.track);
    }
    if (plays.size() < kFuturePlaylistLen + 1) return std::nullopt;
    const std::size_t keep = std::min(plays.size(), kMaxSessionLen);
    const std::size_t start = plays.size() - keep;
    SessionExample ex;
    ex.user_id = user_id;
    ex.side = side;
    const std::size_t split = plays.size() - kFuturePlaylistLen;
    ex.current.tracks.assign(plays.begin() + static_cast<std::ptrdiff_t>(start),
                             plays.begin() + static_cast<std::ptrdiff_t>(split));
    ex.future.tracks.assign(plays.begin() + static_cast<std::ptrdiff_t>(split), plays.end());
    return ex;
}

std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, double ratio,
                                           std::uint64_t seed) {
    if (corpus.examples.empty()) throw DomainError("split_train_test: empty corpus");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw DomainError("split_train_test: ratio must be in (0, 1)");
    const std::size_t n = corpus.examples.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(mix_seed(seed, hash_str("train_test_split")));
    shuffle_vec(order, rng);
    auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    n_train = std::min(n_train, n);
    if (n_train == n)
        log_warn("split_train_test: test split is empty (" + std::to_string(n) + " users)");
    if (n_train == 0) {
        log_warn("split_train_test: train split would be empty; moving one user to train");
        n_train = 1;
    }
    Corpus train, test;
    train.vocab = corpus.vocab;
    test.vocab = corpus.vocab;
    train.side_width = corpus.side_width;
    test.side_width = corpus.side_width;
    train.track_genres = corpus.track_genres;
    test.track_genres = corpus.track_genres;
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    // Keep corpus order inside each split so output does not leak shuffle state.
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    for (std::size_t i : train_idx) train.examples.push_back(corpus.examples[i]);
    for (std::size_t i : test_idx) test.examples.push_back(corpus.examples[i]);
    return {std::move(train), std::move(test)};
}

namespace {

void recount_plays(Corpus& corpus) {
    corpus.vocab.play_counts.assign(corpus.vocab.size(), 0);
    for (const SessionExample& ex : corpus.examples) {
        for (TrackId t : ex.current.tracks) corpus.vocab.play_counts[static_cast<std::size_t>(t)]++;
        for (TrackId t : ex.future.tracks) corpus.vocab.play_counts[static_cast<std::size_t>(t)]++;
    }
}

}  // namespace

Corpus build_vocab(const std::vector<SessionExample>& raw_examples, std::size_t side_width,
                   long min_plays) {
    if (min_plays < 0) throw DomainError("build_vocab: min_plays must be >= 0");
    std::unordered_map<std::int64_t, std::int64_t> counts;
    for (const SessionExample& ex : raw_examples) {
        for (TrackId t : ex.current.tracks) counts[t]++;
        for (TrackId t : ex.future.tracks) counts[t]++;
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> surviving;  // (raw id, count)
    for (const auto& [raw, c] : counts)
        if (c > min_plays) surviving.emplace_back(raw, c);
    if (surviving.empty())
        throw DomainError("build_vocab: every track fell below the play-count cutoff");
    std::sort(surviving.begin(), surviving.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;  // descending count
        return a.first < b.first;                              // ascending raw id
    });
    Corpus out;
    out.side_width = side_width;
    out.vocab.dense_to_raw.reserve(surviving.size());
    out.vocab.play_counts.reserve(surviving.size());
    for (std::size_t i = 0; i < surviving.size(); ++i) {
        out.vocab.raw_to_dense[surviving[i].first] = static_cast<TrackId>(i);
        out.vocab.dense_to_raw.push_back(surviving[i].first);
        out.vocab.play_counts.push_back(surviving[i].second);
    }
    for (const SessionExample& ex : raw_examples) {
        SessionExample mapped;
        mapped.user_id = ex.user_id;
        mapped.side = ex.side;
        if (mapped.side.width() != side_width)
            throw DomainError("build_vocab: side width mismatch for user " + ex.user_id);
        auto map_playlist = [&](const Playlist& in, Playlist& dst) {
            for (TrackId t : in.tracks) {
                auto it = out.vocab.raw_to_dense.find(t);
                if (it != out.vocab.raw_to_dense.end()) dst.tracks.push_back(it->second);
            }
        };
        map_playlist(ex.current, mapped.current);
        map_playlist(ex.future, mapped.future);
        if (mapped.current.tracks.empty() || mapped.future.tracks.empty()) continue;
        out.examples.push_back(std::move(mapped));
    }
    recount_plays(out);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic generation

namespace {

struct UserProfile {
    std::vector<int> pref_genres;
    SideInfo side;
};

UserProfile make_profile(const SynthConfig& cfg, std::mt19937_64& rng) {
    UserProfile u;
    const int span = cfg.pref_genres_max - cfg.pref_genres_min + 1;
    const int k = cfg.pref_genres_min + static_cast<int>(rand_index(rng, static_cast<std::uint64_t>(span)));
    std::vector<int> all(static_cast<std::size_t>(cfg.genres));
    std::iota(all.begin(), all.end(), 0);
    shuffle_vec(all, rng);
    u.pref_genres.assign(all.begin(), all.begin() + k);
    std::sort(u.pref_genres.begin(), u.pref_genres.end());
    u.side.bits.assign(cfg.side_width, 0);
    for (int g = 0; g < cfg.genres; ++g) {
        const bool preferred =
            std::find(u.pref_genres.begin(), u.pref_genres.end(), g) != u.pref_genres.end();
        bool bit = preferred;
        if (cfg.eta > 0.0 && rand_unit(rng) < cfg.eta) bit = !bit;
        u.side.bits[static_cast<std::size_t>(g)] = bit ? 1 : 0;
    }
    return u;
}

}  // namespace

Corpus generate_synthetic_corpus(const SynthConfig& cfg, std::uint64_t seed) {
    if (cfg.users == 0) throw DomainError("generate_synthetic_corpus: empty corpus (users = 0)");
    if (cfg.genres <= 0) throw DomainError("generate_synthetic_corpus: genres must be positive");
    if (cfg.vocab < static_cast<std::uint64_t>(cfg.genres))
        throw DomainError("generate_synthetic_corpus: vocab smaller than genre count");
    if (cfg.rho < 0.0 || cfg.rho > 1.0)
        throw DomainError("generate_synthetic_corpus: rho must be in [0, 1]");
    if (cfg.eta < 0.0 || cfg.eta > 1.0)
        throw DomainError("generate_synthetic_corpus: eta must be in [0, 1]");
    if (cfg.side_width < static_cast<std::size_t>(cfg.genres))
        throw DomainError("generate_synthetic_corpus: side_width must cover the genre block");
    if (cfg.pref_genres_min < 1 || cfg.pref_genres_max < cfg.pref_genres_min ||
        cfg.pref_genres_max > cfg.genres)
        throw DomainError("generate_synthetic_corpus: bad pref_genres range");
    if (cfg.min_history < static_cast<int>(kFuturePlaylistLen) + 1 ||
        cfg.max_history < cfg.min_history)
        throw DomainError("generate_synthetic_corpus: history range must start at 26");

    // Partition raw track ids into genres. raw id -> genre is id / per-genre
    // block (last genre absorbs the remainder).
    const auto vocab = static_cast<std::int64_t>(cfg.vocab);
    std::int64_t per_genre = cfg.tracks_per_genre > 0
                                 ? cfg.tracks_per_genre
                                 : vocab / cfg.genres;
    if (per_genre <= 0) throw DomainError("generate_synthetic_corpus: tracks_per_genre must be positive");
    if (per_genre * cfg.genres > vocab)
        throw DomainError("generate_synthetic_corpus: tracks_per_genre * genres exceeds vocab");
    auto genre_of_raw = [&](std::int64_t raw) {
        return static_cast<int>(std::min<std::int64_t>(raw / per_genre, cfg.genres - 1));
    };
    auto genre_block = [&](int g) -> std::pair<std::int64_t, std::int64_t> {
        const std::int64_t lo = per_genre * g;
        const std::int64_t hi = g == cfg.genres - 1 ? vocab : per_genre * (g + 1);
        return {lo, hi};
    };

    std::vector<SessionExample> raw_examples;
    raw_examples.reserve(cfg.users);
    for (std::uint64_t u = 0; u < cfg.users; ++u) {
        auto rng = make_rng(mix_seed(seed, hash_str("synth_user"), u));
        UserProfile profile = make_profile(cfg, rng);
        const int n_valid = cfg.min_history +
            static_cast<int>(rand_index(rng, static_cast<std::uint64_t>(cfg.max_history - cfg.min_history + 1)));
        std::vector<PlayEvent> events;
        std::int64_t pos = 0;
        int genre = profile.pref_genres[rand_index(rng, profile.pref_genres.size())];
        for (int i = 0; i < n_valid; ++i) {
            // Noise events are filtered out by sessionize and never count as plays.
            while (cfg.skip_noise > 0.0 && rand_unit(rng) < cfg.skip_noise) {
                const auto [nlo, nhi] = genre_block(genre);
                PlayEvent noise;
                noise.track = static_cast<TrackId>(nlo + static_cast<std::int64_t>(rand_index(
                                 rng, static_cast<std::uint64_t>(nhi - nlo))));
                noise.position = pos++;
                if (rand_unit(rng) < 0.5)
                    noise.skipped = true;
                else
                    noise.thumbed_down = true;
                events.push_back(noise);
            }
            const auto [lo, hi] = genre_block(genre);
            PlayEvent e;
            e.track = static_cast<TrackId>(lo + static_cast<std::int64_t>(rand_index(
                          rng, static_cast<std::uint64_t>(hi - lo))));
            e.position = pos++;
            events.push_back(e);
            if (rand_unit(rng) >= cfg.rho)
                genre = profile.pref_genres[rand_index(rng, profile.pref_genres.size())];
        }
        char name[32];
        std::snprintf(name, sizeof(name), "u%06llu", static_cast<unsigned long long>(u));
        auto ex = sessionize(events, name, profile.side);
        if (ex) raw_examples.push_back(std::move(*ex));
    }

    Corpus corpus = build_vocab(raw_examples, cfg.side_width, cfg.min_plays);
    corpus.track_genres.resize(corpus.vocab.size());
    for (std::size_t d = 0; d < corpus.vocab.size(); ++d)
        corpus.track_genres[d] = genre_of_raw(corpus.vocab.dense_to_raw[d]);
    if (corpus.examples.empty())
        throw DomainError("generate_synthetic_corpus: no sessions survived vocabulary filtering");
    return corpus;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats s;
    s.users = corpus.examples.size();
    s.vocab = corpus.vocab.size();
    double cur_len = 0.0, fut_len = 0.0;
    for (const SessionExample& ex : corpus.examples) {
        s.total_plays += ex.current.length() + ex.future.length();
        cur_len += static_cast<double>(ex.current.length());
        fut_len += static_cast<double>(ex.future.length());
        if (!corpus.track_genres.empty()) {
            std::vector<TrackId> all(ex.current.tracks);
            all.insert(all.end(), ex.future.tracks.begin(), ex.future.tracks.end());
            for (std::size_t i = 1; i < all.size(); ++i) {
                const int ga = corpus.track_genres[static_cast<std::size_t>(all[i - 1])];
                const int gb = corpus.track_genres[static_cast<std::size_t>(all[i])];
                if (ga == gb)
                    s.within_genre_adjacent++;
                else
                    s.cross_genre_adjacent++;
            }
        }
    }
    if (s.users > 0) {
        s.mean_current_len = cur_len / static_cast<double>(s.users);
        s.mean_future_len = fut_len / static_cast<double>(s.users);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Persistence

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("save_corpus: cannot open for writing: " + path);
    json header;
    header["side_width"] = corpus.side_width;
    header["vocab_size"] = corpus.vocab_size();
    os << header.dump() << "\n";
    for (const SessionExample& ex : corpus.examples) {
        json rec;
        rec["user"] = ex.user_id;
        rec["current"] = ex.current.tracks;
        rec["future"] = ex.future.tracks;
        rec["side"] = ex.side.bits;
        os << rec.dump() << "\n";
    }
    if (!os) throw FormatError("save_corpus: write failed: " + path);
}

Corpus load_corpus(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("load_corpus: cannot open: " + path);
    std::string line;
    if (!std::getline(is, line) || line.empty()) throw FormatError("load_corpus: no examples");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw FormatError(std::string("load_corpus: malformed header line 1: ") + e.what());
    }
    if (!header.contains("side_width") || !header.contains("vocab_size"))
        throw FormatError("load_corpus: header must carry side_width and vocab_size");
    Corpus corpus;
    corpus.side_width = header.at("side_width").get<std::size_t>();
    const auto vocab_size = header.at("vocab_size").get<std::size_t>();
    corpus.vocab.dense_to_raw.resize(vocab_size);
    std::iota(corpus.vocab.dense_to_raw.begin(), corpus.vocab.dense_to_raw.end(), 0);
    for (std::size_t d = 0; d < vocab_size; ++d)
        corpus.vocab.raw_to_dense[static_cast<std::int64_t>(d)] = static_cast<TrackId>(d);
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError("load_corpus: malformed line " + std::to_string(line_no) + ": " +
                              e.what());
        }
        SessionExample ex;
        try {
            ex.user_id = rec.at("user").get<std::string>();
            ex.current.tracks = rec.at("current").get<std::vector<TrackId>>();
            ex.future.tracks = rec.at("future").get<std::vector<TrackId>>();
            ex.side.bits = rec.at("side").get<std::vector<std::uint8_t>>();
        } catch (const json::exception& e) {
            throw FormatError("load_corpus: malformed line " + std::to_string(line_no) + ": " +
                              e.what());
        }
        if (ex.side.width() != corpus.side_width)
            throw FormatError("load_corpus: line " + std::to_string(line_no) +
                              ": side width " + std::to_string(ex.side.width()) +
                              " does not match header " + std::to_string(corpus.side_width));
        for (std::uint8_t b : ex.side.bits)
            if (b > 1)
                throw FormatError("load_corpus: line " + std::to_string(line_no) +
                                  ": side bits must be 0 or 1");
        if (ex.current.tracks.empty() || ex.future.tracks.empty())
            throw FormatError("load_corpus: line " + std::to_string(line_no) +
                              ": playlists must be nonempty");
        if (ex.future.length() > kFuturePlaylistLen ||
            ex.current.length() + ex.future.length() > kMaxSessionLen)
            throw FormatError("load_corpus: line " + std::to_string(line_no) +
                              ": session length invariant violated");
        for (TrackId t : ex.current.tracks)
            if (t < 0 || static_cast<std::size_t>(t) >= vocab_size)
                throw FormatError("load_corpus: line " + std::to_string(line_no) +
                                  ": track " + std::to_string(t) + " out of vocab");
        for (TrackId t : ex.future.tracks)
            if (t < 0 || static_cast<std::size_t>(t) >= vocab_size)
                throw FormatError("load_corpus: line " + std::to_string(line_no) +
                                  ": track " + std::to_string(t) + " out of vocab");
        corpus.examples.push_back(std::move(ex));
    }
    if (corpus.examples.empty()) throw FormatError("load_corpus: no examples");
    recount_plays(corpus);
    return corpus;
}

void save_track_genres(const std::vector<int>& genres, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("save_track_genres: cannot open for writing: " + path);
    os << json(genres).dump() << "\n";
}

std::vector<int> load_track_genres(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("load_track_genres: cannot open: " + path);
    json j;
    try {
        is >> j;
        return j.get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("load_track_genres: malformed file: ") + e.what());
    }
}

}  // namespace playrec
