#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trailmine {

struct ShotRecord {
    std::string shot_id;
    std::string video_id;
    std::int64_t seq_index = 0;
    std::string text;
    std::string keyframe_ref;

    bool operator==(const ShotRecord&) const = default;
};

/// Shot metadata collection. Shot ids and (video_id, seq_index) pairs are unique.
class Corpus {
public:
    Corpus() = default;
    /// Throws Error on duplicate ids, duplicate positions or negative seq_index.
    explicit Corpus(std::vector<ShotRecord> records);

    std::span<const ShotRecord> records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }

    const ShotRecord* find(std::string_view shot_id) const;
    /// Throws NotFound.
    const ShotRecord& at(std::string_view shot_id) const;

    /// Other shots of the same video within `radius` positions, by seq_index.
    /// Throws NotFound for unknown ids and Error for radius < 1.
    std::vector<ShotRecord> neighbors(std::string_view shot_id, std::int64_t radius) const;

private:
    std::vector<ShotRecord> records_;
    std::unordered_map<std::string, std::size_t> by_id_;
    // Record indices per video, ordered by seq_index.
    std::unordered_map<std::string, std::vector<std::size_t>> by_video_;
};

/// Parses JSON Lines records (shot_id, video_id, seq_index, text, keyframe_ref).
Corpus load_corpus(std::string_view text);
std::string serialize_corpus(const Corpus& corpus);

inline std::vector<ShotRecord> neighbors(const Corpus& corpus, std::string_view shot_id,
                                         std::int64_t radius)
{
    return corpus.neighbors(shot_id, radius);
}

struct TokenizerOptions {
    bool remove_stopwords = false;
    // Harman's S-stemmer: plural suffixes only.
    bool stem_plurals = false;
};

/// Case-folded whitespace tokenization with the optional filters applied.
std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options = {});

struct SearchHit {
    std::string shot_id;
    double score = 0.0;

    bool operator==(const SearchHit&) const = default;
};

/// Inverted index over shot text, scored by cosine-normalized tf-idf:
///
///   idf(t)    = ln(1 + N / df(t))
///   w(t, x)   = (1 + ln tf(t, x)) * idf(t)          for x a shot or the query
///   score(q,d) = sum_t w(t,q) w(t,d) / (|w(.,q)| |w(.,d)|)
///
/// Query terms absent from the index are ignored, so a query sharing no
/// term with the corpus returns nothing. Ties are ordered by shot id.
class SearchIndex {
public:
    explicit SearchIndex(const Corpus& corpus, TokenizerOptions options = {});

    /// Throws Error for blank queries or k < 1.
    std::vector<SearchHit> search(std::string_view query, std::size_t k) const;

    std::size_t document_count() const noexcept { return shot_ids_.size(); }
    std::size_t document_frequency(const std::string& term) const;
    double idf(const std::string& term) const;

private:
    struct Posting {
        std::uint32_t doc = 0;
        std::uint32_t tf = 0;
    };

    TokenizerOptions options_;
    std::vector<std::string> shot_ids_;
    std::vector<double> doc_norm_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

inline std::vector<SearchHit> search(const SearchIndex& index, std::string_view query, std::size_t k)
{
    return index.search(query, k);
}

}  // namespace trailmine
