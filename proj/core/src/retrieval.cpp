#include "trailmine/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "trailmine/error.hpp"
#include "text_util.hpp"

namespace trailmine {

namespace {

const std::unordered_set<std::string>& stopwords()
{
    static const std::unordered_set<std::string> words = {
        "a",    "an",   "and",  "are", "as",   "at",    "be",   "by",   "for",  "from",
        "has",  "he",   "in",   "is",  "it",   "its",   "of",   "on",   "or",   "that",
        "the",  "this", "to",   "was", "were", "will",  "with", "we",   "they", "you",
    };
    return words;
}

std::string s_stem(std::string w)
{
    auto ends = [&](std::string_view suf) { return w.size() > suf.size() && std::string_view(w).ends_with(suf); };
    if (ends("ies") && !ends("eies") && !ends("aies")) {
        w.replace(w.size() - 3, 3, "y");
    } else if (ends("es") && !ends("aes") && !ends("ees") && !ends("oes")) {
        w.pop_back();
    } else if (ends("s") && !ends("us") && !ends("ss")) {
        w.pop_back();
    }
    return w;
}

}  // namespace

Corpus::Corpus(std::vector<ShotRecord> records) : records_(std::move(records))
{
    std::set<std::pair<std::string, std::int64_t>> positions;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.shot_id.empty()) throw Error("record " + std::to_string(i + 1) + ": empty shot_id");
        if (r.seq_index < 0) throw Error("shot '" + r.shot_id + "': negative seq_index");
        if (!by_id_.emplace(r.shot_id, i).second) {
            throw Error("duplicate shot_id '" + r.shot_id + "'");
        }
        if (!positions.emplace(r.video_id, r.seq_index).second) {
            throw Error("duplicate position " + std::to_string(r.seq_index) + " in video '" + r.video_id + "'");
        }
        by_video_[r.video_id].push_back(i);
    }
    for (auto& [_, idx] : by_video_) {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return records_[a].seq_index < records_[b].seq_index;
        });
    }
}

const ShotRecord* Corpus::find(std::string_view shot_id) const
{
    auto it = by_id_.find(std::string(shot_id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

const ShotRecord& Corpus::at(std::string_view shot_id) const
{
    if (const auto* r = find(shot_id)) return *r;
    throw NotFound("unknown shot '" + std::string(shot_id) + "'");
}

std::vector<ShotRecord> Corpus::neighbors(std::string_view shot_id, std::int64_t radius) const
{
    if (radius < 1) throw Error("radius must be >= 1");
    const auto& self = at(shot_id);
    std::vector<ShotRecord> out;
    for (auto i : by_video_.at(self.video_id)) {
        const auto& r = records_[i];
        if (r.shot_id != self.shot_id && std::abs(r.seq_index - self.seq_index) <= radius) {
            out.push_back(r);
        }
    }
    return out;
}

Corpus load_corpus(std::string_view text)
{
    std::vector<ShotRecord> records;
    std::size_t line_number = 0;
    detail::for_each_line(text, [&](std::string_view line) {
        ++line_number;
        if (detail::trim(line).empty()) return;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_number, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(line_number, "record is not a JSON object");
        ShotRecord r;
        try {
            r.shot_id = j.at("shot_id").get<std::string>();
            r.video_id = j.at("video_id").get<std::string>();
            if (!j.at("seq_index").is_number_integer()) throw ParseError(line_number, "seq_index must be an integer");
            r.seq_index = j.at("seq_index").get<std::int64_t>();
            r.text = j.at("text").get<std::string>();
            r.keyframe_ref = j.at("keyframe_ref").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_number, std::string("bad record: ") + e.what());
        }
        if (j.size() != 5) throw ParseError(line_number, "unexpected extra fields");
        records.push_back(std::move(r));
    });
    try {
        return Corpus(std::move(records));
    } catch (const Error& e) {
        throw ParseError(0, e.what());
    }
}

std::string serialize_corpus(const Corpus& corpus)
{
    std::string out;
    for (const auto& r : corpus.records()) {
        nlohmann::ordered_json j;
        j["shot_id"] = r.shot_id;
        j["video_id"] = r.video_id;
        j["seq_index"] = r.seq_index;
        j["text"] = r.text;
        j["keyframe_ref"] = r.keyframe_ref;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options)
{
    std::vector<std::string> out;
    for (auto raw : detail::split_ws(text)) {
        auto t = detail::to_lower(raw);
        if (options.remove_stopwords && stopwords().contains(t)) continue;
        if (options.stem_plurals) t = s_stem(std::move(t));
        out.push_back(std::move(t));
    }
    return out;
}

SearchIndex::SearchIndex(const Corpus& corpus, TokenizerOptions options) : options_(options)
{
    for (const auto& r : corpus.records()) {
        const auto doc = static_cast<std::uint32_t>(shot_ids_.size());
        shot_ids_.push_back(r.shot_id);
        std::map<std::string, std::uint32_t> tf;
        for (auto& t : tokenize(r.text, options_)) ++tf[t];
        for (const auto& [term, n] : tf) postings_[term].push_back(Posting{doc, n});
    }

    doc_norm_.assign(shot_ids_.size(), 0.0);
    for (const auto& [term, list] : postings_) {
        const double w_idf = idf(term);
        for (const auto& p : list) {
            const double w = (1.0 + std::log(static_cast<double>(p.tf))) * w_idf;
            doc_norm_[p.doc] += w * w;
        }
    }
    for (auto& n : doc_norm_) n = std::sqrt(n);
}

std::size_t SearchIndex::document_frequency(const std::string& term) const
{
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

double SearchIndex::idf(const std::string& term) const
{
    const auto df = document_frequency(term);
    if (df == 0) return 0.0;
    return std::log(1.0 + static_cast<double>(shot_ids_.size()) / static_cast<double>(df));
}

std::vector<SearchHit> SearchIndex::search(std::string_view query, std::size_t k) const
{
    if (k < 1) throw Error("k must be >= 1");
    if (detail::trim(query).empty()) throw Error("blank query");

    std::map<std::string, std::uint32_t> qtf;
    for (auto& t : tokenize(query, options_)) {
        if (postings_.contains(t)) ++qtf[t];
    }
    if (qtf.empty()) return {};

    double q_norm = 0.0;
    std::unordered_map<std::uint32_t, double> acc;
    for (const auto& [term, n] : qtf) {
        const double w_idf = idf(term);
        const double wq = (1.0 + std::log(static_cast<double>(n))) * w_idf;
        q_norm += wq * wq;
        for (const auto& p : postings_.at(term)) {
            acc[p.doc] += wq * (1.0 + std::log(static_cast<double>(p.tf))) * w_idf;
        }
    }
    q_norm = std::sqrt(q_norm);

    std::vector<SearchHit> hits;
    hits.reserve(acc.size());
    for (const auto& [doc, dot] : acc) {
        hits.push_back(SearchHit{shot_ids_[doc], dot / (q_norm * doc_norm_[doc])});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.shot_id < b.shot_id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

}  // namespace trailmine
