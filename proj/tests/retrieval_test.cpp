#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "generators.hpp"
#include "trailmine/error.hpp"
#include "trailmine/retrieval.hpp"

using namespace trailmine;
using namespace trailmine::testing;

namespace {

std::vector<std::string> ids(const std::vector<SearchHit>& hits)
{
    std::vector<std::string> out;
    for (const auto& h : hits) out.push_back(h.shot_id);
    return out;
}

// Dense tf-idf cosine computed term by term over the whole vocabulary.
std::map<std::string, double> brute_force_scores(const std::vector<ShotRecord>& docs, const std::string& query)
{
    auto words = [](const std::string& text) {
        std::vector<std::string> w;
        std::istringstream in(text);
        for (std::string t; in >> t;) {
            for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            w.push_back(t);
        }
        return w;
    };
    std::map<std::string, int> df;
    std::vector<std::map<std::string, int>> tfs;
    for (const auto& d : docs) {
        std::map<std::string, int> tf;
        for (const auto& t : words(d.text)) ++tf[t];
        for (const auto& [t, _] : tf) ++df[t];
        tfs.push_back(tf);
    }
    const double n = static_cast<double>(docs.size());
    auto weight = [&](const std::string& t, int tf) {
        return tf == 0 || df[t] == 0 ? 0.0 : (1.0 + std::log(tf)) * std::log(1.0 + n / df[t]);
    };
    std::map<std::string, int> qtf;
    for (const auto& t : words(query)) {
        if (df.count(t)) ++qtf[t];
    }
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        double dot = 0.0, dn = 0.0, qn = 0.0;
        for (const auto& [t, _] : df) {
            const double wd = weight(t, tfs[i].count(t) ? tfs[i].at(t) : 0);
            const double wq = weight(t, qtf.count(t) ? qtf.at(t) : 0);
            dot += wd * wq;
            dn += wd * wd;
            qn += wq * wq;
        }
        if (dot > 0.0) out[docs[i].shot_id] = dot / (std::sqrt(dn) * std::sqrt(qn));
    }
    return out;
}

}  // namespace

TEST(Corpus, LoadsAndValidates)
{
    const std::string text =
        R"({"shot_id":"A","video_id":"v1","seq_index":0,"text":"red car","keyframe_ref":"kf/A.jpg"}
{"shot_id":"B","video_id":"v1","seq_index":1,"text":"blue sky","keyframe_ref":"kf/B.jpg"}
{"shot_id":"C","video_id":"v1","seq_index":2,"text":"green car","keyframe_ref":"kf/C.jpg"}
)";
    const auto corpus = load_corpus(text);
    EXPECT_EQ(corpus.size(), 3u);
    EXPECT_EQ(corpus.at("B").text, "blue sky");
    EXPECT_EQ(serialize_corpus(corpus), text);

    const std::string dup =
        R"({"shot_id":"A","video_id":"v1","seq_index":0,"text":"x","keyframe_ref":"k"}
{"shot_id":"A","video_id":"v1","seq_index":1,"text":"y","keyframe_ref":"k"}
)";
    EXPECT_THROW(load_corpus(dup), Error);
    try {
        load_corpus(R"({"shot_id":"A","video_id":"v1","seq_index":0,"text":"x","keyframe_ref":"k"})"
                    "\n{broken\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(Corpus({{"A", "v", 0, "", ""}, {"B", "v", 0, "", ""}}), Error);
    EXPECT_THROW(Corpus({{"A", "v", -1, "", ""}}), Error);
}

TEST(Corpus, ThousandRecordRoundTrip)
{
    Rng rng(31);
    std::vector<ShotRecord> records;
    for (int i = 0; i < 1000; ++i) {
        records.push_back({"shot" + std::to_string(i), "video" + std::to_string(i / 25), i % 25,
                           "word" + std::to_string(uniform(rng, 0, 99)) + " \"quoted\" ünïcode", "kf/" + std::to_string(i)});
    }
    const auto text = serialize_corpus(Corpus(records));
    EXPECT_EQ(serialize_corpus(load_corpus(text)), text);
    EXPECT_EQ(load_corpus(text).size(), 1000u);
}

TEST(Neighbors, Examples)
{
    const auto corpus = three_shot_corpus();
    auto n = neighbors(corpus, "B", 1);
    ASSERT_EQ(n.size(), 2u);
    EXPECT_EQ(n[0].shot_id, "A");
    EXPECT_EQ(n[1].shot_id, "C");

    n = neighbors(corpus, "A", 1);
    ASSERT_EQ(n.size(), 1u);
    EXPECT_EQ(n[0].shot_id, "B");
    EXPECT_EQ(neighbors(corpus, "A", 5).size(), 2u);

    EXPECT_THROW(neighbors(corpus, "Z", 1), NotFound);
    EXPECT_THROW(neighbors(corpus, "A", 0), Error);
}

TEST(Neighbors, IgnoresOtherVideosAndGaps)
{
    Corpus corpus({{"a0", "va", 0, "", ""}, {"a5", "va", 5, "", ""}, {"a6", "va", 6, "", ""}, {"b1", "vb", 1, "", ""}});
    EXPECT_TRUE(neighbors(corpus, "a0", 1).empty());
    EXPECT_EQ(neighbors(corpus, "a5", 1).size(), 1u);
    EXPECT_EQ(neighbors(corpus, "a0", 5).size(), 1u);
}

TEST(Tokenize, Options)
{
    EXPECT_EQ(tokenize("  Red  CAR\tgoes "), (std::vector<std::string>{"red", "car", "goes"}));
    TokenizerOptions stop;
    stop.remove_stopwords = true;
    EXPECT_EQ(tokenize("the red car", stop), (std::vector<std::string>{"red", "car"}));
    TokenizerOptions stem;
    stem.stem_plurals = true;
    EXPECT_EQ(tokenize("boats ponies glasses", stem), (std::vector<std::string>{"boat", "pony", "glasse"}));
}

TEST(Search, Examples)
{
    const SearchIndex index(three_shot_corpus());
    EXPECT_EQ(ids(search(index, "sky", 10)), (std::vector<std::string>{"B"}));
    const auto car = search(index, "car", 10);
    EXPECT_EQ(ids(car), (std::vector<std::string>{"A", "C"}));
    EXPECT_DOUBLE_EQ(car[0].score, car[1].score);
    EXPECT_EQ(ids(search(index, "Car", 1)), (std::vector<std::string>{"A"}));
    EXPECT_TRUE(search(index, "boat", 10).empty());
    EXPECT_THROW(search(index, "   ", 10), Error);
    EXPECT_THROW(search(index, "car", 0), Error);
}

TEST(Search, MatchesBruteForceCosine)
{
    Rng rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ShotRecord> docs;
        const int n = uniform(rng, 1, 30);
        for (int i = 0; i < n; ++i) {
            std::string text;
            for (int w = 0; w < uniform(rng, 0, 8); ++w) text += "w" + std::to_string(uniform(rng, 0, 12)) + " ";
            docs.push_back({"d" + std::to_string(i), "v", i, text, ""});
        }
        std::string query;
        for (int w = 0; w < uniform(rng, 1, 4); ++w) query += "W" + std::to_string(uniform(rng, 0, 15)) + " ";
        const SearchIndex index{Corpus(docs)};
        const auto hits = index.search(query, 1000);
        const auto want = brute_force_scores(docs, query);
        ASSERT_EQ(hits.size(), want.size());
        for (std::size_t i = 0; i < hits.size(); ++i) {
            EXPECT_NEAR(hits[i].score, want.at(hits[i].shot_id), 1e-12);
            if (i > 0) {
                EXPECT_TRUE(hits[i - 1].score > hits[i].score ||
                            (hits[i - 1].score == hits[i].score && hits[i - 1].shot_id < hits[i].shot_id));
            }
        }
    }
}
