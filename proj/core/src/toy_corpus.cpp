#include <algorithm>
#include <array>
#include <cstdio>
#include <set>

#include "trailmine/error.hpp"
#include "trailmine/simulator.hpp"
#include "random_util.hpp"

namespace trailmine {

namespace {

constexpr std::array<std::string_view, 16> kSyllables = {
    "ka", "lo", "mi", "ru", "te", "sa", "no", "vi", "de", "po", "ga", "zu", "be", "fi", "ho", "ly",
};

std::string pseudo_word(int i)
{
    std::string w;
    w += kSyllables[static_cast<std::size_t>(i % 16)];
    w += kSyllables[static_cast<std::size_t>((i / 16) % 16)];
    w += kSyllables[static_cast<std::size_t>((i / 256) % 16)];
    return w;
}

std::string shot_name(int video, int shot)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "v%03d_s%02d", video, shot);
    return buf;
}

std::string video_name(int video)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "v%03d", video);
    return buf;
}

}  // namespace

std::vector<TaskSpec> default_tasks()
{
    return {
        {"t1", {"basketball", "court", "player", "hoop", "dunk", "referee", "score", "arena"}},
        {"t2", {"boat", "water", "harbor", "sail", "ship", "dock", "wave", "river"}},
        {"t3", {"helicopter", "flight", "rotor", "sky", "pilot", "landing", "aerial", "hover"}},
        {"t4", {"protest", "crowd", "march", "banner", "police", "street", "rally", "chant"}},
    };
}

ToyCollection make_toy_collection(std::span<const TaskSpec> tasks, const ToyCorpusConfig& config)
{
    if (config.videos < 1 || config.shots_per_video < 1) throw Error("toy corpus needs videos and shots");
    if (config.min_run_length < 1 || config.max_run_length < config.min_run_length ||
        config.max_run_length > config.shots_per_video) {
        throw Error("bad relevant run lengths");
    }
    if (config.background_vocabulary < 1 || config.background_vocabulary > 4096) {
        throw Error("background_vocabulary must be in [1, 4096]");
    }
    if (config.min_background_words < 0 || config.max_background_words < config.min_background_words) {
        throw Error("bad background word counts");
    }

    std::mt19937_64 rng(detail::splitmix64(config.seed));
    const int n_shots = config.videos * config.shots_per_video;
    auto flat = [&](int v, int s) { return v * config.shots_per_video + s; };

    // Owning task per shot, -1 when the shot is not relevant to any task.
    std::vector<int> relevant_to(static_cast<std::size_t>(n_shots), -1);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        for (int run = 0; run < config.relevant_runs_per_task; ++run) {
            for (int attempt = 0; attempt < 200; ++attempt) {
                const int len = static_cast<int>(detail::uniform_int(rng, config.min_run_length, config.max_run_length));
                const int v = static_cast<int>(detail::uniform_int(rng, 0, config.videos - 1));
                const int start = static_cast<int>(detail::uniform_int(rng, 0, config.shots_per_video - len));
                bool free = true;
                for (int s = start; s < start + len; ++s) free = free && relevant_to[flat(v, s)] < 0;
                if (!free) continue;
                for (int s = start; s < start + len; ++s) relevant_to[flat(v, s)] = static_cast<int>(t);
                break;
            }
        }
    }

    std::vector<std::vector<std::string>> words(static_cast<std::size_t>(n_shots));
    for (auto& w : words) {
        const auto n = detail::uniform_int(rng, config.min_background_words, config.max_background_words);
        for (std::int64_t i = 0; i < n; ++i) {
            w.push_back(pseudo_word(static_cast<int>(detail::uniform_int(rng, 0, config.background_vocabulary - 1))));
        }
    }

    auto add_terms = [&](std::vector<std::string>& w, const TaskSpec& task, int count) {
        std::vector<std::string> terms = task.terms;
        detail::shuffle(rng, std::span<std::string>(terms));
        for (int i = 0; i < count && i < static_cast<int>(terms.size()); ++i) w.push_back(terms[static_cast<std::size_t>(i)]);
    };

    ToyCollection out;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        auto& rel = out.qrels[tasks[t].task_id];
        for (int i = 0; i < n_shots; ++i) {
            if (relevant_to[static_cast<std::size_t>(i)] != static_cast<int>(t)) continue;
            rel.insert(shot_name(i / config.shots_per_video, i % config.shots_per_video));
            if (!detail::bernoulli(rng, config.textless_relevant_fraction)) {
                add_terms(words[static_cast<std::size_t>(i)], tasks[t], static_cast<int>(detail::uniform_int(rng, 2, 3)));
            }
        }
        int placed = 0;
        for (int attempt = 0; placed < config.distractors_per_task && attempt < 50 * n_shots; ++attempt) {
            const auto i = static_cast<std::size_t>(detail::uniform_int(rng, 0, n_shots - 1));
            if (relevant_to[i] >= 0) continue;
            add_terms(words[i], tasks[t], static_cast<int>(detail::uniform_int(rng, 1, 2)));
            ++placed;
        }
    }

    std::vector<ShotRecord> records;
    records.reserve(static_cast<std::size_t>(n_shots));
    for (int v = 0; v < config.videos; ++v) {
        for (int s = 0; s < config.shots_per_video; ++s) {
            auto& w = words[static_cast<std::size_t>(flat(v, s))];
            detail::shuffle(rng, std::span<std::string>(w));
            std::string text;
            for (const auto& word : w) {
                if (!text.empty()) text += ' ';
                text += word;
            }
            const auto id = shot_name(v, s);
            records.push_back(ShotRecord{id, video_name(v), s, std::move(text), "keyframes/" + id + ".jpg"});
        }
    }
    out.corpus = Corpus(std::move(records));
    return out;
}

}  // namespace trailmine
