#include "trailmine/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "trailmine/error.hpp"
#include "random_util.hpp"

namespace trailmine {

namespace {

constexpr std::int64_t kEpochMs = 1'700'000'000'000;

std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string user_label(int user_index)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "u%02d", user_index + 1);
    return buf;
}

class SessionGenerator {
public:
    SessionGenerator(const SimulationInputs& inputs, const TrailGraph* graph, SimMode mode,
                     const SimConfig& config, int user_index, const TaskSpec& task, QueryBook& book)
        : in_(inputs), graph_(graph), mode_(mode), cfg_(config), task_(task), book_(book)
    {
        static const std::set<std::string> none;
        auto q = in_.qrels.find(task.task_id);
        relevant_ = q == in_.qrels.end() ? &none : &q->second;

        std::size_t task_index = 0;
        for (std::size_t i = 0; i < cfg_.tasks.size(); ++i) {
            if (cfg_.tasks[i].task_id == task.task_id) task_index = i;
        }
        const bool rec = mode == SimMode::Recommend;
        rng_.seed(detail::mix_seed(detail::mix_seed(cfg_.rng_seed, static_cast<std::uint64_t>(user_index)),
                                   detail::mix_seed(fnv1a(task.task_id), rec ? 2 : 1)));

        session_.user_id = user_label(user_index);
        session_.session_id = session_.user_id + "-" + task.task_id + (rec ? "-rec" : "-base");
        state_.session_id = session_.session_id;
        start_ms_ = kEpochMs + static_cast<std::int64_t>(user_index) * 86'400'000 +
                    static_cast<std::int64_t>(task_index) * 3'600'000 + (rec ? 1'800'000 : 0);
        budget_ms_ = cfg_.session_budget_s * 1000;

        for (const auto& [a, p] : cfg_.action_mix) {
            if (is_mark(a)) {
                mark_mass_ += p;
            } else {
                step_kinds_.push_back(a);
                step_mass_.push_back(p);
            }
        }
        step_kinds_.push_back(ActionType::MarkRelevant);  // stands for "judge something"
        step_mass_.push_back(mark_mass_);
    }

    Session run()
    {
        issue_query(0);
        while (true) {
            const auto kind = step_kinds_[detail::pick_weighted(rng_, step_mass_)];
            if (!step(kind)) break;
        }
        return std::move(session_);
    }

private:
    bool recommending() const { return mode_ == SimMode::Recommend; }
    bool is_relevant(const std::string& shot) const { return relevant_->contains(shot); }

    bool spend(std::int64_t cost)
    {
        if (t_ + cost > budget_ms_) return false;
        t_ += cost;
        return true;
    }

    void emit(ActionType action, std::string target, std::optional<std::int64_t> duration = std::nullopt)
    {
        ActionEvent ev;
        char buf[16];
        std::snprintf(buf, sizeof buf, "-%04d", seq_++);
        ev.event_id = session_.session_id + buf;
        ev.session_id = session_.session_id;
        ev.user_id = session_.user_id;
        ev.timestamp_ms = start_ms_ + t_;
        ev.action = action;
        ev.target = std::move(target);
        ev.duration_ms = duration;
        ev.task_id = task_.task_id;
        if (recommending()) state_ = update_state(std::move(state_), ev, cfg_.weights);
        session_.events.push_back(std::move(ev));
    }

    void refresh()
    {
        if (!recommending()) return;
        const auto docs = recommend_documents(*graph_, state_, cfg_.rec_params);
        state_ = mark_shown(std::move(state_), docs);
        // New recommendations go on top; earlier ones stay reachable through
        // the past-recommendations tab until the user opens them.
        std::vector<std::string> fresh;
        for (const auto& r : docs) fresh.emplace_back(strip_kind(r.node_id));
        panel_.insert(panel_.begin(), fresh.begin(), fresh.end());
        if (panel_.size() > cfg_.results_per_page) panel_.resize(cfg_.results_per_page);

        auto qparams = cfg_.rec_params;
        qparams.k = std::max<std::size_t>(1, cfg_.query_recommendations);
        const auto queries = recommend_queries(*graph_, state_, qparams);
        state_ = mark_shown(std::move(state_), queries);
        suggestions_.clear();
        for (const auto& r : queries) suggestions_.emplace_back(strip_kind(r.node_id));
    }

    void issue_query(std::int64_t cost)
    {
        std::optional<std::string> suggestion;
        if (recommending() && !suggestions_.empty() && detail::bernoulli(rng_, cfg_.recommendation_follow_prob)) {
            suggestion = suggestions_.front();
        }
        const auto text = book_.next(task_, cfg_.unique_query_fraction, rng_, suggestion);
        emit(ActionType::Query, text);
        t_ += cost;
        results_.clear();
        for (auto& hit : in_.index.search(text, cfg_.results_per_page)) results_.push_back(std::move(hit.shot_id));
        refresh();
    }

    // Attractiveness of a listed shot: relevant shots draw `affinity` times
    // more attention, already-opened ones much less, lower ranks a bit less.
    std::optional<std::size_t> choose(const std::vector<std::string>& list)
    {
        if (list.empty()) return std::nullopt;
        std::vector<double> w(list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            w[i] = (is_relevant(list[i]) ? cfg_.relevance_affinity : 1.0) *
                   (visited_.contains(list[i]) ? 0.2 : 1.0) / (1.0 + 0.15 * static_cast<double>(i));
        }
        return detail::pick_weighted(rng_, w);
    }

    // With probability follow_prob the user also scans the recommendation
    // panel, which sits above the result list.
    bool choose_focus()
    {
        std::vector<std::string> pool;
        const bool scan_panel = recommending() && !panel_.empty() &&
                                detail::bernoulli(rng_, cfg_.recommendation_follow_prob);
        if (scan_panel || results_.empty()) pool = panel_;
        const auto from_panel = pool.size();
        if (!scan_panel) pool.insert(pool.end(), results_.begin(), results_.end());
        const auto i = choose(pool);
        if (!i) return false;
        if (*i < from_panel) panel_.erase(panel_.begin() + static_cast<std::ptrdiff_t>(*i));
        set_focus(pool[*i]);
        return true;
    }

    std::int64_t play_duration()
    {
        if (detail::bernoulli(rng_, cfg_.short_play_fraction)) {
            return detail::uniform_int(rng_, 300, 3000);
        }
        const double mean = is_relevant(*focus_) ? 9000.0 : 5000.0;
        const double u = std::max(detail::uniform01(rng_), 1e-12);
        return 3001 + static_cast<std::int64_t>(-mean * std::log(u));
    }

    bool step(ActionType kind)
    {
        switch (kind) {
        case ActionType::Query: {
            const auto cost = detail::uniform_int(rng_, 8000, 15000);
            if (t_ + cost > budget_ms_) return false;
            issue_query(cost);
            return true;
        }
        case ActionType::View: {
            if (!spend(detail::uniform_int(rng_, 1500, 4000))) return false;
            if (!choose_focus()) return step(ActionType::Query);
            emit(ActionType::View, *focus_);
            refresh();
            return true;
        }
        case ActionType::Play: {
            if (!focus_ && !choose_focus()) return step(ActionType::Query);
            const auto d = play_duration();
            const auto at = t_;
            if (!spend(d)) return false;
            const auto end = t_;
            t_ = at;
            emit(ActionType::Play, *focus_, d);
            t_ = end;
            return true;
        }
        case ActionType::Tooltip: {
            if (!spend(detail::uniform_int(rng_, 800, 2500))) return false;
            const bool from_panel = recommending() && !panel_.empty() && detail::bernoulli(rng_, 0.3);
            const auto& list = from_panel ? panel_ : results_;
            const auto i = choose(list);
            if (!i) return step(ActionType::Query);
            emit(ActionType::Tooltip, list[*i]);
            return true;
        }
        case ActionType::BrowseKeyframes: {
            if (!spend(detail::uniform_int(rng_, 2000, 5000))) return false;
            if (!focus_ && !choose_focus()) return step(ActionType::Query);
            emit(ActionType::BrowseKeyframes, *focus_);
            return true;
        }
        case ActionType::NavigateWithin: {
            if (!spend(detail::uniform_int(rng_, 1000, 3000))) return false;
            if (!focus_ && !choose_focus()) return step(ActionType::Query);
            const auto near = in_.corpus.neighbors(*focus_, 1);
            if (near.empty()) {
                emit(ActionType::BrowseKeyframes, *focus_);
                return true;
            }
            const auto& self = in_.corpus.at(*focus_);
            const bool forward = detail::bernoulli(rng_, 0.8);
            const ShotRecord* pick = &near.front();
            for (const auto& r : near) {
                if ((r.seq_index > self.seq_index) == forward) pick = &r;
            }
            set_focus(pick->shot_id);
            emit(ActionType::NavigateWithin, *focus_);
            return true;
        }
        default: {
            if (!spend(detail::uniform_int(rng_, 1500, 3000))) return false;
            // Judge the latest shot that looked relevant; otherwise reject the current one.
            ActionType mark = ActionType::MarkNotRelevant;
            if (!pending_.empty()) {
                focus_ = pending_.back();
                pending_.pop_back();
                mark = detail::bernoulli(rng_, 0.12) ? ActionType::MarkMaybeRelevant : ActionType::MarkRelevant;
            } else if (!focus_ || judged_.contains(*focus_)) {
                if (!choose_focus()) return step(ActionType::Query);
                if (judged_.contains(*focus_)) return true;
                if (looks_relevant(*focus_)) {
                    pending_.erase(std::remove(pending_.begin(), pending_.end(), *focus_), pending_.end());
                    mark = ActionType::MarkRelevant;
                }
            }
            judged_.insert(*focus_);
            emit(mark, *focus_);
            refresh();
            return true;
        }
        }
    }

    // The user's (noisy) verdict on a shot, fixed once formed.
    bool looks_relevant(const std::string& shot)
    {
        auto [it, fresh] = perceived_.try_emplace(shot, false);
        if (fresh) it->second = is_relevant(shot) != detail::bernoulli(rng_, cfg_.judgment_noise);
        return it->second;
    }

    void set_focus(std::string shot)
    {
        focus_ = std::move(shot);
        visited_.insert(*focus_);
        if (!judged_.contains(*focus_) && looks_relevant(*focus_) &&
            std::find(pending_.begin(), pending_.end(), *focus_) == pending_.end()) {
            pending_.push_back(*focus_);
        }
    }

    const SimulationInputs& in_;
    const TrailGraph* graph_;
    SimMode mode_;
    const SimConfig& cfg_;
    const TaskSpec& task_;
    QueryBook& book_;
    const std::set<std::string>* relevant_ = nullptr;

    std::mt19937_64 rng_;
    Session session_;
    SessionState state_;
    std::int64_t start_ms_ = 0;
    std::int64_t t_ = 0;
    std::int64_t budget_ms_ = 0;
    int seq_ = 0;

    std::vector<ActionType> step_kinds_;
    std::vector<double> step_mass_;
    double mark_mass_ = 0.0;

    std::vector<std::string> results_;
    std::vector<std::string> panel_;
    std::vector<std::string> suggestions_;
    std::optional<std::string> focus_;
    std::set<std::string> visited_;
    std::set<std::string> judged_;
    std::map<std::string, bool> perceived_;
    std::vector<std::string> pending_;
};

nlohmann::ordered_json to_json(const std::map<ActionType, double>& m)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (auto a : kAllActions) {
        if (auto it = m.find(a); it != m.end()) j[std::string(to_string(a))] = it->second;
    }
    return j;
}

}  // namespace

std::map<ActionType, std::size_t> reference_action_counts()
{
    return {
        {ActionType::Query, 1083},          {ActionType::MarkRelevant, 1343},
        {ActionType::MarkMaybeRelevant, 176}, {ActionType::MarkNotRelevant, 922},
        {ActionType::View, 3034},           {ActionType::Play, 7598},
        {ActionType::BrowseKeyframes, 814}, {ActionType::NavigateWithin, 3794},
        {ActionType::Tooltip, 4795},
    };
}

std::map<ActionType, double> reference_action_mix()
{
    return action_mix(reference_action_counts());
}

void SimConfig::validate() const
{
    if (num_users < 1) throw Error("num_users must be >= 1");
    if (wave_size < 1) throw Error("wave_size must be >= 1");
    if (tasks.empty()) throw Error("at least one task is required");
    std::set<std::string> ids;
    for (const auto& t : tasks) {
        if (t.task_id.empty() || t.terms.empty()) throw Error("tasks need an id and query terms");
        if (!ids.insert(t.task_id).second) throw Error("duplicate task '" + t.task_id + "'");
    }
    if (session_budget_s <= 0) throw Error("session_budget_s must be > 0");
    double sum = 0.0;
    for (auto a : kAllActions) {
        auto it = action_mix.find(a);
        if (it == action_mix.end()) throw Error("action_mix lacks " + std::string(to_string(a)));
        if (!(it->second >= 0.0)) throw Error("action_mix proportions must be >= 0");
        sum += it->second;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("action_mix proportions must sum to 1");
    if (!(relevance_affinity > 1.0)) throw Error("relevance_affinity must be > 1");
    auto unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw Error(std::string(name) + " must be in [0, 1]");
    };
    unit(recommendation_follow_prob, "recommendation_follow_prob");
    unit(judgment_noise, "judgment_noise");
    unit(unique_query_fraction, "unique_query_fraction");
    unit(short_play_fraction, "short_play_fraction");
    if (results_per_page < 1) throw Error("results_per_page must be >= 1");
    rec_params.validate();
    trailmine::validate(weights);
}

SimConfig parse_sim_config(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("sim config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(0, "sim config must be a JSON object");

    SimConfig c;
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        get("rng_seed", c.rng_seed);
        get("num_users", c.num_users);
        get("wave_size", c.wave_size);
        get("session_budget_s", c.session_budget_s);
        get("relevance_affinity", c.relevance_affinity);
        get("recommendation_follow_prob", c.recommendation_follow_prob);
        get("judgment_noise", c.judgment_noise);
        get("unique_query_fraction", c.unique_query_fraction);
        get("short_play_fraction", c.short_play_fraction);
        get("results_per_page", c.results_per_page);
        get("query_recommendations", c.query_recommendations);
        get("per_task_graphs", c.per_task_graphs);
        if (j.contains("tasks")) {
            c.tasks.clear();
            for (const auto& t : j.at("tasks")) {
                c.tasks.push_back(TaskSpec{t.at("task_id").get<std::string>(), t.at("terms").get<std::vector<std::string>>()});
            }
        }
        if (j.contains("action_mix")) {
            c.action_mix.clear();
            for (const auto& [k, v] : j.at("action_mix").items()) {
                auto a = parse_action(k);
                if (!a) throw ParseError(0, "unknown action '" + k + "' in action_mix");
                c.action_mix[*a] = v.get<double>();
            }
        }
        if (j.contains("recommendation")) {
            const auto& r = j.at("recommendation");
            if (r.contains("depth")) c.rec_params.depth = r.at("depth").get<int>();
            if (r.contains("damping")) c.rec_params.damping = r.at("damping").get<double>();
            if (r.contains("recency_decay")) c.rec_params.recency_decay = r.at("recency_decay").get<double>();
            if (r.contains("k")) c.rec_params.k = r.at("k").get<std::size_t>();
        }
        if (j.contains("weights")) {
            for (const auto& [k, v] : j.at("weights").items()) {
                if (k == "play_threshold_ms") {
                    c.weights.play_threshold_ms = v.get<std::int64_t>();
                    continue;
                }
                auto a = parse_action(k);
                if (!a) throw ParseError(0, "unknown action '" + k + "' in weights");
                c.weights.weights[*a] = v.get<double>();
            }
        }
        if (j.contains("corpus")) {
            const auto& k = j.at("corpus");
            auto& cc = c.corpus;
            auto cget = [&](const char* key, auto& field) {
                if (k.contains(key)) field = k.at(key).get<std::remove_reference_t<decltype(field)>>();
            };
            cget("seed", cc.seed);
            cget("videos", cc.videos);
            cget("shots_per_video", cc.shots_per_video);
            cget("relevant_runs_per_task", cc.relevant_runs_per_task);
            cget("min_run_length", cc.min_run_length);
            cget("max_run_length", cc.max_run_length);
            cget("textless_relevant_fraction", cc.textless_relevant_fraction);
            cget("distractors_per_task", cc.distractors_per_task);
            cget("background_vocabulary", cc.background_vocabulary);
            cget("min_background_words", cc.min_background_words);
            cget("max_background_words", cc.max_background_words);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("sim config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string serialize_sim_config(const SimConfig& c)
{
    nlohmann::ordered_json j;
    j["rng_seed"] = c.rng_seed;
    j["num_users"] = c.num_users;
    j["wave_size"] = c.wave_size;
    j["session_budget_s"] = c.session_budget_s;
    j["tasks"] = nlohmann::ordered_json::array();
    for (const auto& t : c.tasks) j["tasks"].push_back({{"task_id", t.task_id}, {"terms", t.terms}});
    j["action_mix"] = to_json(c.action_mix);
    j["relevance_affinity"] = c.relevance_affinity;
    j["recommendation_follow_prob"] = c.recommendation_follow_prob;
    j["judgment_noise"] = c.judgment_noise;
    j["unique_query_fraction"] = c.unique_query_fraction;
    j["short_play_fraction"] = c.short_play_fraction;
    j["results_per_page"] = c.results_per_page;
    j["query_recommendations"] = c.query_recommendations;
    j["per_task_graphs"] = c.per_task_graphs;
    j["recommendation"] = {{"depth", c.rec_params.depth},
                           {"damping", c.rec_params.damping},
                           {"recency_decay", c.rec_params.recency_decay},
                           {"k", c.rec_params.k}};
    auto w = to_json(c.weights.weights);
    w["play_threshold_ms"] = c.weights.play_threshold_ms;
    j["weights"] = w;
    const auto& cc = c.corpus;
    j["corpus"] = {{"seed", cc.seed},
                   {"videos", cc.videos},
                   {"shots_per_video", cc.shots_per_video},
                   {"relevant_runs_per_task", cc.relevant_runs_per_task},
                   {"min_run_length", cc.min_run_length},
                   {"max_run_length", cc.max_run_length},
                   {"textless_relevant_fraction", cc.textless_relevant_fraction},
                   {"distractors_per_task", cc.distractors_per_task},
                   {"background_vocabulary", cc.background_vocabulary},
                   {"min_background_words", cc.min_background_words},
                   {"max_background_words", cc.max_background_words}};
    return j.dump(2) + "\n";
}

std::string QueryBook::next(const TaskSpec& task, double unique_fraction, std::mt19937_64& rng,
                            const std::optional<std::string>& suggestion)
{
    std::string query;
    if (history_.empty() || detail::bernoulli(rng, unique_fraction)) {
        static constexpr double kLengthMass[] = {0.35, 0.45, 0.20};
        for (int attempt = 0; attempt < 64 && query.empty(); ++attempt) {
            const auto len = std::min(detail::pick_weighted(rng, kLengthMass) + 1, task.terms.size());
            auto terms = task.terms;
            detail::shuffle(rng, std::span<std::string>(terms));
            std::string candidate;
            for (std::size_t i = 0; i < len; ++i) {
                if (!candidate.empty()) candidate += ' ';
                candidate += terms[i];
            }
            candidate = normalize_query(candidate);
            if (!distinct_.contains(candidate)) query = std::move(candidate);
        }
    }
    if (query.empty()) {
        if (suggestion) {
            query = normalize_query(*suggestion);
        } else if (!history_.empty()) {
            query = history_[static_cast<std::size_t>(
                detail::uniform_int(rng, 0, static_cast<std::int64_t>(history_.size()) - 1))];
        } else {
            query = normalize_query(task.terms.front());
        }
    }
    history_.push_back(query);
    distinct_.insert(query);
    return query;
}

Session generate_session(const SimulationInputs& inputs, const TrailGraph* graph, SimMode mode,
                         const SimConfig& config, int user_index, const TaskSpec& task, QueryBook* book)
{
    if (mode == SimMode::Recommend && graph == nullptr) {
        throw Error("generate_session: recommend mode needs a trail graph");
    }
    if (config.session_budget_s < 0) throw Error("session_budget_s must be >= 0");
    if (task.terms.empty()) throw Error("task '" + task.task_id + "' has no query terms");
    QueryBook local;
    SessionGenerator gen(inputs, graph, mode, config, user_index, task, book ? *book : local);
    return gen.run();
}

std::vector<Session> SimOutcome::sessions_of(std::string_view condition) const
{
    std::vector<Session> out;
    for (const auto& s : sessions) {
        if (s.condition == condition) out.push_back(s.session);
    }
    return out;
}

std::vector<ActionEvent> SimOutcome::all_events() const
{
    std::vector<ActionEvent> out;
    for (const auto& s : sessions) out.insert(out.end(), s.session.events.begin(), s.session.events.end());
    return out;
}

SimOutcome run_experiment(const Corpus& corpus, const Qrels& qrels, const SimConfig& config)
{
    config.validate();
    const SearchIndex index(corpus);
    const SimulationInputs inputs{corpus, index, qrels};

    std::map<std::string, TrailGraph> graphs;  // key "" when shared
    std::map<std::string, QueryBook> books;
    auto graph_key = [&](const TaskSpec& t) { return config.per_task_graphs ? t.task_id : std::string(); };

    SimOutcome out;
    const int waves = (config.num_users + config.wave_size - 1) / config.wave_size;
    for (int wave = 0; wave < waves; ++wave) {
        const auto frozen = graphs;
        const auto first = out.sessions.size();
        const int end_user = std::min(config.num_users, (wave + 1) * config.wave_size);
        for (int user = wave * config.wave_size; user < end_user; ++user) {
            for (const auto& task : config.tasks) {
                auto& book = books[task.task_id];
                if (wave == 0) {
                    out.sessions.push_back(
                        {generate_session(inputs, nullptr, SimMode::Baseline, config, user, task, &book), "bootstrap", wave});
                    continue;
                }
                static const TrailGraph empty;
                auto it = frozen.find(graph_key(task));
                const TrailGraph* g = it == frozen.end() ? &empty : &it->second;
                out.sessions.push_back(
                    {generate_session(inputs, nullptr, SimMode::Baseline, config, user, task, &book), "baseline", wave});
                out.sessions.push_back(
                    {generate_session(inputs, g, SimMode::Recommend, config, user, task, &book), "recommend", wave});
            }
        }

        for (auto i = first; i < out.sessions.size(); ++i) {
            const auto& s = out.sessions[i].session;
            const TaskSpec* task = nullptr;
            for (const auto& t : config.tasks) {
                if (!s.events.empty() && s.events.front().task_id == t.task_id) task = &t;
            }
            graphs[task ? graph_key(*task) : std::string()].add_session(s, config.weights);
        }

        TrailGraph combined;
        for (const auto& [_, g] : graphs) combined = merge(combined, g);
        out.wave_stats.push_back(combined.stats());
        if (wave + 1 == waves) out.graph = std::move(combined);
    }

    for (const char* condition : {"bootstrap", "baseline", "recommend"}) {
        const auto sessions = out.sessions_of(condition);
        auto rows = evaluate_sessions(condition, sessions, qrels, config.weights);
        out.report.rows.insert(out.report.rows.end(), rows.begin(), rows.end());
    }
    const auto edges = default_bin_edges();
    out.report.curve = relevance_probability_curve(out.graph, qrels_union(qrels), edges);
    return out;
}

std::map<ActionType, double> action_mix(const std::map<ActionType, std::size_t>& counts)
{
    std::size_t total = 0;
    for (const auto& [_, n] : counts) total += n;
    if (total == 0) throw Error("action_mix: no events");
    std::map<ActionType, double> mix;
    for (auto a : kAllActions) {
        auto it = counts.find(a);
        mix[a] = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
    }
    return mix;
}

std::map<ActionType, double> action_mix(std::span<const Session> sessions)
{
    std::map<ActionType, std::size_t> counts;
    for (const auto& s : sessions) {
        for (const auto& ev : s.events) ++counts[ev.action];
    }
    return action_mix(counts);
}

double unique_query_fraction(std::span<const Session> sessions)
{
    std::size_t total = 0;
    std::set<std::string> distinct;
    for (const auto& s : sessions) {
        for (const auto& ev : s.events) {
            if (ev.action != ActionType::Query) continue;
            ++total;
            distinct.insert(normalize_query(ev.target));
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(distinct.size()) / static_cast<double>(total);
}

double cohort_overlap(std::span<const Session> sessions, std::size_t split_user)
{
    std::set<std::string> users;
    for (const auto& s : sessions) users.insert(s.user_id);
    std::set<std::string> early_users;
    for (const auto& u : users) {
        if (early_users.size() >= split_user) break;
        early_users.insert(u);
    }
    std::set<std::string> early, late;
    for (const auto& s : sessions) {
        auto& bucket = early_users.contains(s.user_id) ? early : late;
        for (const auto& ev : s.events) {
            if (ev.action == ActionType::View) bucket.insert(ev.target);
        }
    }
    if (early.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& d : early) shared += late.contains(d) ? 1 : 0;
    return static_cast<double>(shared) / static_cast<double>(early.size());
}

}  // namespace trailmine
