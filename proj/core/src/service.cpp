#include "trailmine/service.hpp"

#include <json.hpp>

#include "trailmine/error.hpp"
#include "text_util.hpp"

namespace trailmine {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ServiceConfig ServiceConfig::parse(std::string_view json, const std::filesystem::path& base_dir)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("service config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(0, "service config must be a JSON object");

    ServiceConfig c;
    try {
        if (j.contains("listen")) {
            const auto& l = j.at("listen");
            if (l.contains("host")) c.host = l.at("host").get<std::string>();
            if (l.contains("port")) c.port = l.at("port").get<int>();
        }
        auto path_field = [&](const char* key, std::filesystem::path& field) {
            if (j.contains(key)) field = resolve(base_dir, j.at(key).get<std::string>());
            else if (!field.empty()) field = resolve(base_dir, field.string());
        };
        path_field("corpus_path", c.corpus_path);
        path_field("event_log_path", c.event_log_path);
        path_field("shown_log_path", c.shown_log_path);
        path_field("snapshot_path", c.snapshot_path);
        path_field("weights_path", c.weights_path);
        if (j.contains("recommendation")) {
            const auto& r = j.at("recommendation");
            if (r.contains("depth")) c.rec_params.depth = r.at("depth").get<int>();
            if (r.contains("damping")) c.rec_params.damping = r.at("damping").get<double>();
            if (r.contains("recency_decay")) c.rec_params.recency_decay = r.at("recency_decay").get<double>();
            if (r.contains("k")) c.rec_params.k = r.at("k").get<std::size_t>();
            if (r.contains("query_k")) c.query_k = r.at("query_k").get<std::size_t>();
        }
        if (j.contains("refresh_policy")) c.refresh_policy = j.at("refresh_policy").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("service config: ") + e.what());
    }
    if (c.refresh_policy != "on_request") {
        throw Error("unsupported refresh_policy '" + c.refresh_policy + "'");
    }
    if (c.port < 0 || c.port > 65535) throw Error("port out of range");
    c.rec_params.validate();
    return c;
}

ServiceConfig ServiceConfig::for_data_dir(const std::filesystem::path& dir)
{
    ServiceConfig c;
    c.event_log_path = dir / "events.jsonl";
    c.shown_log_path = dir / "shown.jsonl";
    c.snapshot_path = dir / "graph.snapshot";
    if (std::filesystem::exists(dir / "weights.conf")) c.weights_path = dir / "weights.conf";
    if (std::filesystem::exists(dir / "corpus.jsonl")) c.corpus_path = dir / "corpus.jsonl";
    return c;
}

TrailService::TrailService(ServiceConfig config)
    : config_(std::move(config)),
      weights_(config_.weights_path.empty() ? WeightTable::defaults()
                                            : parse_weight_table(read_file(config_.weights_path))),
      corpus_(config_.corpus_path.empty() ? Corpus() : load_corpus(read_file(config_.corpus_path))),
      index_(std::make_unique<SearchIndex>(corpus_)),
      log_(config_.event_log_path),
      shown_log_(config_.shown_log_path),
      published_(std::make_shared<const TrailGraph>())
{
    config_.rec_params.validate();
    replay();
}

TrailService::~TrailService() = default;

std::shared_ptr<TrailService::SessionSlot> TrailService::slot(const std::string& session_id, bool create)
{
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it != sessions_.end()) return it->second;
    if (!create) return nullptr;
    auto s = std::make_shared<SessionSlot>();
    s->state.session_id = session_id;
    sessions_.emplace(session_id, s);
    return s;
}

void TrailService::apply(const ActionEvent& event)
{
    auto s = slot(event.session_id, true);
    std::lock_guard lock(s->mutex);
    working_.extend(s->cursor, std::span(&event, 1), weights_);
    s->state = update_state(std::move(s->state), event, weights_);
    seen_ids_.insert(event.event_id);
}

void TrailService::publish()
{
    auto g = std::make_shared<const TrailGraph>(working_);
    std::lock_guard lock(snapshot_mutex_);
    published_ = std::move(g);
}

void TrailService::replay()
{
    std::lock_guard lock(writer_mutex_);
    for (const auto& ev : log_.read_all()) {
        apply(ev);
    }

    std::size_t line_number = 0;
    detail::for_each_line(shown_log_.read_all(), [&](std::string_view line) {
        ++line_number;
        if (detail::trim(line).empty()) return;
        try {
            const auto j = nlohmann::json::parse(line);
            auto s = slot(j.at("session_id").get<std::string>(), true);
            std::vector<Recommendation> recs;
            for (const auto& id : j.at("node_ids")) {
                const auto node_id = id.get<std::string>();
                recs.push_back(Recommendation{node_id, kind_of(node_id).value_or(NodeKind::Document), 1.0});
            }
            std::lock_guard slock(s->mutex);
            s->state = mark_shown(std::move(s->state), recs);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_number, std::string("shown log: ") + e.what());
        }
    });
    publish();
}

IngestResult TrailService::ingest(std::vector<ActionEvent> batch)
{
    if (batch.empty()) throw BatchError("empty batch");
    std::set<std::string> ids;
    for (const auto& ev : batch) {
        validate(ev);
        if (ev.session_id != batch.front().session_id) {
            throw BatchError("batch mixes sessions '" + batch.front().session_id + "' and '" + ev.session_id + "'");
        }
        if (!ids.insert(ev.event_id).second) {
            throw BatchError("event_id '" + ev.event_id + "' repeated within batch");
        }
    }

    std::lock_guard lock(writer_mutex_);
    IngestResult result;
    std::vector<ActionEvent> fresh;
    for (auto& ev : batch) {
        if (seen_ids_.contains(ev.event_id)) {
            ++result.duplicates;
        } else {
            fresh.push_back(std::move(ev));
        }
    }
    if (fresh.empty()) return result;

    log_.append(fresh);
    for (const auto& ev : fresh) apply(ev);
    publish();
    result.accepted = fresh.size();
    return result;
}

RecommendationSet TrailService::recommend(const std::string& session_id, std::size_t k)
{
    if (k < 1) throw Error("k must be >= 1");
    RecommendationSet out;
    auto s = slot(session_id, false);
    if (!s) return out;

    const auto g = graph();
    std::lock_guard lock(s->mutex);
    auto params = config_.rec_params;
    params.k = k;
    out.documents = recommend_documents(*g, s->state, params);
    params.k = std::min(k, std::max<std::size_t>(1, config_.query_k));
    out.queries = recommend_queries(*g, s->state, params);

    if (!out.documents.empty() || !out.queries.empty()) {
        nlohmann::json j;
        j["session_id"] = session_id;
        j["node_ids"] = nlohmann::json::array();
        for (const auto* list : {&out.documents, &out.queries}) {
            for (const auto& r : *list) j["node_ids"].push_back(r.node_id);
        }
        {
            std::lock_guard shown(shown_mutex_);
            shown_log_.append(j.dump() + "\n");
        }
        s->state = mark_shown(std::move(s->state), out.documents);
        s->state = mark_shown(std::move(s->state), out.queries);
    }
    return out;
}

std::vector<SearchHit> TrailService::search(std::string_view query, std::size_t k) const
{
    return index_->search(query, k);
}

std::shared_ptr<const TrailGraph> TrailService::graph() const
{
    std::lock_guard lock(snapshot_mutex_);
    return published_;
}

std::optional<SessionState> TrailService::session_state(const std::string& session_id) const
{
    std::shared_ptr<SessionSlot> s;
    {
        std::lock_guard lock(sessions_mutex_);
        auto it = sessions_.find(session_id);
        if (it == sessions_.end()) return std::nullopt;
        s = it->second;
    }
    std::lock_guard lock(s->mutex);
    return s->state;
}

std::filesystem::path TrailService::write_snapshot(const TrailGraph& graph) const
{
    write_file_atomic(config_.snapshot_path, snapshot(graph));
    return config_.snapshot_path;
}

}  // namespace trailmine
