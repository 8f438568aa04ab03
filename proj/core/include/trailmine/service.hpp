#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "trailmine/error.hpp"
#include "trailmine/event.hpp"
#include "trailmine/event_store.hpp"
#include "trailmine/recommender.hpp"
#include "trailmine/retrieval.hpp"
#include "trailmine/trail_graph.hpp"

namespace trailmine {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path corpus_path;  // optional; search endpoints need it
    std::filesystem::path event_log_path = "events.jsonl";
    std::filesystem::path shown_log_path = "shown.jsonl";
    std::filesystem::path snapshot_path = "graph.snapshot";
    std::filesystem::path weights_path;  // optional; defaults otherwise
    RecParams rec_params;
    std::size_t query_k = 5;
    // Recommendations are computed per request against the latest graph.
    std::string refresh_policy = "on_request";

    /// JSON object; relative paths resolve against `base_dir`.
    static ServiceConfig parse(std::string_view json, const std::filesystem::path& base_dir = {});

    /// Paths under one data directory, as used by the CLI.
    static ServiceConfig for_data_dir(const std::filesystem::path& dir);
};

/// A batch that cannot be accepted as a whole (mixed sessions, repeated ids).
class BatchError : public Error {
public:
    using Error::Error;
};

struct IngestResult {
    std::size_t accepted = 0;
    std::size_t duplicates = 0;
};

struct RecommendationSet {
    std::vector<Recommendation> documents;
    std::vector<Recommendation> queries;
};

/// The live engine behind the HTTP API and the CLI.
///
/// Ingestion is single-writer: batches are validated, appended durably to
/// the event log, then folded into a private graph which is republished as
/// an immutable snapshot. Readers only ever see published snapshots.
/// Session states are serialized per session. Construction replays the
/// event log (and the shown-recommendation log), so a restarted service
/// reconstructs the exact graph and session states.
class TrailService {
public:
    explicit TrailService(ServiceConfig config);
    ~TrailService();

    TrailService(const TrailService&) = delete;
    TrailService& operator=(const TrailService&) = delete;

    /// All events must belong to one session. Events whose id is already in
    /// the log are acknowledged as duplicates without being re-applied.
    /// Throws InvalidEvent or BatchError; nothing is written in that case.
    IngestResult ingest(std::vector<ActionEvent> batch);

    /// Top-k documents and queries for the session, marked shown before
    /// returning. Unknown sessions get empty lists. Throws Error for k < 1.
    RecommendationSet recommend(const std::string& session_id, std::size_t k);

    std::vector<SearchHit> search(std::string_view query, std::size_t k) const;
    const Corpus& corpus() const noexcept { return corpus_; }

    std::shared_ptr<const TrailGraph> graph() const;
    GraphStats stats() const { return graph()->stats(); }

    std::optional<SessionState> session_state(const std::string& session_id) const;

    /// Writes `graph` (default: the current one) to the configured snapshot path.
    std::filesystem::path write_snapshot() const { return write_snapshot(*graph()); }
    std::filesystem::path write_snapshot(const TrailGraph& graph) const;

    const ServiceConfig& config() const noexcept { return config_; }
    const WeightTable& weights() const noexcept { return weights_; }

private:
    struct SessionSlot {
        std::mutex mutex;
        SessionState state;
        TrailCursor cursor;
    };

    std::shared_ptr<SessionSlot> slot(const std::string& session_id, bool create);
    void apply(const ActionEvent& event);
    void publish();
    void replay();

    ServiceConfig config_;
    WeightTable weights_;
    Corpus corpus_;
    std::unique_ptr<SearchIndex> index_;

    EventLog log_;
    AppendOnlyFile shown_log_;

    std::mutex writer_mutex_;
    TrailGraph working_;
    std::set<std::string> seen_ids_;

    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const TrailGraph> published_;

    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;

    std::mutex shown_mutex_;
};

}  // namespace trailmine
