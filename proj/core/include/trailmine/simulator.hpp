#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trailmine/evaluation.hpp"
#include "trailmine/event.hpp"
#include "trailmine/recommender.hpp"
#include "trailmine/retrieval.hpp"
#include "trailmine/trail_graph.hpp"

namespace trailmine {

struct TaskSpec {
    std::string task_id;
    std::vector<std::string> terms;

    bool operator==(const TaskSpec&) const = default;
};

/// Shape of the synthetic shot collection used in place of a real archive.
struct ToyCorpusConfig {
    std::uint64_t seed = 7;
    int videos = 1000;
    int shots_per_video = 20;
    // Relevant shots come in contiguous runs inside videos.
    int relevant_runs_per_task = 30;
    int min_run_length = 3;
    int max_run_length = 6;
    // Relevant shots whose text carries no task term at all.
    double textless_relevant_fraction = 0.4;
    // Non-relevant shots that nevertheless mention task terms.
    int distractors_per_task = 1500;
    int background_vocabulary = 1500;
    int min_background_words = 6;
    int max_background_words = 10;

    bool operator==(const ToyCorpusConfig&) const = default;
};

struct ToyCollection {
    Corpus corpus;
    Qrels qrels;
};

ToyCollection make_toy_collection(std::span<const TaskSpec> tasks, const ToyCorpusConfig& config);

/// Four default search tasks with eight query terms each.
std::vector<TaskSpec> default_tasks();

/// Action-type proportions of a logged interactive search deployment (23559 actions).
std::map<ActionType, double> reference_action_mix();
std::map<ActionType, std::size_t> reference_action_counts();

struct SimConfig {
    std::uint64_t rng_seed = 42;
    int num_users = 24;
    // Users per wave; the first wave runs without recommendations and seeds the graph.
    int wave_size = 4;
    std::vector<TaskSpec> tasks = default_tasks();
    std::int64_t session_budget_s = 900;
    std::map<ActionType, double> action_mix = reference_action_mix();
    double relevance_affinity = 2.5;
    double recommendation_follow_prob = 0.5;
    double judgment_noise = 0.1;
    double unique_query_fraction = 0.57;
    double short_play_fraction = 0.1;
    std::size_t results_per_page = 20;
    std::size_t query_recommendations = 3;
    bool per_task_graphs = false;
    RecParams rec_params{3, 0.6, 0.8, 5};
    WeightTable weights = WeightTable::defaults();
    ToyCorpusConfig corpus;

    /// Throws Error when a field is out of range.
    void validate() const;
};

/// JSON object; absent keys keep their defaults.
SimConfig parse_sim_config(std::string_view json);
std::string serialize_sim_config(const SimConfig& config);

enum class SimMode { Baseline, Recommend };

/// Query history of one task shared by consecutive sessions, so later
/// searchers partly repeat earlier queries.
class QueryBook {
public:
    /// Novel with probability `unique_fraction`, otherwise a popularity-weighted
    /// repeat of an earlier query (or `suggestion` when given).
    std::string next(const TaskSpec& task, double unique_fraction, std::mt19937_64& rng,
                     const std::optional<std::string>& suggestion = std::nullopt);

    std::size_t issued() const noexcept { return history_.size(); }
    std::size_t distinct() const noexcept { return distinct_.size(); }

private:
    std::vector<std::string> history_;
    std::set<std::string> distinct_;
};

struct SimulationInputs {
    const Corpus& corpus;
    const SearchIndex& index;
    const Qrels& qrels;
};

/// One simulated searcher working on `task` until the time budget runs out.
/// Deterministic in (config.rng_seed, user_index, task, mode, graph, book state).
/// Throws Error in Recommend mode without a graph.
Session generate_session(const SimulationInputs& inputs, const TrailGraph* graph, SimMode mode,
                         const SimConfig& config, int user_index, const TaskSpec& task,
                         QueryBook* book = nullptr);

struct SimSession {
    Session session;
    std::string condition;  // "bootstrap", "baseline" or "recommend"
    int wave = 0;
};

struct SimOutcome {
    std::vector<SimSession> sessions;
    MetricsReport report;
    TrailGraph graph;
    // Graph statistics after each wave was folded in.
    std::vector<GraphStats> wave_stats;

    std::vector<Session> sessions_of(std::string_view condition) const;
    std::vector<ActionEvent> all_events() const;
};

/// Waves of simulated users over a shared (or per-task) trail graph. Wave 0
/// is the bootstrap; later waves run each user through every task once per
/// condition against the graph frozen at the start of the wave.
SimOutcome run_experiment(const Corpus& corpus, const Qrels& qrels, const SimConfig& config);

/// Normalized action counts. Throws Error on empty input.
std::map<ActionType, double> action_mix(std::span<const Session> sessions);
std::map<ActionType, double> action_mix(const std::map<ActionType, std::size_t>& counts);

/// distinct normalized queries / issued queries (0 when no queries).
double unique_query_fraction(std::span<const Session> sessions);

/// Fraction of shots viewed by the first `split_user` users that were also
/// viewed by at least one later user. Users are ordered by user_id.
double cohort_overlap(std::span<const Session> sessions, std::size_t split_user);

}  // namespace trailmine
