#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trailmine/event.hpp"
#include "trailmine/trail_graph.hpp"

namespace trailmine {

/// task_id -> relevant shot ids.
using Qrels = std::map<std::string, std::set<std::string>>;

/// Whitespace-separated `task_id 0 shot_id relevance` lines; relevance > 0
/// counts as relevant. Tasks whose lines are all non-relevant still appear
/// with an empty set.
Qrels parse_qrels(std::string_view text);
std::string serialize_qrels(const Qrels& qrels);
std::set<std::string> qrels_union(const Qrels& qrels);

/// |relevant ∩ top-min(n, len)| / n. Throws Error for n < 1.
double precision_at_n(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                      std::size_t n);

/// Sum of P@r over ranks r holding a relevant item, divided by |relevant|.
/// Throws Error when `relevant` is empty.
double average_precision(std::span<const std::string> ranked, const std::set<std::string>& relevant);

struct RankedRun {
    std::string task_id;
    std::vector<std::string> ranked;
};

/// Arithmetic mean of AP over runs, each judged against its task's qrels.
double mean_average_precision(std::span<const RankedRun> runs, const Qrels& qrels);

/// Seconds from the session's first event to the first MarkRelevant whose
/// target is relevant.
std::optional<double> time_to_first_relevant(const Session& session,
                                             const std::set<std::string>& relevant);

/// Shots the user marked relevant and left marked, in order of first marking.
std::vector<std::string> selected_shots(const Session& session);

/// Every shot the session touched, by accumulated action weight (descending),
/// ties in first-touch order.
std::vector<std::string> interacted_shots(const Session& session, const WeightTable& table);

struct CurveBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n_docs = 0;
    std::size_t n_relevant = 0;
    double p_relevant = 0.0;

    bool operator==(const CurveBin&) const = default;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// {0, 1, 2, 3, 4, 5, 7, 10, 15, inf}
std::vector<double> default_bin_edges();

/// Buckets every document node by interaction value into [edge_i, edge_i+1).
/// Edges must be strictly increasing and start at or below 0; when the last
/// edge is finite an overflow bin up to infinity is appended.
std::vector<CurveBin> relevance_probability_curve(const TrailGraph& graph,
                                                  const std::set<std::string>& relevant_shots,
                                                  std::span<const double> bin_edges);

/// Spearman rank correlation with average ranks for ties. Throws Error on
/// size mismatch or fewer than two points; returns 0 if either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct MetricsRow {
    std::string system;
    std::string task_id;  // "all" for the pooled row
    std::string list_kind;  // "selected", "interacted" or "ranking"
    std::size_t runs = 0;
    std::map<std::size_t, double> p_at_n;
    double map_score = 0.0;
    std::optional<double> time_to_first_relevant_s;
    std::size_t runs_with_relevant = 0;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;
    std::vector<CurveBin> curve;

    const MetricsRow* find(std::string_view system, std::string_view task_id,
                           std::string_view list_kind) const;

    std::string to_json() const;
    /// Tab-separated, one row per MetricsRow, header first.
    std::string to_table() const;
    std::string curve_table() const;
};

inline const std::vector<std::size_t> kDefaultCutoffs = {5, 10, 15, 20, 30, 100};

/// Rows for the user-selected and interaction-ranked lists of each session,
/// per task plus an "all" row. Sessions are assigned to a task through the
/// task_id of their events; sessions without a judged task are skipped.
std::vector<MetricsRow> evaluate_sessions(std::string_view system, std::span<const Session> sessions,
                                          const Qrels& qrels, const WeightTable& table,
                                          std::span<const std::size_t> cutoffs = kDefaultCutoffs);

/// Rows for system rankings (list kind "ranking").
std::vector<MetricsRow> evaluate_runs(std::string_view system, std::span<const RankedRun> runs,
                                      const Qrels& qrels,
                                      std::span<const std::size_t> cutoffs = kDefaultCutoffs);

/// TREC run format: `task_id Q0 shot_id rank score tag`, ranked by score
/// descending then rank ascending. One RankedRun per task.
std::vector<RankedRun> parse_trec_run(std::string_view text);

}  // namespace trailmine
