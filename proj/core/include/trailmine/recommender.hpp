#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "trailmine/event.hpp"
#include "trailmine/trail_graph.hpp"

namespace trailmine {

struct HistoryEntry {
    std::string node_id;
    double weight = 0.0;

    bool operator==(const HistoryEntry&) const = default;
};

/// What the live session has done so far and what it has already been shown.
struct SessionState {
    std::string session_id;
    std::vector<HistoryEntry> history;
    std::set<std::string> issued_queries;
    std::set<std::string> shown_recommendations;
    // Every id ever recommended, in presentation order.
    std::vector<std::string> shown_order;
    std::set<std::string> not_relevant;

    bool touched(const std::string& node_id) const;

    bool operator==(const SessionState&) const = default;
};

struct RecParams {
    int depth = 3;
    double damping = 0.6;
    double recency_decay = 0.8;
    std::size_t k = 10;

    /// Throws Error when a parameter is out of range.
    void validate() const;
};

struct Recommendation {
    std::string node_id;
    NodeKind kind = NodeKind::Document;
    double score = 0.0;

    bool operator==(const Recommendation&) const = default;
};

using ScoreMap = std::map<std::string, double>;

/// How an edge converts activation at its source into activation at its target.
///
/// `Weighted`: damping * weight / out_weight(src); zero-weight edges block.
/// `QuerySteps`: as Weighted, but zero-weight edges (the structural steps
/// that lead into query nodes) pass damping / out_degree(src).
enum class ActivationMode { Weighted, QuerySteps };

/// Appends the event's node to the history, or adds to the last entry when
/// the node repeats. Zero-weight plays leave the history untouched.
/// Throws Error if the event belongs to another session.
SessionState update_state(SessionState state, const ActionEvent& event, const WeightTable& table);

/// Recency-decayed seed distribution over history nodes, summing to 1.
/// Position 0 is the most recent entry. An entry's mass is its accumulated
/// weight; query entries (weight 0) count with unit mass.
ScoreMap seed_weights(const SessionState& state, double recency_decay);

/// Bounded spreading activation: the score of n is the sum over every walk
/// of 1..depth edges from a seed s to n of seed(s) times the product of the
/// edge factors. Seeds are excluded from the result; only positive scores
/// are reported.
ScoreMap activate(const TrailGraph& graph, const ScoreMap& seeds, const RecParams& params,
                  ActivationMode mode = ActivationMode::Weighted);

/// Top-k unseen documents for the session. The caller records what it
/// shows with mark_shown.
std::vector<Recommendation> recommend_documents(const TrailGraph& graph, const SessionState& state,
                                                const RecParams& params);

/// Top-k query reformulations the session has not issued yet.
std::vector<Recommendation> recommend_queries(const TrailGraph& graph, const SessionState& state,
                                              const RecParams& params);

SessionState mark_shown(SessionState state, std::span<const Recommendation> recommendations);

}  // namespace trailmine
