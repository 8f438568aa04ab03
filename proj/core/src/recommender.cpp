#include "trailmine/recommender.hpp"

#include <algorithm>
#include <cmath>

#include "trailmine/error.hpp"

namespace trailmine {

bool SessionState::touched(const std::string& node_id) const
{
    return std::any_of(history.begin(), history.end(),
                       [&](const HistoryEntry& h) { return h.node_id == node_id; });
}

void RecParams::validate() const
{
    if (depth < 1) throw Error("depth must be >= 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw Error("damping must be in (0, 1]");
    if (!(recency_decay > 0.0 && recency_decay <= 1.0)) throw Error("recency_decay must be in (0, 1]");
    if (k < 1) throw Error("k must be >= 1");
}

SessionState update_state(SessionState state, const ActionEvent& event, const WeightTable& table)
{
    if (event.session_id != state.session_id) {
        throw Error("event '" + event.event_id + "' belongs to session '" + event.session_id +
                    "', not '" + state.session_id + "'");
    }
    validate(event);

    std::string node_id;
    double w = 0.0;
    if (event.action == ActionType::Query) {
        node_id = query_node_id(event.target);
        state.issued_queries.insert(node_id);
    } else {
        node_id = document_node_id(event.target);
        w = action_weight(event.action, event.duration_ms, table);
        if (event.action == ActionType::MarkNotRelevant) {
            state.not_relevant.insert(node_id);
        }
        if (w == 0.0 && event.action == ActionType::Play) {
            return state;
        }
    }

    if (!state.history.empty() && state.history.back().node_id == node_id) {
        state.history.back().weight += w;
    } else {
        state.history.push_back(HistoryEntry{std::move(node_id), w});
    }
    return state;
}

ScoreMap seed_weights(const SessionState& state, double recency_decay)
{
    ScoreMap seeds;
    double decay = 1.0;
    double total = 0.0;
    for (auto it = state.history.rbegin(); it != state.history.rend(); ++it, decay *= recency_decay) {
        double mass = it->weight;
        if (mass == 0.0 && kind_of(it->node_id) == NodeKind::Query) {
            mass = 1.0;
        }
        if (mass <= 0.0) continue;
        seeds[it->node_id] += decay * mass;
        total += decay * mass;
    }
    if (total > 0.0) {
        for (auto& [_, v] : seeds) v /= total;
    }
    return seeds;
}

ScoreMap activate(const TrailGraph& graph, const ScoreMap& seeds, const RecParams& params,
                  ActivationMode mode)
{
    params.validate();
    ScoreMap result;
    if (seeds.empty() || graph.empty()) return result;

    using NodeIndex = TrailGraph::NodeIndex;
    const auto n = graph.node_count();
    std::vector<double> frontier(n, 0.0);
    std::vector<double> next(n, 0.0);
    std::vector<double> score(n, 0.0);
    std::vector<char> is_seed(n, 0);
    std::vector<NodeIndex> active;
    std::vector<NodeIndex> next_active;
    std::vector<NodeIndex> reached;
    std::vector<char> in_next(n, 0);
    std::vector<char> in_reached(n, 0);

    for (const auto& [id, w] : seeds) {
        if (w < 0.0) throw Error("negative seed weight for '" + id + "'");
        const auto i = graph.find(id);
        if (!i) continue;
        is_seed[*i] = 1;
        if (w > 0.0) {
            frontier[*i] = w;
            active.push_back(*i);
        }
    }
    std::sort(active.begin(), active.end());

    for (int step = 0; step < params.depth && !active.empty(); ++step) {
        for (auto u : active) {
            const double mass = frontier[u];
            const double out_w = graph.out_weight(u);
            const auto out = graph.out_edges(u);
            for (auto e : out) {
                const auto& edge = graph.edge(e);
                double factor = 0.0;
                if (edge.weight > 0.0) {
                    factor = params.damping * edge.weight / out_w;
                } else if (mode == ActivationMode::QuerySteps) {
                    factor = params.damping / static_cast<double>(out.size());
                }
                if (factor == 0.0) continue;
                next[edge.dst] += mass * factor;
                if (!in_next[edge.dst]) {
                    in_next[edge.dst] = 1;
                    next_active.push_back(edge.dst);
                }
            }
            frontier[u] = 0.0;
        }
        std::sort(next_active.begin(), next_active.end());
        for (auto v : next_active) {
            score[v] += next[v];
            frontier[v] = next[v];
            next[v] = 0.0;
            in_next[v] = 0;
            if (!in_reached[v]) {
                in_reached[v] = 1;
                reached.push_back(v);
            }
        }
        active.swap(next_active);
        next_active.clear();
    }

    for (auto v : reached) {
        if (!is_seed[v] && score[v] > 0.0) {
            result.emplace(graph.node(v).id, score[v]);
        }
    }
    return result;
}

namespace {

std::vector<Recommendation> rank(const TrailGraph& graph, const SessionState& state,
                                 const RecParams& params, NodeKind want, ActivationMode mode)
{
    const auto seeds = seed_weights(state, params.recency_decay);
    const auto scores = activate(graph, seeds, params, mode);

    std::set<std::string> history;
    for (const auto& h : state.history) history.insert(h.node_id);

    std::vector<Recommendation> out;
    for (const auto& [id, s] : scores) {
        if (kind_of(id) != want || !(s > 0.0) || !std::isfinite(s)) continue;
        if (state.shown_recommendations.contains(id) || state.not_relevant.contains(id) ||
            state.issued_queries.contains(id) || history.contains(id)) {
            continue;
        }
        out.push_back(Recommendation{id, want, s});
    }
    std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.node_id < b.node_id;
    });
    if (out.size() > params.k) out.resize(params.k);
    return out;
}

}  // namespace

std::vector<Recommendation> recommend_documents(const TrailGraph& graph, const SessionState& state,
                                                const RecParams& params)
{
    return rank(graph, state, params, NodeKind::Document, ActivationMode::Weighted);
}

std::vector<Recommendation> recommend_queries(const TrailGraph& graph, const SessionState& state,
                                              const RecParams& params)
{
    return rank(graph, state, params, NodeKind::Query, ActivationMode::QuerySteps);
}

SessionState mark_shown(SessionState state, std::span<const Recommendation> recommendations)
{
    for (const auto& r : recommendations) {
        if (state.shown_recommendations.insert(r.node_id).second) {
            state.shown_order.push_back(r.node_id);
        }
    }
    return state;
}

}  // namespace trailmine
