#include "trailmine/trail_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "trailmine/error.hpp"
#include "text_util.hpp"

namespace trailmine {

namespace {

constexpr std::string_view kQueryPrefix = "q:";
constexpr std::string_view kDocumentPrefix = "d:";

std::uint64_t edge_key(TrailGraph::NodeIndex src, TrailGraph::NodeIndex dst) noexcept
{
    return (static_cast<std::uint64_t>(src) << 32) | dst;
}

}  // namespace

std::string_view to_string(NodeKind kind) noexcept
{
    return kind == NodeKind::Query ? "query" : "document";
}

std::string normalize_query(std::string_view text)
{
    std::string out;
    for (auto token : detail::split_ws(text)) {
        if (!out.empty()) out += ' ';
        out += detail::to_lower(token);
    }
    return out;
}

std::string query_node_id(std::string_view query_text)
{
    return std::string(kQueryPrefix) + normalize_query(query_text);
}

std::string document_node_id(std::string_view shot_id)
{
    return std::string(kDocumentPrefix) + std::string(shot_id);
}

std::optional<NodeKind> kind_of(std::string_view node_id) noexcept
{
    if (node_id.starts_with(kQueryPrefix)) return NodeKind::Query;
    if (node_id.starts_with(kDocumentPrefix)) return NodeKind::Document;
    return std::nullopt;
}

std::string_view strip_kind(std::string_view node_id) noexcept
{
    return kind_of(node_id) ? node_id.substr(2) : node_id;
}

std::optional<TrailGraph::NodeIndex> TrailGraph::find(std::string_view node_id) const
{
    auto it = index_.find(std::string(node_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TrailGraph::NodeIndex TrailGraph::add_node(std::string_view node_id, NodeKind kind)
{
    if (kind_of(node_id) != kind || node_id.size() <= 2) {
        throw Error("node id '" + std::string(node_id) + "' does not match kind " +
                    std::string(to_string(kind)));
    }
    auto [it, inserted] = index_.try_emplace(std::string(node_id), static_cast<NodeIndex>(nodes_.size()));
    if (inserted) {
        nodes_.push_back(Node{std::string(node_id), kind});
        out_.emplace_back();
        in_.emplace_back();
        out_weight_.push_back(0.0);
    }
    return it->second;
}

void TrailGraph::accumulate(std::string_view src, std::string_view dst, double weight,
                            std::uint64_t count)
{
    if (src == dst) {
        throw Error("self-loop on '" + std::string(src) + "'");
    }
    if (!std::isfinite(weight) || weight < 0.0) {
        throw Error("edge weight must be finite and >= 0");
    }
    const auto src_kind = kind_of(src);
    const auto dst_kind = kind_of(dst);
    if (!src_kind || !dst_kind) {
        throw Error("edge endpoint without a kind prefix");
    }
    const auto s = add_node(src, *src_kind);
    const auto d = add_node(dst, *dst_kind);
    auto [it, inserted] = edge_index_.try_emplace(edge_key(s, d), static_cast<EdgeIndex>(edges_.size()));
    if (inserted) {
        edges_.push_back(EdgeData{s, d, 0.0, 0});
        out_[s].push_back(it->second);
        in_[d].push_back(it->second);
    }
    auto& e = edges_[it->second];
    e.weight += weight;
    e.count += count;
    out_weight_[s] += weight;
}

void TrailGraph::add_session(const Session& session, const WeightTable& table)
{
    TrailCursor cursor;
    extend(cursor, session.events, table);
}

void TrailGraph::extend(TrailCursor& cursor, std::span<const ActionEvent> events,
                        const WeightTable& table)
{
    for (const auto& ev : events) {
        validate(ev);
    }

    for (const auto& ev : events) {
        if (ev.action == ActionType::Query) {
            auto qid = query_node_id(ev.target);
            add_node(qid, NodeKind::Query);
            if (!cursor.node) {
                cursor.entered_from.reset();
            } else if (*cursor.node != qid) {
                // Structural reformulation step: connectivity without attention.
                accumulate(*cursor.node, qid, 0.0, 1);
                cursor.entered_from = cursor.node;
            } else {
                continue;
            }
            cursor.node = std::move(qid);
            continue;
        }

        const double w = action_weight(ev.action, ev.duration_ms, table);
        if (w == 0.0 && ev.action == ActionType::Play) {
            continue;
        }
        auto did = document_node_id(ev.target);
        add_node(did, NodeKind::Document);
        if (!cursor.node) {
            cursor.node = std::move(did);
            cursor.entered_from.reset();
        } else if (*cursor.node == did) {
            if (cursor.entered_from) {
                accumulate(*cursor.entered_from, did, w, 1);
            }
        } else {
            accumulate(*cursor.node, did, w, 1);
            cursor.entered_from = std::move(cursor.node);
            cursor.node = std::move(did);
        }
    }
}

double TrailGraph::interaction_value(std::string_view node_id) const
{
    const auto i = find(node_id);
    if (!i) return 0.0;
    double sum = 0.0;
    for (auto e : in_[*i]) sum += edges_[e].weight;
    return sum;
}

GraphStats TrailGraph::stats() const
{
    GraphStats s;
    s.node_count = nodes_.size();
    for (const auto& n : nodes_) {
        (n.kind == NodeKind::Query ? s.query_node_count : s.document_node_count) += 1;
    }
    s.edge_count = edges_.size();
    for (const auto& e : sorted_edges()) s.total_weight += e.weight;
    return s;
}

std::vector<Node> TrailGraph::sorted_nodes() const
{
    auto out = nodes_;
    std::sort(out.begin(), out.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    return out;
}

std::vector<Edge> TrailGraph::sorted_edges() const
{
    std::vector<Edge> out;
    out.reserve(edges_.size());
    for (const auto& e : edges_) {
        out.push_back(Edge{nodes_[e.src].id, nodes_[e.dst].id, e.weight, e.count});
    }
    std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    return out;
}

bool TrailGraph::operator==(const TrailGraph& other) const
{
    return approx_equal(*this, other, 0.0);
}

bool approx_equal(const TrailGraph& a, const TrailGraph& b, double tolerance)
{
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) {
        return false;
    }
    for (TrailGraph::NodeIndex i = 0; i < a.node_count(); ++i) {
        const auto j = b.find(a.node(i).id);
        if (!j || b.node(*j).kind != a.node(i).kind) return false;
    }
    for (TrailGraph::EdgeIndex e = 0; e < a.edge_count(); ++e) {
        const auto& ea = a.edge(e);
        const auto bs = b.find(a.node(ea.src).id);
        const auto bd = b.find(a.node(ea.dst).id);
        bool found = false;
        for (auto f : b.out_edges(*bs)) {
            const auto& eb = b.edge(f);
            if (eb.dst != *bd) continue;
            found = eb.count == ea.count && std::abs(eb.weight - ea.weight) <= tolerance;
            break;
        }
        if (!found) return false;
    }
    return true;
}

TrailGraph add_session(TrailGraph graph, const Session& session, const WeightTable& table)
{
    graph.add_session(session, table);
    return graph;
}

TrailGraph merge(const TrailGraph& a, const TrailGraph& b)
{
    std::map<std::string, NodeKind> nodes;
    std::map<std::pair<std::string, std::string>, std::pair<double, std::uint64_t>> edges;
    for (const auto* g : {&a, &b}) {
        for (TrailGraph::NodeIndex i = 0; i < g->node_count(); ++i) {
            nodes.emplace(g->node(i).id, g->node(i).kind);
        }
        for (const auto& e : g->sorted_edges()) {
            auto& slot = edges[{e.src, e.dst}];
            slot.first += e.weight;
            slot.second += e.count;
        }
    }

    TrailGraph out;
    for (const auto& [id, kind] : nodes) {
        out.add_node(id, kind);
    }
    for (const auto& [key, value] : edges) {
        out.accumulate(key.first, key.second, value.first, value.second);
    }
    return out;
}

}  // namespace trailmine
