#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trailmine/event.hpp"

namespace trailmine {

enum class NodeKind : std::uint8_t { Query, Document };

std::string_view to_string(NodeKind kind) noexcept;

/// Lowercases, trims and collapses internal whitespace runs to one space.
std::string normalize_query(std::string_view text);

/// Node ids are namespaced by kind so a shot id never collides with query text.
std::string query_node_id(std::string_view query_text);
std::string document_node_id(std::string_view shot_id);

/// Kind encoded in a namespaced id, or nullopt if the prefix is unknown.
std::optional<NodeKind> kind_of(std::string_view node_id) noexcept;

/// Strips the "q:" / "d:" prefix.
std::string_view strip_kind(std::string_view node_id) noexcept;

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Query;

    bool operator==(const Node&) const = default;
};

/// Edge described by endpoint ids, as exposed to callers.
struct Edge {
    std::string src;
    std::string dst;
    double weight = 0.0;
    std::uint64_t count = 0;

    bool operator==(const Edge&) const = default;
};

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t query_node_count = 0;
    std::size_t document_node_count = 0;
    std::size_t edge_count = 0;
    double total_weight = 0.0;

    bool operator==(const GraphStats&) const = default;
};

/// Trail position of one session while its events are folded into a graph.
/// `entered_from` is the source of the edge this session last traversed
/// into `node`; repeat actions on `node` reinforce that edge.
struct TrailCursor {
    std::optional<std::string> node;
    std::optional<std::string> entered_from;

    bool operator==(const TrailCursor&) const = default;
};

/// Aggregated search-trail graph over query and document nodes.
///
/// Edges follow trail order (earlier step -> later step). At most one edge
/// exists per ordered pair; repeated traversals accumulate weight and count.
/// The class is a plain value: copies are independent, and a const instance
/// may be read from any number of threads.
class TrailGraph {
public:
    using NodeIndex = std::uint32_t;
    using EdgeIndex = std::uint32_t;

    struct EdgeData {
        NodeIndex src = 0;
        NodeIndex dst = 0;
        double weight = 0.0;
        std::uint64_t count = 0;
    };

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }

    std::optional<NodeIndex> find(std::string_view node_id) const;
    bool contains(std::string_view node_id) const { return find(node_id).has_value(); }

    const Node& node(NodeIndex i) const { return nodes_[i]; }
    const EdgeData& edge(EdgeIndex e) const { return edges_[e]; }
    std::span<const EdgeIndex> out_edges(NodeIndex i) const { return out_[i]; }
    std::span<const EdgeIndex> in_edges(NodeIndex i) const { return in_[i]; }

    /// Sum of outgoing edge weights of `i`.
    double out_weight(NodeIndex i) const { return out_weight_[i]; }

    /// Create-or-get. The id must already be namespaced and match `kind`.
    NodeIndex add_node(std::string_view node_id, NodeKind kind);

    /// Adds `weight` and `count` to edge src->dst, creating it (and the
    /// endpoints, by id prefix) if needed. Self-loops are rejected.
    void accumulate(std::string_view src, std::string_view dst, double weight,
                    std::uint64_t count);

    /// Folds one session's trail into the graph, starting from a fresh cursor.
    void add_session(const Session& session, const WeightTable& table);

    /// Folds events into the graph continuing from `cursor`, which is updated.
    /// All events are validated before any mutation.
    void extend(TrailCursor& cursor, std::span<const ActionEvent> events,
                const WeightTable& table);

    /// Sum of the weights of edges entering the node; 0 for unknown ids.
    double interaction_value(std::string_view node_id) const;

    GraphStats stats() const;

    /// Nodes sorted by id.
    std::vector<Node> sorted_nodes() const;
    /// Edges sorted by (src, dst).
    std::vector<Edge> sorted_edges() const;

    /// Equal node sets and equal edge sets (weights compared exactly).
    bool operator==(const TrailGraph& other) const;

private:
    std::vector<Node> nodes_;
    std::unordered_map<std::string, NodeIndex> index_;
    std::vector<EdgeData> edges_;
    std::unordered_map<std::uint64_t, EdgeIndex> edge_index_;
    std::vector<std::vector<EdgeIndex>> out_;
    std::vector<std::vector<EdgeIndex>> in_;
    std::vector<double> out_weight_;
};

/// Value-returning form of TrailGraph::add_session.
TrailGraph add_session(TrailGraph graph, const Session& session, const WeightTable& table);

/// Node union with edge-wise weight and count addition.
TrailGraph merge(const TrailGraph& a, const TrailGraph& b);

/// Same node set and edge pairs, counts equal, weights within `tolerance`.
bool approx_equal(const TrailGraph& a, const TrailGraph& b, double tolerance);

/// Versioned line-oriented text encoding with canonical ordering; identical
/// graphs produce identical bytes.
std::string snapshot(const TrailGraph& graph);

/// Throws ParseError on version mismatch, corrupt payload or checksum failure.
TrailGraph load_snapshot(std::string_view bytes);

}  // namespace trailmine
