#pragma once

// Hand-rolled random workload generators for property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "trailmine/event.hpp"
#include "trailmine/trail_graph.hpp"

namespace trailmine::testing {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p)
{
    return std::bernoulli_distribution(p)(rng);
}

/// Random graph over up to `max_nodes` query/document nodes. Edge weights are
/// multiples of 0.25 (some zero); each node gets at most `max_out` out-edges.
TrailGraph random_graph(Rng& rng, int max_nodes, int max_out, double zero_fraction = 0.15);

/// Event with the given action on a random target from small pools, so that
/// repeats and shared nodes are common.
ActionEvent random_event(Rng& rng, const std::string& session_id, const std::string& user_id, int seq,
                         std::int64_t timestamp_ms, int shot_pool = 12, int query_pool = 5);

/// A valid session of `length` events with increasing timestamps.
Session random_session(Rng& rng, const std::string& session_id, int length, int shot_pool = 12,
                       int query_pool = 5);

std::vector<Session> random_sessions(Rng& rng, int count, int max_length);

}  // namespace trailmine::testing
