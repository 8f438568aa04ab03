#pragma once

#include <random>
#include <string>
#include <vector>

#include "trailmine/event.hpp"

namespace trailmine::bench {

// Sessions over a Zipf-ish shot pool, shaped like simulator output.
inline std::vector<Session> sessions(std::size_t count, std::size_t length, std::size_t shots, unsigned seed = 1)
{
    std::mt19937_64 rng(seed);
    std::geometric_distribution<std::size_t> pick(8.0 / static_cast<double>(shots));
    std::uniform_int_distribution<int> action(0, 9);
    std::vector<Session> out;
    for (std::size_t s = 0; s < count; ++s) {
        Session session{"s" + std::to_string(s), "u" + std::to_string(s % 24), {}};
        for (std::size_t i = 0; i < length; ++i) {
            ActionEvent ev;
            ev.event_id = session.session_id + "-" + std::to_string(i);
            ev.session_id = session.session_id;
            ev.user_id = session.user_id;
            ev.timestamp_ms = static_cast<std::int64_t>(i) * 1000;
            const int a = action(rng);
            if (i == 0 || a == 0) {
                ev.action = ActionType::Query;
                ev.target = "query " + std::to_string(pick(rng) % 40);
            } else {
                ev.action = a < 4 ? ActionType::Play : (a < 7 ? ActionType::Tooltip : ActionType::View);
                ev.target = "shot" + std::to_string(pick(rng) % shots);
                if (ev.action == ActionType::Play) ev.duration_ms = 6000;
            }
            session.events.push_back(std::move(ev));
        }
        out.push_back(std::move(session));
    }
    return out;
}

}  // namespace trailmine::bench
