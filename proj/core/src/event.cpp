#include "trailmine/event.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "trailmine/error.hpp"
#include "text_util.hpp"

namespace trailmine {

namespace {

constexpr std::array<std::string_view, 9> kActionNames = {
    "Query",  "MarkRelevant",    "MarkMaybeRelevant", "MarkNotRelevant", "View",
    "Play",   "BrowseKeyframes", "NavigateWithin",    "Tooltip",
};

using ordered_json = nlohmann::ordered_json;

std::int64_t require_int(const ordered_json& j, const char* field, std::size_t line)
{
    if (!j.is_number_integer()) {
        throw ParseError(line, std::string("field '") + field + "' must be an integer");
    }
    return j.get<std::int64_t>();
}

std::string require_string(const ordered_json& j, const char* field, std::size_t line)
{
    if (!j.is_string()) {
        throw ParseError(line, std::string("field '") + field + "' must be a string");
    }
    return j.get<std::string>();
}

}  // namespace

std::string_view to_string(ActionType action) noexcept
{
    return kActionNames[static_cast<std::size_t>(action)];
}

std::optional<ActionType> parse_action(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kActionNames.size(); ++i) {
        if (kActionNames[i] == name) {
            return static_cast<ActionType>(i);
        }
    }
    return std::nullopt;
}

void validate(const ActionEvent& event)
{
    if (event.event_id.empty()) {
        throw InvalidEvent(event.event_id, "empty event_id");
    }
    if (event.session_id.empty()) {
        throw InvalidEvent(event.event_id, "empty session_id");
    }
    if (event.user_id.empty()) {
        throw InvalidEvent(event.event_id, "empty user_id");
    }
    if (event.action == ActionType::Query) {
        if (detail::trim(event.target).empty()) {
            throw InvalidEvent(event.event_id, "Query with blank text");
        }
    } else if (event.target.empty()) {
        throw InvalidEvent(event.event_id, "missing shot id");
    }
    if (event.action == ActionType::Play) {
        if (!event.duration_ms) {
            throw InvalidEvent(event.event_id, "Play without duration_ms");
        }
        if (*event.duration_ms < 0) {
            throw InvalidEvent(event.event_id, "negative duration_ms");
        }
    } else if (event.duration_ms) {
        throw InvalidEvent(event.event_id,
                           std::string("duration_ms on non-Play action ") +
                               std::string(to_string(event.action)));
    }
}

std::string serialize_event(const ActionEvent& event)
{
    ordered_json j;
    j["event_id"] = event.event_id;
    j["session_id"] = event.session_id;
    j["user_id"] = event.user_id;
    j["timestamp_ms"] = event.timestamp_ms;
    j["action"] = std::string(to_string(event.action));
    j["target"] = event.target;
    if (event.duration_ms) {
        j["duration_ms"] = *event.duration_ms;
    }
    if (event.task_id) {
        j["task_id"] = *event.task_id;
    }
    return j.dump();
}

ActionEvent parse_event(std::string_view line, std::size_t line_number)
{
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line_number, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ParseError(line_number, "event is not a JSON object");
    }

    static const std::unordered_set<std::string> known = {
        "event_id", "session_id", "user_id", "timestamp_ms",
        "action",   "target",     "duration_ms", "task_id"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) {
            throw ParseError(line_number, "unknown field '" + key + "'");
        }
    }
    for (const char* field : {"event_id", "session_id", "user_id", "timestamp_ms", "action", "target"}) {
        if (!j.contains(field)) {
            throw ParseError(line_number, std::string("missing field '") + field + "'");
        }
    }

    ActionEvent ev;
    ev.event_id = require_string(j["event_id"], "event_id", line_number);
    ev.session_id = require_string(j["session_id"], "session_id", line_number);
    ev.user_id = require_string(j["user_id"], "user_id", line_number);
    ev.timestamp_ms = require_int(j["timestamp_ms"], "timestamp_ms", line_number);
    const auto action_name = require_string(j["action"], "action", line_number);
    const auto action = parse_action(action_name);
    if (!action) {
        throw ParseError(line_number, "unknown action '" + action_name + "'");
    }
    ev.action = *action;
    ev.target = require_string(j["target"], "target", line_number);
    if (j.contains("duration_ms") && !j["duration_ms"].is_null()) {
        ev.duration_ms = require_int(j["duration_ms"], "duration_ms", line_number);
    }
    if (j.contains("task_id") && !j["task_id"].is_null()) {
        ev.task_id = require_string(j["task_id"], "task_id", line_number);
    }

    try {
        validate(ev);
    } catch (const InvalidEvent& e) {
        throw ParseError(line_number, e.what());
    }
    return ev;
}

std::vector<ActionEvent> parse_event_log(std::string_view text)
{
    std::vector<ActionEvent> events;
    std::unordered_set<std::string> seen;
    std::size_t line_number = 0;
    detail::for_each_line(text, [&](std::string_view line) {
        ++line_number;
        if (detail::trim(line).empty()) {
            return;
        }
        auto ev = parse_event(line, line_number);
        if (!seen.insert(ev.event_id).second) {
            throw ParseError(line_number, "duplicate event_id '" + ev.event_id + "'");
        }
        events.push_back(std::move(ev));
    });
    return events;
}

std::string serialize_event_log(std::span<const ActionEvent> events)
{
    std::string out;
    for (const auto& ev : events) {
        out += serialize_event(ev);
        out += '\n';
    }
    return out;
}

std::vector<Session> sessionize(std::span<const ActionEvent> events, std::int64_t gap_ms)
{
    if (gap_ms <= 0) {
        throw Error("sessionize: gap_ms must be positive");
    }

    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < events.size(); ++i) {
        groups[{events[i].user_id, events[i].session_id}].push_back(i);
    }

    std::vector<Session> sessions;
    for (auto& [key, indices] : groups) {
        std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
            return events[a].timestamp_ms < events[b].timestamp_ms;
        });

        std::vector<std::vector<std::size_t>> parts(1);
        for (std::size_t k = 0; k < indices.size(); ++k) {
            if (k > 0 && events[indices[k]].timestamp_ms - events[indices[k - 1]].timestamp_ms > gap_ms) {
                parts.emplace_back();
            }
            parts.back().push_back(indices[k]);
        }

        for (std::size_t p = 0; p < parts.size(); ++p) {
            Session s;
            s.user_id = key.first;
            s.session_id = parts.size() == 1 ? key.second : key.second + "#" + std::to_string(p + 1);
            for (auto idx : parts[p]) {
                auto ev = events[idx];
                ev.session_id = s.session_id;
                s.events.push_back(std::move(ev));
            }
            sessions.push_back(std::move(s));
        }
    }

    std::stable_sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
        return std::tie(a.events.front().timestamp_ms, a.user_id, a.session_id) <
               std::tie(b.events.front().timestamp_ms, b.user_id, b.session_id);
    });
    return sessions;
}

}  // namespace trailmine
