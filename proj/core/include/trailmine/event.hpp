#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trailmine {

/// The closed set of interface actions a searcher can perform.
enum class ActionType : std::uint8_t {
    Query,
    MarkRelevant,
    MarkMaybeRelevant,
    MarkNotRelevant,
    View,
    Play,
    BrowseKeyframes,
    NavigateWithin,
    Tooltip,
};

inline constexpr std::array<ActionType, 9> kAllActions = {
    ActionType::Query,         ActionType::MarkRelevant,    ActionType::MarkMaybeRelevant,
    ActionType::MarkNotRelevant, ActionType::View,          ActionType::Play,
    ActionType::BrowseKeyframes, ActionType::NavigateWithin, ActionType::Tooltip,
};

std::string_view to_string(ActionType action) noexcept;

/// Parses an UpperCamelCase action name. Returns nullopt for unknown names.
std::optional<ActionType> parse_action(std::string_view name) noexcept;

inline bool is_mark(ActionType a) noexcept
{
    return a == ActionType::MarkRelevant || a == ActionType::MarkMaybeRelevant ||
           a == ActionType::MarkNotRelevant;
}

struct ActionEvent {
    std::string event_id;
    std::string session_id;
    std::string user_id;
    std::int64_t timestamp_ms = 0;
    ActionType action = ActionType::Query;
    // Query text for Query events, shot id otherwise.
    std::string target;
    std::optional<std::int64_t> duration_ms;
    std::optional<std::string> task_id;

    bool operator==(const ActionEvent&) const = default;
};

/// Throws InvalidEvent if `event` breaks an event invariant
/// (blank query text, empty shot id, duration present iff Play, negative duration).
void validate(const ActionEvent& event);

/// One JSON object, no trailing newline. Field order is fixed.
std::string serialize_event(const ActionEvent& event);
ActionEvent parse_event(std::string_view line, std::size_t line_number = 0);

/// Parses a JSON Lines event log. Blank lines are skipped; anything else that
/// is not a valid event raises ParseError naming the line. Duplicate
/// event_ids are rejected.
std::vector<ActionEvent> parse_event_log(std::string_view text);
std::string serialize_event_log(std::span<const ActionEvent> events);

struct Session {
    std::string session_id;
    std::string user_id;
    std::vector<ActionEvent> events;

    bool operator==(const Session&) const = default;
};

inline constexpr std::int64_t kDefaultSessionGapMs = 30 * 60 * 1000;

/// Groups events by (user_id, session_id), orders each group by timestamp
/// (ties keep input order) and splits groups at gaps larger than `gap_ms`.
/// Split groups become "<session_id>#1", "<session_id>#2", ... and their
/// events are relabelled accordingly. Sessions are returned ordered by
/// (first timestamp, user_id, session_id).
std::vector<Session> sessionize(std::span<const ActionEvent> events,
                                std::int64_t gap_ms = kDefaultSessionGapMs);

/// Per-action graph weights plus the minimum play duration that counts.
struct WeightTable {
    std::map<ActionType, double> weights;
    std::int64_t play_threshold_ms = 3000;

    static WeightTable defaults();

    double operator[](ActionType a) const;
    bool operator==(const WeightTable&) const = default;
};

/// Checks that every action has a finite non-negative weight and Query is 0.
void validate(const WeightTable& table);

/// `key = value` lines, `#` comments. Unlisted actions keep their default.
WeightTable parse_weight_table(std::string_view text);
std::string serialize_weight_table(const WeightTable& table);

/// Graph weight of a single action. Plays at or under the threshold weigh 0.
double action_weight(ActionType action, std::optional<std::int64_t> duration_ms,
                     const WeightTable& table);

}  // namespace trailmine
