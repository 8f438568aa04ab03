#include <charconv>
#include <cmath>

#include "trailmine/error.hpp"
#include "trailmine/event.hpp"
#include "text_util.hpp"

namespace trailmine {

namespace {

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

WeightTable WeightTable::defaults()
{
    WeightTable t;
    t.weights = {
        {ActionType::Query, 0.0},
        {ActionType::View, 1.0},
        {ActionType::Tooltip, 0.5},
        {ActionType::BrowseKeyframes, 0.5},
        {ActionType::NavigateWithin, 0.5},
        {ActionType::Play, 2.0},
        {ActionType::MarkMaybeRelevant, 2.0},
        {ActionType::MarkRelevant, 4.0},
        {ActionType::MarkNotRelevant, 0.5},
    };
    t.play_threshold_ms = 3000;
    return t;
}

double WeightTable::operator[](ActionType a) const
{
    auto it = weights.find(a);
    if (it == weights.end()) {
        throw Error("weight table has no entry for " + std::string(to_string(a)));
    }
    return it->second;
}

void validate(const WeightTable& table)
{
    for (auto a : kAllActions) {
        const double w = table[a];
        if (!std::isfinite(w) || w < 0.0) {
            throw Error("weight for " + std::string(to_string(a)) + " must be finite and >= 0");
        }
    }
    if (table[ActionType::Query] != 0.0) {
        throw Error("weight for Query must be 0");
    }
    if (table.play_threshold_ms < 0) {
        throw Error("play_threshold_ms must be >= 0");
    }
}

WeightTable parse_weight_table(std::string_view text)
{
    auto table = WeightTable::defaults();
    std::size_t line_number = 0;
    detail::for_each_line(text, [&](std::string_view raw) {
        ++line_number;
        auto line = raw.substr(0, raw.find('#'));
        line = detail::trim(line);
        if (line.empty()) {
            return;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(line_number, "expected 'key = value'");
        }
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));

        if (key == "play_threshold_ms") {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || p != value.data() + value.size()) {
                throw ParseError(line_number, "play_threshold_ms must be an integer");
            }
            table.play_threshold_ms = v;
            return;
        }
        const auto action = parse_action(key);
        if (!action) {
            throw ParseError(line_number, "unknown key '" + std::string(key) + "'");
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || p != value.data() + value.size()) {
            throw ParseError(line_number, "bad number '" + std::string(value) + "'");
        }
        table.weights[*action] = v;
    });
    validate(table);
    return table;
}

std::string serialize_weight_table(const WeightTable& table)
{
    std::string out = "# action = graph weight\n";
    for (auto a : kAllActions) {
        out += std::string(to_string(a)) + " = " + format_double(table[a]) + "\n";
    }
    out += "play_threshold_ms = " + std::to_string(table.play_threshold_ms) + "\n";
    return out;
}

double action_weight(ActionType action, std::optional<std::int64_t> duration_ms,
                     const WeightTable& table)
{
    if (action == ActionType::Play) {
        if (!duration_ms) {
            throw Error("action_weight: Play requires duration_ms");
        }
        if (*duration_ms <= table.play_threshold_ms) {
            return 0.0;
        }
    } else if (duration_ms) {
        throw Error("action_weight: duration_ms is only valid for Play");
    }
    return table[action];
}

}  // namespace trailmine
