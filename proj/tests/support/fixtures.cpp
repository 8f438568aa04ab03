#include "fixtures.hpp"

#include <atomic>
#include <random>
#include <unistd.h>

namespace trailmine::testing {

ActionEvent make_event(std::string id, std::string session, ActionType action, std::string target,
                       std::int64_t ts, std::optional<std::int64_t> duration)
{
    ActionEvent ev;
    ev.event_id = std::move(id);
    ev.session_id = std::move(session);
    ev.user_id = "u1";
    ev.timestamp_ms = ts;
    ev.action = action;
    ev.target = std::move(target);
    ev.duration_ms = duration;
    return ev;
}

std::vector<ActionEvent> basketball_fixture(const std::string& s)
{
    return {
        make_event(s + "-e1", s, ActionType::Query, "basketball", 1000),
        make_event(s + "-e2", s, ActionType::View, "shotA", 2000),
        make_event(s + "-e3", s, ActionType::Play, "shotA", 3000, 10000),
        make_event(s + "-e4", s, ActionType::MarkRelevant, "shotA", 14000),
    };
}

Corpus three_shot_corpus()
{
    return Corpus({
        {"A", "v1", 0, "red car", "kf/A.jpg"},
        {"B", "v1", 1, "blue sky", "kf/B.jpg"},
        {"C", "v1", 2, "green car", "kf/C.jpg"},
    });
}

TempDir::TempDir(const std::string& tag)
{
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("trailmine-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
             std::to_string(rd()));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir()
{
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace trailmine::testing
