#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trailmine/event.hpp"
#include "trailmine/retrieval.hpp"

namespace trailmine::testing {

/// [Query "basketball"; View shotA; Play shotA 10 s; MarkRelevant shotA]
std::vector<ActionEvent> basketball_fixture(const std::string& session_id = "s1");

/// {A: "red car", B: "blue sky", C: "green car"}, all in one video.
Corpus three_shot_corpus();

ActionEvent make_event(std::string id, std::string session, ActionType action, std::string target,
                       std::int64_t ts, std::optional<std::int64_t> duration = std::nullopt);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace trailmine::testing
