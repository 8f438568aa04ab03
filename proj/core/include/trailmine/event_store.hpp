#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trailmine/event.hpp"

namespace trailmine {

/// Append-only line file. Every append is written in one call and fsync'ed
/// before returning. Opening repairs a torn final line left by a crash.
class AppendOnlyFile {
public:
    explicit AppendOnlyFile(std::filesystem::path path);
    ~AppendOnlyFile();

    AppendOnlyFile(const AppendOnlyFile&) = delete;
    AppendOnlyFile& operator=(const AppendOnlyFile&) = delete;

    /// `lines` must be '\n'-terminated.
    void append(std::string_view lines);
    std::string read_all() const;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    int fd_ = -1;
};

/// JSON Lines event log: the durable source of truth for the trail graph.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path) : file_(std::move(path)) {}

    void append(std::span<const ActionEvent> events) { file_.append(serialize_event_log(events)); }
    std::vector<ActionEvent> read_all() const { return parse_event_log(file_.read_all()); }

    const std::filesystem::path& path() const noexcept { return file_.path(); }

private:
    AppendOnlyFile file_;
};

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace trailmine
