#include "trailmine/event_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "trailmine/error.hpp"

namespace trailmine {

namespace {

[[noreturn]] void throw_io(const std::string& what, const std::filesystem::path& path)
{
    throw Error(what + " '" + path.string() + "': " + std::strerror(errno));
}

void write_all(int fd, std::string_view bytes, const std::filesystem::path& path)
{
    while (!bytes.empty()) {
        const auto n = ::write(fd, bytes.data(), bytes.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_io("write failed on", path);
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
}

}  // namespace

AppendOnlyFile::AppendOnlyFile(std::filesystem::path path) : path_(std::move(path))
{
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw_io("cannot open", path_);

    // Drop a torn trailing line (crash between write start and fsync).
    const auto content = read_all();
    if (!content.empty() && content.back() != '\n') {
        const auto keep = content.rfind('\n');
        const auto size = keep == std::string::npos ? 0 : keep + 1;
        if (::ftruncate(fd_, static_cast<off_t>(size)) != 0) throw_io("cannot truncate", path_);
        ::fsync(fd_);
    }
}

AppendOnlyFile::~AppendOnlyFile()
{
    if (fd_ >= 0) ::close(fd_);
}

void AppendOnlyFile::append(std::string_view lines)
{
    if (lines.empty()) return;
    write_all(fd_, lines, path_);
    if (::fsync(fd_) != 0) throw_io("fsync failed on", path_);
}

std::string AppendOnlyFile::read_all() const
{
    return read_file(path_);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw_io("cannot open", tmp);
    try {
        write_all(fd, bytes, tmp);
        if (::fsync(fd) != 0) throw_io("fsync failed on", tmp);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    std::filesystem::rename(tmp, path);
}

}  // namespace trailmine
