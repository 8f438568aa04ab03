#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <json.hpp>

#include "trailmine/error.hpp"
#include "trailmine/trail_graph.hpp"
#include "text_util.hpp"

// Snapshot layout (all lines '\n'-terminated, fields tab-separated):
//
//   trailmine-graph 1
//   nodes <n>
//   Q|D <json string id>            x n, sorted by id
//   edges <m>
//   <json src> <json dst> <weight> <count>   x m, sorted by (src, dst)
//   checksum <fnv1a-64 hex of every preceding byte>
//
// Weights use the shortest round-trip decimal form.

namespace trailmine {

namespace {

constexpr std::string_view kMagic = "trailmine-graph";
constexpr int kVersion = 1;

std::uint64_t fnv1a(std::string_view bytes) noexcept
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string quote(const std::string& s)
{
    return nlohmann::json(s).dump();
}

std::string unquote(std::string_view field, std::size_t line)
{
    try {
        auto j = nlohmann::json::parse(field);
        if (j.is_string()) return j.get<std::string>();
    } catch (const nlohmann::json::parse_error&) {
    }
    throw ParseError(line, "bad quoted id");
}

template <class T>
T parse_number(std::string_view field, std::size_t line, const char* what)
{
    T v{};
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || p != field.data() + field.size()) {
        throw ParseError(line, std::string("bad ") + what);
    }
    return v;
}

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string snapshot(const TrailGraph& graph)
{
    std::string out;
    out += std::string(kMagic) + " " + std::to_string(kVersion) + "\n";

    const auto nodes = graph.sorted_nodes();
    out += "nodes " + std::to_string(nodes.size()) + "\n";
    for (const auto& n : nodes) {
        out += n.kind == NodeKind::Query ? "Q\t" : "D\t";
        out += quote(n.id);
        out += '\n';
    }

    const auto edges = graph.sorted_edges();
    out += "edges " + std::to_string(edges.size()) + "\n";
    char buf[64];
    for (const auto& e : edges) {
        out += quote(e.src);
        out += '\t';
        out += quote(e.dst);
        out += '\t';
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, e.weight);
        out.append(buf, p);
        out += '\t';
        out += std::to_string(e.count);
        out += '\n';
    }

    char sum[32];
    std::snprintf(sum, sizeof sum, "%016" PRIx64, fnv1a(out));
    out += "checksum ";
    out += sum;
    out += '\n';
    return out;
}

TrailGraph load_snapshot(std::string_view bytes)
{
    std::vector<std::string_view> lines;
    std::vector<std::size_t> offsets;
    {
        std::size_t start = 0;
        while (start < bytes.size()) {
            auto end = bytes.find('\n', start);
            if (end == std::string_view::npos) {
                throw ParseError(lines.size() + 1, "truncated snapshot (unterminated line)");
            }
            offsets.push_back(start);
            lines.push_back(bytes.substr(start, end - start));
            start = end + 1;
        }
    }
    if (lines.empty()) {
        throw ParseError(0, "empty snapshot");
    }

    const auto header = detail::split_ws(lines[0]);
    if (header.size() != 2 || header[0] != kMagic) {
        throw ParseError(1, "not a trail graph snapshot");
    }
    if (parse_number<int>(header[1], 1, "version") != kVersion) {
        throw ParseError(1, "unsupported snapshot version " + std::string(header[1]));
    }

    const auto& last = lines.back();
    if (!last.starts_with("checksum ")) {
        throw ParseError(lines.size(), "missing checksum trailer");
    }
    char expected[32];
    std::snprintf(expected, sizeof expected, "%016" PRIx64, fnv1a(bytes.substr(0, offsets.back())));
    if (last.substr(9) != expected) {
        throw ParseError(lines.size(), "checksum mismatch");
    }

    std::size_t ln = 1;
    auto expect_count = [&](std::string_view tag) {
        if (ln >= lines.size() - 1) throw ParseError(ln + 1, "missing '" + std::string(tag) + "' section");
        const auto parts = detail::split_ws(lines[ln]);
        if (parts.size() != 2 || parts[0] != tag) {
            throw ParseError(ln + 1, "expected '" + std::string(tag) + " <count>'");
        }
        auto n = parse_number<std::size_t>(parts[1], ln + 1, "count");
        ++ln;
        return n;
    };

    TrailGraph g;
    const auto n_nodes = expect_count("nodes");
    for (std::size_t i = 0; i < n_nodes; ++i, ++ln) {
        if (ln >= lines.size() - 1) throw ParseError(ln + 1, "truncated node table");
        const auto f = split_tabs(lines[ln]);
        if (f.size() != 2 || (f[0] != "Q" && f[0] != "D")) {
            throw ParseError(ln + 1, "bad node line");
        }
        const auto kind = f[0] == "Q" ? NodeKind::Query : NodeKind::Document;
        const auto id = unquote(f[1], ln + 1);
        if (g.contains(id)) throw ParseError(ln + 1, "duplicate node");
        try {
            g.add_node(id, kind);
        } catch (const Error& e) {
            throw ParseError(ln + 1, e.what());
        }
    }

    const auto n_edges = expect_count("edges");
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < n_edges; ++i, ++ln) {
        if (ln >= lines.size() - 1) throw ParseError(ln + 1, "truncated edge table");
        const auto f = split_tabs(lines[ln]);
        if (f.size() != 4) throw ParseError(ln + 1, "bad edge line");
        const auto src = unquote(f[0], ln + 1);
        const auto dst = unquote(f[1], ln + 1);
        const auto weight = parse_number<double>(f[2], ln + 1, "weight");
        const auto count = parse_number<std::uint64_t>(f[3], ln + 1, "count");
        if (!g.contains(src) || !g.contains(dst)) throw ParseError(ln + 1, "edge endpoint not in node table");
        if (count == 0) throw ParseError(ln + 1, "edge count must be >= 1");
        if (!seen.insert(src + '\n' + dst).second) throw ParseError(ln + 1, "duplicate edge");
        try {
            g.accumulate(src, dst, weight, count);
        } catch (const Error& e) {
            throw ParseError(ln + 1, e.what());
        }
    }
    if (ln != lines.size() - 1) {
        throw ParseError(ln + 1, "trailing data before checksum");
    }
    return g;
}

}  // namespace trailmine
