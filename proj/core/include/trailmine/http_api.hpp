#pragma once

#include <memory>
#include <string>

namespace trailmine {

class TrailService;

/// JSON-over-HTTP front end for a TrailService.
///
///   POST /api/events                 {"events": [ActionEvent, ...]} -> {"accepted", "duplicates"}
///   GET  /api/recommendations        ?session_id=S&k=N -> {"documents", "queries"}
///   GET  /api/search                 ?q=TEXT&k=N -> {"results"}
///   GET  /api/shots/{id}             ?radius=R -> {"shot", "neighbors"}
///   GET  /api/sessions/{id}/shown    -> {"shown"} (every past recommendation, in order)
///   GET  /api/graph/stats            -> GraphStats
///   POST /api/admin/snapshot         -> {"path", "node_count", "edge_count"}
///
/// Errors are {"error": message} with 400 (bad input, adds "event_id" when an
/// event is at fault) or 404 (unknown shot).
class HttpServer {
public:
    explicit HttpServer(TrailService& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called. Requires a successful bind().
    bool run();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace trailmine
