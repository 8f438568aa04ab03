#include "trailmine/http_api.hpp"

#include <charconv>

#include <httplib.h>
#include <json.hpp>

#include "trailmine/error.hpp"
#include "trailmine/service.hpp"

namespace trailmine {

namespace {

using json = nlohmann::ordered_json;

void reply(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message)
{
    reply(res, status, json{{"error", message}});
}

std::optional<long long> int_param(const httplib::Request& req, const char* name)
{
    if (!req.has_param(name)) return std::nullopt;
    const auto v = req.get_param_value(name);
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw Error(std::string("parameter '") + name + "' must be an integer");
    }
    return out;
}

json shot_json(const ShotRecord& r)
{
    return json{{"shot_id", r.shot_id},
                {"video_id", r.video_id},
                {"seq_index", r.seq_index},
                {"text", r.text},
                {"keyframe_ref", r.keyframe_ref}};
}

json stats_json(const GraphStats& s)
{
    return json{{"node_count", s.node_count},
                {"query_node_count", s.query_node_count},
                {"document_node_count", s.document_node_count},
                {"edge_count", s.edge_count},
                {"total_weight", s.total_weight}};
}

// Runs a handler, mapping library errors onto HTTP statuses.
template <class Fn>
void guarded(httplib::Response& res, Fn&& fn)
{
    try {
        fn();
    } catch (const InvalidEvent& e) {
        reply(res, 400, json{{"error", e.what()}, {"event_id", e.event_id()}});
    } catch (const NotFound& e) {
        fail(res, 404, e.what());
    } catch (const Error& e) {
        fail(res, 400, e.what());
    } catch (const nlohmann::json::exception& e) {
        fail(res, 400, std::string("bad request body: ") + e.what());
    } catch (const std::exception& e) {
        fail(res, 500, e.what());
    }
}

}  // namespace

struct HttpServer::Impl {
    TrailService& service;
    httplib::Server server;

    explicit Impl(TrailService& s) : service(s) { routes(); }

    void routes()
    {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Post("/api/events", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto body = json::parse(req.body);
                const auto& list = body.is_array() ? body : body.at("events");
                if (!list.is_array()) throw Error("'events' must be an array");
                std::vector<ActionEvent> batch;
                for (const auto& item : list) {
                    try {
                        batch.push_back(parse_event(item.dump()));
                    } catch (const ParseError& e) {
                        const auto id = item.is_object() && item.contains("event_id") && item["event_id"].is_string()
                                            ? item["event_id"].get<std::string>()
                                            : std::string();
                        throw InvalidEvent(id, e.what());
                    }
                }
                const auto r = service.ingest(std::move(batch));
                reply(res, 200, json{{"accepted", r.accepted}, {"duplicates", r.duplicates}});
            });
        });

        server.Get("/api/recommendations", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                if (!req.has_param("session_id")) throw Error("missing session_id");
                const auto session_id = req.get_param_value("session_id");
                const auto k = int_param(req, "k").value_or(static_cast<long long>(service.config().rec_params.k));
                if (k < 1) throw Error("k must be >= 1");
                const auto recs = service.recommend(session_id, static_cast<std::size_t>(k));
                json docs = json::array();
                for (const auto& r : recs.documents) {
                    json d{{"node_id", r.node_id}, {"shot_id", std::string(strip_kind(r.node_id))}, {"score", r.score}};
                    if (const auto* shot = service.corpus().find(strip_kind(r.node_id))) {
                        d["text"] = shot->text;
                        d["keyframe_ref"] = shot->keyframe_ref;
                    }
                    docs.push_back(std::move(d));
                }
                json queries = json::array();
                for (const auto& r : recs.queries) {
                    queries.push_back(json{{"node_id", r.node_id}, {"query", std::string(strip_kind(r.node_id))}, {"score", r.score}});
                }
                reply(res, 200, json{{"session_id", session_id}, {"documents", docs}, {"queries", queries}});
            });
        });

        server.Get("/api/search", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto q = req.has_param("q") ? req.get_param_value("q") : std::string();
                const auto k = int_param(req, "k").value_or(20);
                if (k < 1) throw Error("k must be >= 1");
                json results = json::array();
                for (const auto& hit : service.search(q, static_cast<std::size_t>(k))) {
                    auto j = shot_json(service.corpus().at(hit.shot_id));
                    j["score"] = hit.score;
                    results.push_back(std::move(j));
                }
                reply(res, 200, json{{"query", q}, {"results", results}});
            });
        });

        server.Get(R"(/api/shots/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto id = req.matches[1].str();
                const auto radius = int_param(req, "radius").value_or(1);
                const auto& shot = service.corpus().at(id);
                json near = json::array();
                for (const auto& r : service.corpus().neighbors(id, radius)) near.push_back(shot_json(r));
                reply(res, 200, json{{"shot", shot_json(shot)}, {"neighbors", near}});
            });
        });

        server.Get(R"(/api/sessions/([^/]+)/shown)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto id = req.matches[1].str();
                json shown = json::array();
                if (const auto state = service.session_state(id)) {
                    for (const auto& n : state->shown_order) shown.push_back(n);
                }
                reply(res, 200, json{{"session_id", id}, {"shown", shown}});
            });
        });

        server.Get("/api/graph/stats", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { reply(res, 200, stats_json(service.stats())); });
        });

        server.Post("/api/admin/snapshot", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                const auto g = service.graph();
                const auto path = service.write_snapshot(*g);
                auto body = stats_json(g->stats());
                body["path"] = path.string();
                reply(res, 200, body);
            });
        });
    }
};

HttpServer::HttpServer(TrailService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer()
{
    stop();
}

int HttpServer::bind(const std::string& host, int port)
{
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::run()
{
    return impl_->server.listen_after_bind();
}

void HttpServer::stop()
{
    if (impl_) impl_->server.stop();
}

bool HttpServer::running() const
{
    return impl_->server.is_running();
}

}  // namespace trailmine
