#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "fixtures.hpp"
#include "trailmine/event_store.hpp"
#include "trailmine/http_api.hpp"
#include "trailmine/service.hpp"

using namespace trailmine;
using namespace trailmine::testing;
using json = nlohmann::json;

namespace {

class HttpApi : public ::testing::Test {
protected:
    void SetUp() override
    {
        write_file_atomic(dir_ / "corpus.jsonl", serialize_corpus(three_shot_corpus()));
        service_ = std::make_unique<TrailService>(ServiceConfig::for_data_dir(dir_.path()));
        server_ = std::make_unique<HttpServer>(*service_);
        port_ = server_->bind("127.0.0.1", 0);
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_->run(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        for (int i = 0; i < 200 && !server_->running(); ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    }

    void TearDown() override
    {
        server_->stop();
        if (thread_.joinable()) thread_.join();
    }

    static json events_body(const std::vector<ActionEvent>& events)
    {
        json list = json::array();
        for (const auto& e : events) list.push_back(json::parse(serialize_event(e)));
        return json{{"events", list}};
    }

    httplib::Result post_events(const std::vector<ActionEvent>& events)
    {
        return client_->Post("/api/events", events_body(events).dump(), "application/json");
    }

    TempDir dir_{"http"};
    std::unique_ptr<TrailService> service_;
    std::unique_ptr<HttpServer> server_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = -1;
};

}  // namespace

TEST_F(HttpApi, PostEventsAcceptsAndReportsDuplicates)
{
    auto res = post_events({basketball_fixture()[0]});
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body)["accepted"], 1);

    res = post_events(basketball_fixture());
    ASSERT_TRUE(res);
    const auto body = json::parse(res->body);
    EXPECT_EQ(body["accepted"], 3);
    EXPECT_EQ(body["duplicates"], 1);
}

TEST_F(HttpApi, InvalidEventNamesTheEvent)
{
    auto bad = json::parse(serialize_event(basketball_fixture()[2]));
    bad.erase("duration_ms");
    auto res = client_->Post("/api/events", json{{"events", {bad}}}.dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
    EXPECT_EQ(json::parse(res->body)["event_id"], "s1-e3");

    auto mixed = basketball_fixture();
    mixed[1].session_id = "s9";
    res = post_events(mixed);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);

    res = client_->Post("/api/events", "{not json", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
    EXPECT_TRUE(service_->graph()->empty());
}

TEST_F(HttpApi, RecommendationsAndShownHistory)
{
    ASSERT_TRUE(post_events(basketball_fixture("s1")));
    auto res = client_->Get("/api/recommendations?session_id=nobody&k=5");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_TRUE(json::parse(res->body)["documents"].empty());

    ASSERT_TRUE(post_events({make_event("n1", "s2", ActionType::Query, "basketball", 5)}));
    res = client_->Get("/api/recommendations?session_id=s2&k=5");
    ASSERT_TRUE(res);
    const auto body = json::parse(res->body);
    ASSERT_EQ(body["documents"].size(), 1u);
    EXPECT_EQ(body["documents"][0]["node_id"], "d:shotA");
    EXPECT_EQ(body["documents"][0]["shot_id"], "shotA");

    res = client_->Get("/api/sessions/s2/shown");
    ASSERT_TRUE(res);
    EXPECT_EQ(json::parse(res->body)["shown"], json::array({"d:shotA"}));

    res = client_->Get("/api/recommendations?session_id=s2&k=0");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
    res = client_->Get("/api/recommendations?k=3");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
}

TEST_F(HttpApi, SearchAndShotContext)
{
    auto res = client_->Get("/api/search?q=car&k=5");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    const auto results = json::parse(res->body)["results"];
    ASSERT_EQ(results.size(), 2u);
    EXPECT_EQ(results[0]["shot_id"], "A");
    EXPECT_EQ(results[1]["shot_id"], "C");

    res = client_->Get("/api/search?q=%20%20");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);

    res = client_->Get("/api/shots/B?radius=1");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    const auto body = json::parse(res->body);
    EXPECT_EQ(body["shot"]["text"], "blue sky");
    ASSERT_EQ(body["neighbors"].size(), 2u);

    res = client_->Get("/api/shots/Z");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 404);
}

TEST_F(HttpApi, StatsAndSnapshot)
{
    ASSERT_TRUE(post_events(basketball_fixture()));
    auto res = client_->Get("/api/graph/stats");
    ASSERT_TRUE(res);
    auto body = json::parse(res->body);
    EXPECT_EQ(body["node_count"], 2);
    EXPECT_EQ(body["edge_count"], 1);
    EXPECT_DOUBLE_EQ(body["total_weight"].get<double>(), 7.0);

    res = client_->Post("/api/admin/snapshot", "", "application/json");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    body = json::parse(res->body);
    EXPECT_EQ(load_snapshot(read_file(body["path"].get<std::string>())), *service_->graph());
}
