#include "doctest.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <thread>

#include "httplib.h"
#include "streamscribe/error.hpp"
#include "streamscribe/events.hpp"
#include "line_server.hpp"
#include "test_util.hpp"

using namespace streamscribe;
using nlohmann::json;
using namespace std::chrono_literals;
using testutil::LineServer;

namespace {

class FakeTransport final : public EventTransport {
public:
    struct State {
        std::mutex m;
        std::condition_variable cv;
        std::vector<std::string> delivered;
        bool open = true;
        int failures_left = 0;
        int attempts = 0;
    };
    explicit FakeTransport(std::shared_ptr<State> s) : s_(std::move(s)) {}

    bool send(const std::string& text) override {
        std::unique_lock lock(s_->m);
        ++s_->attempts;
        s_->cv.wait(lock, [&] { return s_->open; });
        if (s_->failures_left > 0) {
            --s_->failures_left;
            return false;
        }
        s_->delivered.push_back(text);
        return true;
    }

private:
    std::shared_ptr<State> s_;
};

TranscriptEvent sample_event(std::int64_t seq) {
    TranscriptEvent e;
    e.chunk_seq = seq;
    e.first_chunk_seq = seq - 1;
    e.status = EventStatus::filtered;
    e.suggestion = "héllo \"world\"";
    e.full_trx = "x héllo \"world\"";
    e.window_start_seconds = 4;
    e.window_end_seconds = 20;
    e.timing = {0.001, 0.002, 0.5, 0.0001, 0.51};
    return e;
}

}  // namespace

TEST_CASE("event json schema and round trip") {
    const auto e = sample_event(7);
    const auto j = event_to_json(e, "abc");
    CHECK(j["session"] == "abc");
    CHECK(j["seq"] == 7);
    CHECK(j["status"] == "filtered");
    CHECK(j["window"] == json::array({4.0, 20.0}));
    for (const char* k : {"pre_vad", "vad", "trx", "suggestion", "total"}) CHECK(j["timing"].contains(k));
    CHECK_FALSE(j.contains("error"));
    CHECK(event_from_json(json::parse(j.dump())) == e);

    auto err = e;
    err.status = EventStatus::error;
    err.error = "backend: boom";
    CHECK(event_to_json(err, "s")["error"] == "backend: boom");
    CHECK(event_from_json(event_to_json(err, "s")) == err);
    CHECK_THROWS_AS(event_from_json(json{{"seq", 1}}), Error);
    CHECK_THROWS_AS(event_from_json(json::parse(R"({"seq":1,"status":"nope","timing":{}})")), Error);
}

TEST_CASE("sink delivers in order") {
    auto state = std::make_shared<FakeTransport::State>();
    EventSink sink(std::make_unique<FakeTransport>(state));
    for (int i = 0; i < 500; ++i) sink.enqueue(std::to_string(i));
    REQUIRE(sink.flush(5s));
    std::lock_guard lock(state->m);
    REQUIRE(state->delivered.size() == 500);
    for (int i = 0; i < 500; ++i) CHECK(state->delivered[i] == std::to_string(i));
    CHECK(sink.stats().delivered == 500);
    CHECK(sink.stats().dropped_events == 0);
}

TEST_CASE("sink retries failed sends") {
    auto state = std::make_shared<FakeTransport::State>();
    state->failures_left = 3;
    EventSink sink(std::make_unique<FakeTransport>(state));
    sink.enqueue("a");
    sink.enqueue("b");
    REQUIRE(sink.flush(5s));
    std::lock_guard lock(state->m);
    CHECK(state->delivered == std::vector<std::string>{"a", "b"});
    CHECK(state->attempts == 5);
}

TEST_CASE("a stalled destination drops the oldest events beyond capacity") {
    auto state = std::make_shared<FakeTransport::State>();
    state->open = false;
    EventSink sink(std::make_unique<FakeTransport>(state), 10);
    sink.enqueue("0");
    REQUIRE(testutil::eventually([&] {
        std::lock_guard lock(state->m);
        return state->attempts == 1;
    }));
    for (int i = 1; i < 25; ++i) sink.enqueue(std::to_string(i));
    const auto st = sink.stats();
    CHECK(st.enqueued == 25);
    CHECK(st.dropped_events == 15);
    CHECK(st.pending == 10);
    {
        std::lock_guard lock(state->m);
        state->open = true;
    }
    state->cv.notify_all();
    REQUIRE(sink.flush(5s));
    std::lock_guard lock(state->m);
    // "0" was in flight when it became the oldest; it may or may not land.
    std::vector<std::string> tail(state->delivered.end() - 10, state->delivered.end());
    std::vector<std::string> expected;
    for (int i = 15; i < 25; ++i) expected.push_back(std::to_string(i));
    CHECK(tail == expected);
    CHECK(sink.stats().delivered == 10);
}

TEST_CASE("line stream transport over TCP") {
    LineServer server;
    EventSink sink(make_transport(SinkKind::line_stream, "127.0.0.1:" + std::to_string(server.port())));
    for (int i = 0; i < 100; ++i) deliver_event(sink, sample_event(i), "s1");
    REQUIRE(sink.flush(5s));
    REQUIRE(testutil::eventually([&] { return server.lines().size() == 100; }));
    const auto lines = server.lines();
    for (int i = 0; i < 100; ++i) CHECK(json::parse(lines[i])["seq"] == i);
}

TEST_CASE("http post transport") {
    httplib::Server srv;
    std::mutex m;
    std::vector<std::string> bodies;
    srv.Post("/events", [&](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(m);
        bodies.push_back(req.body);
        res.status = 204;
    });
    const int port = srv.bind_to_any_port("127.0.0.1");
    std::thread t([&] { srv.listen_after_bind(); });
    {
        EventSink sink(make_transport(SinkKind::http_post, "http://127.0.0.1:" + std::to_string(port) + "/events"));
        for (int i = 0; i < 20; ++i) deliver_event(sink, sample_event(i), "s2");
        REQUIRE(sink.flush(5s));
    }
    srv.stop();
    t.join();
    REQUIRE(bodies.size() == 20);
    CHECK(json::parse(bodies[19])["seq"] == 19);
}

TEST_CASE("unreachable destination never blocks the producer") {
    // Grab a port and close it again so nothing listens there.
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd, reinterpret_cast<sockaddr*>(&a), sizeof a);
    socklen_t len = sizeof a;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&a), &len);
    ::close(fd);
    EventSink sink(make_transport(SinkKind::line_stream, "127.0.0.1:" + std::to_string(ntohs(a.sin_port))), 50);
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 2000; ++i) deliver_event(sink, sample_event(i), "s");
    CHECK(std::chrono::steady_clock::now() - t0 < 2s);
    CHECK_FALSE(sink.flush(100ms));
    const auto st = sink.stats();
    CHECK(st.delivered == 0);
    CHECK(st.dropped_events == 2000 - 50);
}

TEST_CASE("transport target validation") {
    CHECK_THROWS_AS(make_transport(SinkKind::line_stream, "nohost"), Error);
    CHECK_THROWS_AS(make_transport(SinkKind::line_stream, ":80"), Error);
    CHECK_THROWS_AS(make_transport(SinkKind::http_post, "not a url"), Error);
}
