#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "json.hpp"

#include "streamscribe/orchestrator.hpp"

namespace streamscribe {

// {"session":"...","seq":N,"first_seq":M,"status":"text|silence|filtered|error",
//  "suggestion":"...","full_trx":"...","window":[start,end],
//  "timing":{"pre_vad":x,"vad":x,"trx":x,"suggestion":x,"total":x}[,"error":"..."]}
nlohmann::json event_to_json(const TranscriptEvent& event, const std::string& session_id);
TranscriptEvent event_from_json(const nlohmann::json& j);

// Wire transport for one serialized event. send() returns false when the
// destination is unreachable; the caller retries.
class EventTransport {
public:
    virtual ~EventTransport() = default;
    virtual bool send(const std::string& json_text) = 0;
};

enum class SinkKind { http_post, line_stream };

// http_post: `target` is a URL such as http://host:port/path.
// line_stream: `target` is host:port of a TCP listener.
std::unique_ptr<EventTransport> make_transport(SinkKind kind, const std::string& target);

struct SinkStats {
    std::uint64_t enqueued = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped_events = 0;
    std::size_t pending = 0;
};

// Delivers events in order from its own thread. At most `capacity` events
// wait; beyond that the oldest queued event is dropped and counted.
class EventSink {
public:
    explicit EventSink(std::unique_ptr<EventTransport> transport, std::size_t capacity = 1000);
    ~EventSink();

    EventSink(const EventSink&) = delete;
    EventSink& operator=(const EventSink&) = delete;

    void enqueue(std::string json_text);
    // Waits until the queue drains or the timeout expires.
    bool flush(std::chrono::milliseconds timeout);
    SinkStats stats() const;

private:
    void loop();

    std::unique_ptr<EventTransport> transport_;
    const std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable drained_;
    std::deque<std::string> queue_;
    bool in_flight_ = false;
    bool stopping_ = false;
    SinkStats stats_;
    std::thread worker_;
};

void deliver_event(EventSink& sink, const TranscriptEvent& event, const std::string& session_id);

}  // namespace streamscribe
