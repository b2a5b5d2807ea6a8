#include "streamscribe/events.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <optional>

#include "httplib.h"

#include "streamscribe/error.hpp"

namespace streamscribe {

using nlohmann::json;

json event_to_json(const TranscriptEvent& e, const std::string& session_id) {
    json j;
    j["session"] = session_id;
    j["seq"] = e.chunk_seq;
    j["first_seq"] = e.first_chunk_seq;
    j["status"] = to_string(e.status);
    j["suggestion"] = e.suggestion;
    j["full_trx"] = e.full_trx;
    j["window"] = json::array({e.window_start_seconds, e.window_end_seconds});
    j["timing"] = {{"pre_vad", e.timing.pre_vad_seconds},
                   {"vad", e.timing.vad_seconds},
                   {"trx", e.timing.trx_seconds},
                   {"suggestion", e.timing.suggestion_seconds},
                   {"total", e.timing.total_seconds}};
    if (!e.error.empty()) j["error"] = e.error;
    return j;
}

TranscriptEvent event_from_json(const json& j) {
    try {
        TranscriptEvent e;
        e.chunk_seq = j.at("seq").get<std::int64_t>();
        e.first_chunk_seq = j.value("first_seq", e.chunk_seq);
        const auto status = event_status_from_string(j.at("status").get<std::string>());
        if (!status) throw Error(ErrorCode::invalid_argument, "unknown event status");
        e.status = *status;
        e.suggestion = j.value("suggestion", std::string());
        e.full_trx = j.value("full_trx", std::string());
        if (j.contains("window")) {
            e.window_start_seconds = j["window"].at(0).get<double>();
            e.window_end_seconds = j["window"].at(1).get<double>();
        }
        const auto& t = j.at("timing");
        e.timing.pre_vad_seconds = t.at("pre_vad").get<double>();
        e.timing.vad_seconds = t.at("vad").get<double>();
        e.timing.trx_seconds = t.at("trx").get<double>();
        e.timing.suggestion_seconds = t.at("suggestion").get<double>();
        e.timing.total_seconds = t.at("total").get<double>();
        e.error = j.value("error", std::string());
        return e;
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed event JSON: ") + ex.what());
    }
}

namespace {

std::pair<std::string, std::string> split_host_port(const std::string& target) {
    const auto colon = target.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == target.size()) {
        throw Error(ErrorCode::config, "line_stream target must be host:port, got '" + target + "'");
    }
    return {target.substr(0, colon), target.substr(colon + 1)};
}

class LineStreamTransport final : public EventTransport {
public:
    explicit LineStreamTransport(const std::string& target) {
        std::tie(host_, port_) = split_host_port(target);
    }
    ~LineStreamTransport() override { disconnect(); }

    bool send(const std::string& json_text) override {
        if (fd_ < 0 && !connect()) return false;
        const std::string line = json_text + "\n";
        std::size_t off = 0;
        while (off < line.size()) {
            const auto n = ::send(fd_, line.data() + off, line.size() - off, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                disconnect();
                return false;
            }
            off += static_cast<std::size_t>(n);
        }
        return true;
    }

private:
    bool connect() {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (::getaddrinfo(host_.c_str(), port_.c_str(), &hints, &res) != 0) return false;
        for (auto* ai = res; ai; ai = ai->ai_next) {
            const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
                fd_ = fd;
                break;
            }
            ::close(fd);
        }
        ::freeaddrinfo(res);
        return fd_ >= 0;
    }
    void disconnect() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

    std::string host_;
    std::string port_;
    int fd_ = -1;
};

class HttpPostTransport final : public EventTransport {
public:
    explicit HttpPostTransport(const std::string& url) {
        const auto scheme = url.find("://");
        if (scheme == std::string::npos) throw Error(ErrorCode::config, "http_post target must be a URL: " + url);
        const auto slash = url.find('/', scheme + 3);
        base_ = slash == std::string::npos ? url : url.substr(0, slash);
        path_ = slash == std::string::npos ? "/" : url.substr(slash);
        client_ = std::make_unique<httplib::Client>(base_);
        if (!client_->is_valid()) throw Error(ErrorCode::config, "unsupported http_post target: " + url);
        client_->set_connection_timeout(std::chrono::seconds(2));
        client_->set_read_timeout(std::chrono::seconds(5));
        client_->set_write_timeout(std::chrono::seconds(5));
    }

    bool send(const std::string& json_text) override {
        auto res = client_->Post(path_, json_text, "application/json");
        return res && res->status >= 200 && res->status < 300;
    }

private:
    std::string base_;
    std::string path_;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace

std::unique_ptr<EventTransport> make_transport(SinkKind kind, const std::string& target) {
    if (kind == SinkKind::line_stream) return std::make_unique<LineStreamTransport>(target);
    return std::make_unique<HttpPostTransport>(target);
}

EventSink::EventSink(std::unique_ptr<EventTransport> transport, std::size_t capacity)
    : transport_(std::move(transport)), capacity_(capacity), worker_([this] { loop(); }) {}

EventSink::~EventSink() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    worker_.join();
}

void EventSink::enqueue(std::string json_text) {
    {
        std::lock_guard lock(mutex_);
        ++stats_.enqueued;
        queue_.push_back(std::move(json_text));
        // The in-flight event counts against capacity and is the oldest.
        const std::size_t held = queue_.size() + (in_flight_ ? 1 : 0);
        if (held > capacity_ && !queue_.empty()) {
            if (in_flight_) {
                in_flight_ = false;  // abandon the retry; loop sees the flag
            } else {
                queue_.pop_front();
            }
            ++stats_.dropped_events;
        }
        stats_.pending = queue_.size() + (in_flight_ ? 1 : 0);
    }
    wake_.notify_all();
}

void EventSink::loop() {
    std::unique_lock lock(mutex_);
    std::optional<std::string> current;
    auto backoff = std::chrono::milliseconds(20);
    for (;;) {
        if (stopping_) return;
        if (current && !in_flight_) current.reset();  // dropped by enqueue()
        if (!current) {
            if (queue_.empty()) {
                drained_.notify_all();
                wake_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
                continue;
            }
            current = std::move(queue_.front());
            queue_.pop_front();
            in_flight_ = true;
        }
        const std::string payload = *current;
        lock.unlock();
        const bool ok = transport_->send(payload);
        lock.lock();
        if (ok) {
            if (in_flight_) {
                ++stats_.delivered;
                in_flight_ = false;
            }
            current.reset();
            backoff = std::chrono::milliseconds(20);
        } else {
            wake_.wait_for(lock, backoff, [&] { return stopping_; });
            backoff = std::min(backoff * 2, std::chrono::milliseconds(1000));
        }
        stats_.pending = queue_.size() + (in_flight_ ? 1 : 0);
    }
}

bool EventSink::flush(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    return drained_.wait_for(lock, timeout, [&] { return queue_.empty() && !in_flight_; });
}

SinkStats EventSink::stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
}

void deliver_event(EventSink& sink, const TranscriptEvent& event, const std::string& session_id) {
    sink.enqueue(event_to_json(event, session_id).dump());
}

}  // namespace streamscribe
