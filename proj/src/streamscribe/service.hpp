#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "json.hpp"

#include "streamscribe/events.hpp"
#include "streamscribe/ingest.hpp"
#include "streamscribe/orchestrator.hpp"

namespace httplib {
class Server;
}

namespace streamscribe {

enum class SessionState { warmed, running, stopped, errored };
enum class SessionCommand { start, stop, fail };

const char* to_string(SessionState state) noexcept;
const char* to_string(SessionCommand command) noexcept;

// Lifecycle: warmed -> running -> stopped; fail moves any live state to the
// terminal errored state. Undefined transitions yield nullopt.
std::optional<SessionState> transition(SessionState from, SessionCommand command) noexcept;

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

struct ServiceOptions {
    std::string host = "0.0.0.0";
    int port = 8080;
    std::chrono::milliseconds backend_handshake_timeout{10000};
    std::chrono::milliseconds sink_flush_timeout{3000};
};

// Port from STREAMSCRIBE_PORT, else 8080.
int port_from_environment();

// HTTP signaling surface. The handle_* members are the transport-free core
// of each endpoint; serve()/start_background() expose them over HTTP/1.1:
//   POST /warmup  POST /start  POST /stop  POST /config  GET /status  GET /health
class TranscriptionService {
public:
    explicit TranscriptionService(ServiceOptions options = {});
    ~TranscriptionService();

    TranscriptionService(const TranscriptionService&) = delete;
    TranscriptionService& operator=(const TranscriptionService&) = delete;

    ApiResponse handle_warmup(const nlohmann::json& body);
    ApiResponse handle_start(const nlohmann::json& body);
    ApiResponse handle_stop(const nlohmann::json& body);
    ApiResponse handle_config(const nlohmann::json& body);
    ApiResponse handle_status(const std::string& session_id);

    // Binds and serves on a background thread; returns the bound port
    // (useful with port 0). Throws Error(address_in_use) when binding fails.
    int start_background();
    // Binds and serves on the calling thread until shutdown().
    void serve();
    void shutdown();

    std::size_t session_count() const;

private:
    struct LiveSession;

    std::shared_ptr<LiveSession> find(const std::string& id) const;
    void install_routes();
    static std::string new_session_id();

    ServiceOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread server_thread_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
};

}  // namespace streamscribe
