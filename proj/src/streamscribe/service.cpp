#include "streamscribe/service.hpp"

#include <cstdlib>
#include <random>

#include "httplib.h"

#include "streamscribe/error.hpp"

namespace streamscribe {

using nlohmann::json;

const char* to_string(SessionState state) noexcept {
    switch (state) {
        case SessionState::warmed: return "warmed";
        case SessionState::running: return "running";
        case SessionState::stopped: return "stopped";
        case SessionState::errored: return "errored";
    }
    return "errored";
}

const char* to_string(SessionCommand command) noexcept {
    switch (command) {
        case SessionCommand::start: return "start";
        case SessionCommand::stop: return "stop";
        case SessionCommand::fail: return "fail";
    }
    return "fail";
}

std::optional<SessionState> transition(SessionState from, SessionCommand command) noexcept {
    switch (from) {
        case SessionState::warmed:
            if (command == SessionCommand::start) return SessionState::running;
            if (command == SessionCommand::fail) return SessionState::errored;
            return std::nullopt;
        case SessionState::running:
            if (command == SessionCommand::stop) return SessionState::stopped;
            if (command == SessionCommand::fail) return SessionState::errored;
            return std::nullopt;
        case SessionState::stopped:
        case SessionState::errored:
            return std::nullopt;
    }
    return std::nullopt;
}

int port_from_environment() {
    if (const char* env = std::getenv("STREAMSCRIBE_PORT")) {
        char* end = nullptr;
        const long port = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && port >= 0 && port <= 65535) return static_cast<int>(port);
    }
    return 8080;
}

namespace {

ApiResponse error_response(int status, const std::string& message) {
    return {status, json{{"error", message}}};
}

int http_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::address_in_use:
        case ErrorCode::invalid_state: return 409;
        case ErrorCode::not_found: return 404;
        case ErrorCode::backend:
        case ErrorCode::backend_timeout:
        case ErrorCode::backend_protocol:
        case ErrorCode::backend_crashed: return 502;
        default: return 400;
    }
}

[[noreturn]] void bad_request(const std::string& message) { throw Error(ErrorCode::invalid_argument, message); }

const json& require_object(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_object()) bad_request(std::string("missing object '") + key + "'");
    return j[key];
}

template <typename T>
T read_field(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj[key].is_null()) return fallback;
    const auto& v = obj[key];
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) bad_request(std::string("'") + key + "' must be a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) bad_request(std::string("'") + key + "' must be a string");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) bad_request(std::string("'") + key + "' must be an integer");
    } else {
        if (!v.is_number()) bad_request(std::string("'") + key + "' must be a number");
    }
    return v.get<T>();
}

VadConfig parse_vad(const json& obj, VadConfig base) {
    base.frame_ms = read_field(obj, "frame_ms", base.frame_ms);
    base.energy_threshold = read_field(obj, "energy_threshold", base.energy_threshold);
    base.min_voiced_frames = read_field(obj, "min_voiced_frames", base.min_voiced_frames);
    base.validate();
    return base;
}

std::string session_id_of(const json& body) {
    if (!body.is_object() || !body.contains("session_id") || !body["session_id"].is_string()) {
        bad_request("missing 'session_id'");
    }
    return body["session_id"].get<std::string>();
}

struct TimingSummary {
    std::size_t count = 0;
    TimingRecord sum;
};

json timing_summary_json(const std::vector<TranscriptEvent>& events) {
    TimingSummary s;
    for (const auto& e : events) {
        if (e.status != EventStatus::text && e.status != EventStatus::filtered) continue;
        ++s.count;
        s.sum.pre_vad_seconds += e.timing.pre_vad_seconds;
        s.sum.vad_seconds += e.timing.vad_seconds;
        s.sum.trx_seconds += e.timing.trx_seconds;
        s.sum.suggestion_seconds += e.timing.suggestion_seconds;
        s.sum.total_seconds += e.timing.total_seconds;
    }
    const double n = s.count > 0 ? static_cast<double>(s.count) : 1.0;
    return {{"count", s.count},
            {"mean",
             {{"pre_vad", s.sum.pre_vad_seconds / n},
              {"vad", s.sum.vad_seconds / n},
              {"trx", s.sum.trx_seconds / n},
              {"suggestion", s.sum.suggestion_seconds / n},
              {"total", s.sum.total_seconds / n}}}};
}

json ingest_stats_json(const IngestStats& s) {
    return {{"packets_received", s.packets_received}, {"packets_lost", s.packets_lost},
            {"packets_malformed", s.packets_malformed}, {"packets_late", s.packets_late},
            {"chunks_appended", s.chunks_appended},     {"samples_received", s.samples_received},
            {"samples_zero_filled", s.samples_zero_filled}, {"samples_pending", s.samples_pending}};
}

}  // namespace

struct TranscriptionService::LiveSession {
    std::string id;
    std::mutex mutex;
    SessionState state = SessionState::warmed;
    std::string error;

    RegisterConfig register_config;
    VadConfig vad_config;

    // Declaration order fixes teardown order: the runner stops first, the
    // register goes last.
    std::unique_ptr<ShiftingRegister> reg;
    std::shared_ptr<Transcriber> transcriber;
    std::unique_ptr<Session> session;
    std::unique_ptr<EventSink> sink;
    std::unique_ptr<Ingest> ingest;
    std::unique_ptr<SessionRunner> runner;

    json final_stats;

    // Moves a running session with a dead backend into `errored`.
    void refresh_locked(std::chrono::milliseconds flush_timeout) {
        if (state == SessionState::running && runner) {
            if (auto fatal = runner->fatal_error()) {
                state = *transition(state, SessionCommand::fail);
                error = *fatal;
                if (ingest) ingest->stop();
                runner->stop();
                final_stats = stats_locked(flush_timeout);
                release_locked();
            }
        }
    }

    // Stopped and errored sessions keep only their summary; the backend
    // process and audio buffers go away.
    void release_locked() {
        runner.reset();
        ingest.reset();
        sink.reset();
        session.reset();
        transcriber.reset();
        reg.reset();
    }

    json stats_locked(std::chrono::milliseconds flush_timeout) {
        json stats;
        const auto events = session ? session->events() : std::vector<TranscriptEvent>{};
        std::size_t by_status[4] = {0, 0, 0, 0};
        for (const auto& e : events) ++by_status[static_cast<int>(e.status)];
        if (sink) sink->flush(flush_timeout);
        const auto sink_stats = sink ? sink->stats() : SinkStats{};
        const auto ingest_stats = ingest ? ingest->stats() : IngestStats{};
        stats["events"] = events.size();
        stats["text_events"] = by_status[static_cast<int>(EventStatus::text)];
        stats["silence_events"] = by_status[static_cast<int>(EventStatus::silence)];
        stats["filtered_events"] = by_status[static_cast<int>(EventStatus::filtered)];
        stats["error_events"] = by_status[static_cast<int>(EventStatus::error)];
        stats["chunks_appended"] = reg ? reg->appended_total() : 0;
        stats["chunks_processed"] = session ? session->last_processed_seq() + 1 : 0;
        stats["ingest"] = ingest_stats_json(ingest_stats);
        stats["sink"] = {{"delivered", sink_stats.delivered},
                         {"dropped_events", sink_stats.dropped_events},
                         {"pending", sink_stats.pending}};
        stats["timing"] = timing_summary_json(events);
        stats["transcript"] = assemble_transcript(events);
        return stats;
    }

    json descriptor_locked() const {
        json j{{"session_id", id}, {"state", to_string(state)}};
        if (!error.empty()) j["error"] = error;
        return j;
    }
};

TranscriptionService::TranscriptionService(ServiceOptions options) : options_(std::move(options)) {}

TranscriptionService::~TranscriptionService() {
    shutdown();
    std::map<std::string, std::shared_ptr<LiveSession>> sessions;
    {
        std::lock_guard lock(mutex_);
        sessions.swap(sessions_);
    }
    for (auto& [id, s] : sessions) {
        std::lock_guard lock(s->mutex);
        if (s->runner) s->runner->stop();
        if (s->ingest) s->ingest->stop();
    }
}

std::string TranscriptionService::new_session_id() {
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(m);
    static constexpr char hex[] = "0123456789abcdef";
    std::string id;
    auto bits = rng();
    for (int i = 0; i < 16; ++i, bits >>= 4) id += hex[bits & 0xf];
    return id;
}

std::shared_ptr<TranscriptionService::LiveSession> TranscriptionService::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::size_t TranscriptionService::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

ApiResponse TranscriptionService::handle_warmup(const json& body) {
    try {
        if (!body.is_object()) bad_request("body must be a JSON object");
        auto live = std::make_shared<LiveSession>();
        live->id = new_session_id();

        // input
        const auto& input = require_object(body, "input");
        IngestConfig ingest;
        const auto mode = read_field<std::string>(input, "mode", "");
        if (mode == "rtp") {
            ingest.mode = IngestMode::rtp;
            if (input.contains("replay_path")) bad_request("rtp input cannot also carry replay_path");
            ingest.rtp_host = read_field<std::string>(input, "rtp_host", ingest.rtp_host);
            const int port = read_field(input, "rtp_port", 0);
            if (port < 0 || port > 65535) bad_request("rtp_port out of range");
            ingest.rtp_port = static_cast<std::uint16_t>(port);
        } else if (mode == "file_replay") {
            ingest.mode = IngestMode::file_replay;
            if (input.contains("rtp_port")) bad_request("file_replay input cannot also carry rtp_port");
            ingest.replay_path = read_field<std::string>(input, "replay_path", "");
            if (ingest.replay_path.empty()) bad_request("file_replay requires replay_path");
            const auto pacing = read_field<std::string>(input, "replay_pacing", "unpaced");
            if (pacing == "realtime") {
                ingest.replay_pacing = ReplayPacing::realtime;
            } else if (pacing == "unpaced") {
                ingest.replay_pacing = ReplayPacing::unpaced;
            } else {
                bad_request("replay_pacing must be realtime or unpaced");
            }
        } else {
            bad_request("input.mode must be rtp or file_replay");
        }
        const auto codec = read_field<std::string>(input, "codec", "L16");
        if (codec != "L16") bad_request("only the L16 codec is supported");
        if (read_field(input, "channels", 1) != 1) bad_request("only mono input is supported");
        ingest.sample_rate = read_field(input, "sample_rate", 16000);
        if (ingest.sample_rate != 8000 && ingest.sample_rate != 16000 && ingest.sample_rate != 48000) {
            bad_request("sample_rate must be one of 8000, 16000, 48000");
        }

        // register
        const auto& reg = require_object(body, "register");
        live->register_config.chunk_seconds = read_field(reg, "chunk_seconds", 4.0);
        live->register_config.chunk_count = read_field(reg, "chunk_count", 5);
        live->register_config.sample_rate = ingest.sample_rate;
        live->register_config.validate();

        // vad and session options
        live->vad_config = parse_vad(body.value("vad", json::object()), VadConfig{});
        SessionOptions session_options;
        if (body.contains("hallucination")) {
            const auto& h = body["hallucination"];
            session_options.hallucination.max_ngram = read_field(h, "max_ngram", 4);
            session_options.hallucination.repeat_threshold = read_field(h, "repeat_threshold", 5);
            session_options.hallucination.validate();
        }
        const int poll_ms = read_field(body, "poll_interval_ms", 100);
        if (poll_ms <= 0) bad_request("poll_interval_ms must be positive");
        session_options.poll_interval = std::chrono::milliseconds(poll_ms);

        // output
        const auto& output = require_object(body, "output");
        const auto kind = read_field<std::string>(output, "kind", "");
        const auto target = read_field<std::string>(output, "target", "");
        if (target.empty()) bad_request("output.target is required");
        SinkKind sink_kind;
        if (kind == "http_post") {
            sink_kind = SinkKind::http_post;
        } else if (kind == "line_stream") {
            sink_kind = SinkKind::line_stream;
        } else {
            bad_request("output.kind must be http_post or line_stream");
        }
        auto transport = make_transport(sink_kind, target);

        // transcriber (validated before any resource is acquired)
        const auto& trx = require_object(body, "transcriber");
        const auto backend = read_field<std::string>(trx, "backend", "");
        std::optional<ScriptedTimeline> timeline;
        if (backend == "scripted") {
            if (trx.contains("timeline")) {
                timeline = ScriptedTimeline::from_json(trx["timeline"]);
            } else {
                const auto text = read_field<std::string>(trx, "script_text", "");
                const double start = read_field(trx, "script_start", 0.0);
                const double end = read_field(trx, "script_end", 0.0);
                if (!(end > start)) bad_request("scripted backend needs timeline or script_text with script_end > script_start");
                timeline = ScriptedTimeline::spread(text, start, end);
            }
        } else if (backend != "external") {
            bad_request("transcriber.backend must be scripted or external");
        }

        // Acquire resources. Any throw below unwinds them again.
        live->reg = std::make_unique<ShiftingRegister>(live->register_config);
        live->ingest = Ingest::open(ingest, *live->reg);

        if (timeline) {
            live->transcriber = std::make_shared<ScriptedTranscriber>(
                std::move(*timeline), read_field(trx, "seconds_per_audio_second", 0.0));
        } else {
            BackendCommand command;
            if (trx.contains("backend_command") && trx["backend_command"].is_array()) {
                for (const auto& a : trx["backend_command"]) {
                    if (!a.is_string()) bad_request("backend_command entries must be strings");
                    command.argv.push_back(a.get<std::string>());
                }
            } else {
                command = BackendCommand::parse(read_field<std::string>(trx, "backend_command", ""));
            }
            if (command.argv.empty()) bad_request("external backend requires backend_command");
            ExternalTranscriberOptions ext;
            if (trx.contains("language") && !trx["language"].is_null()) ext.language = read_field<std::string>(trx, "language", "");
            ext.vad_enabled = read_field(trx, "vad_enabled", true);
            ext.backend_options = trx.value("backend_options", json::object());
            if (!ext.backend_options.is_object()) bad_request("backend_options must be an object");
            ext.timeout = std::chrono::milliseconds(read_field(trx, "timeout_ms", 30000));
            auto client = BackendClient::launch(command, options_.backend_handshake_timeout);
            live->transcriber = std::make_shared<ExternalTranscriber>(std::move(client), std::move(ext));
        }

        live->session = std::make_unique<Session>(*live->reg, std::make_shared<EnergyVad>(live->vad_config),
                                                  live->transcriber, session_options);
        live->sink = std::make_unique<EventSink>(std::move(transport));

        json descriptor = live->descriptor_locked();
        if (ingest.mode == IngestMode::rtp) descriptor["rtp_port"] = live->ingest->bound_port();
        {
            std::lock_guard lock(mutex_);
            sessions_[live->id] = live;
        }
        return {200, descriptor};
    } catch (const Error& e) {
        return error_response(http_status_for(e.code()), e.what());
    } catch (const json::exception& e) {
        return error_response(400, e.what());
    }
}

ApiResponse TranscriptionService::handle_start(const json& body) {
    try {
        auto live = find(session_id_of(body));
        if (!live) return error_response(404, "unknown session");
        std::lock_guard lock(live->mutex);
        live->refresh_locked(options_.sink_flush_timeout);
        const auto next = transition(live->state, SessionCommand::start);
        if (!next) return error_response(409, std::string("cannot start a session in state ") + to_string(live->state));
        const std::string id = live->id;
        EventSink* sink = live->sink.get();
        live->runner = std::make_unique<SessionRunner>(
            *live->session, [sink, id](const TranscriptEvent& e) { deliver_event(*sink, e, id); });
        live->runner->start();
        live->ingest->start();
        live->state = *next;
        return {200, live->descriptor_locked()};
    } catch (const Error& e) {
        return error_response(http_status_for(e.code()), e.what());
    }
}

ApiResponse TranscriptionService::handle_stop(const json& body) {
    try {
        auto live = find(session_id_of(body));
        if (!live) return error_response(404, "unknown session");
        std::lock_guard lock(live->mutex);
        live->refresh_locked(options_.sink_flush_timeout);
        const auto next = transition(live->state, SessionCommand::stop);
        if (!next) return error_response(409, std::string("cannot stop a session in state ") + to_string(live->state));
        live->ingest->stop();
        live->runner->stop();
        live->state = *next;
        live->final_stats = live->stats_locked(options_.sink_flush_timeout);
        live->release_locked();
        auto out = live->descriptor_locked();
        out["stats"] = live->final_stats;
        return {200, out};
    } catch (const Error& e) {
        return error_response(http_status_for(e.code()), e.what());
    }
}

ApiResponse TranscriptionService::handle_config(const json& body) {
    try {
        auto live = find(session_id_of(body));
        if (!live) return error_response(404, "unknown session");
        std::lock_guard lock(live->mutex);
        live->refresh_locked(options_.sink_flush_timeout);
        if (live->state == SessionState::stopped || live->state == SessionState::errored) {
            return error_response(409, std::string("cannot configure a session in state ") + to_string(live->state));
        }
        if (body.contains("register")) {
            const auto& reg = body["register"];
            if (!reg.is_object()) bad_request("register must be an object");
            const bool seconds_changed = reg.contains("chunk_seconds") &&
                                         reg["chunk_seconds"].get<double>() != live->register_config.chunk_seconds;
            const bool count_changed =
                reg.contains("chunk_count") && reg["chunk_count"].get<int>() != live->register_config.chunk_count;
            if (seconds_changed || count_changed) {
                return error_response(409, "register geometry is fixed after warmup");
            }
        }
        if (body.contains("vad")) {
            if (!body["vad"].is_object()) bad_request("vad must be an object");
            const auto updated = parse_vad(body["vad"], live->vad_config);
            live->vad_config = updated;
            live->session->set_voice_detector(std::make_shared<EnergyVad>(updated));
        }
        if (body.contains("transcriber")) {
            const auto& trx = body["transcriber"];
            if (trx.contains("backend_options")) {
                if (!trx["backend_options"].is_object()) bad_request("backend_options must be an object");
                live->transcriber->set_backend_options(trx["backend_options"]);
            }
        }
        auto out = live->descriptor_locked();
        out["vad"] = {{"frame_ms", live->vad_config.frame_ms},
                      {"energy_threshold", live->vad_config.energy_threshold},
                      {"min_voiced_frames", live->vad_config.min_voiced_frames}};
        return {200, out};
    } catch (const Error& e) {
        return error_response(http_status_for(e.code()), e.what());
    } catch (const json::exception& e) {
        return error_response(400, e.what());
    }
}

ApiResponse TranscriptionService::handle_status(const std::string& session_id) {
    auto live = find(session_id);
    if (!live) return error_response(404, "unknown session");
    std::lock_guard lock(live->mutex);
    live->refresh_locked(options_.sink_flush_timeout);
    auto out = live->descriptor_locked();
    if (live->session) {
        out["progress"] = {{"chunks_appended", live->reg->appended_total()},
                           {"last_processed_seq", live->session->last_processed_seq()},
                           {"ingest_finished", live->ingest->finished()},
                           {"events", live->session->events().size()}};
    }
    if (!live->final_stats.is_null()) out["stats"] = live->final_stats;
    return {200, out};
}

void TranscriptionService::install_routes() {
    auto& srv = *server_;
    const auto reply = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    const auto post = [this, reply](const char* path, ApiResponse (TranscriptionService::*handler)(const json&)) {
        server_->Post(path, [this, reply, handler](const httplib::Request& req, httplib::Response& res) {
            json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded()) return reply(res, error_response(400, "request body is not valid JSON"));
            if (req.has_param("session_id") && body.is_object() && !body.contains("session_id")) {
                body["session_id"] = req.get_param_value("session_id");
            }
            reply(res, (this->*handler)(body));
        });
    };
    post("/warmup", &TranscriptionService::handle_warmup);
    post("/start", &TranscriptionService::handle_start);
    post("/stop", &TranscriptionService::handle_stop);
    post("/config", &TranscriptionService::handle_config);
    srv.Get("/status", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, handle_status(req.get_param_value("session_id")));
    });
    srv.Get("/health", [reply](const httplib::Request&, httplib::Response& res) {
        reply(res, {200, json{{"ok", true}}});
    });
}

int TranscriptionService::start_background() {
    if (server_) throw Error(ErrorCode::invalid_state, "service already listening");
    server_ = std::make_unique<httplib::Server>();
    // The library default adds SO_REUSEPORT, which would let a second
    // service share the port instead of failing.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    install_routes();
    int port = options_.port;
    if (port == 0) {
        port = server_->bind_to_any_port(options_.host);
    } else if (!server_->bind_to_port(options_.host, port)) {
        port = -1;
    }
    if (port < 0) {
        server_.reset();
        throw Error(ErrorCode::address_in_use, "cannot listen on " + options_.host + ":" + std::to_string(options_.port));
    }
    server_thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void TranscriptionService::serve() {
    start_background();
    server_thread_.join();
}

void TranscriptionService::shutdown() {
    if (server_) server_->stop();
    if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace streamscribe
