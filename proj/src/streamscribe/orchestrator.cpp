#include "streamscribe/orchestrator.hpp"

#include "streamscribe/error.hpp"

namespace streamscribe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

}  // namespace

const char* to_string(EventStatus status) noexcept {
    switch (status) {
        case EventStatus::text: return "text";
        case EventStatus::silence: return "silence";
        case EventStatus::filtered: return "filtered";
        case EventStatus::error: return "error";
    }
    return "error";
}

std::optional<EventStatus> event_status_from_string(std::string_view s) noexcept {
    if (s == "text") return EventStatus::text;
    if (s == "silence") return EventStatus::silence;
    if (s == "filtered") return EventStatus::filtered;
    if (s == "error") return EventStatus::error;
    return std::nullopt;
}

Session::Session(ShiftingRegister& reg, std::shared_ptr<const VoiceDetector> vad,
                 std::shared_ptr<Transcriber> transcriber, SessionOptions options)
    : register_(reg), vad_(std::move(vad)), transcriber_(std::move(transcriber)), options_(options) {
    options_.hallucination.validate();
}

std::optional<TranscriptEvent> Session::process_new_chunk() {
    const auto started = Clock::now();
    auto snapshot = register_.snapshot();

    std::shared_ptr<const VoiceDetector> vad;
    std::string previous;
    std::int64_t last_processed;
    {
        std::lock_guard lock(mutex_);
        vad = vad_;
        previous = last_trx_;
        last_processed = last_processed_seq_;
    }
    if (snapshot.last_seq <= last_processed) return std::nullopt;

    TranscriptEvent event;
    event.chunk_seq = snapshot.last_seq;
    event.first_chunk_seq = last_processed + 1;
    event.window_start_seconds = snapshot.start_seconds;
    event.window_end_seconds = snapshot.end_seconds;

    // Gate on the newly arrived audio only. During catch-up that is every
    // pending chunk still held by the register, not just the newest one.
    const auto pending = static_cast<std::size_t>(snapshot.last_seq - last_processed);
    auto t = Clock::now();
    const bool voiced = !snapshot.empty() && vad->has_voice(snapshot.tail(pending), snapshot.sample_rate);
    event.timing.pre_vad_seconds = seconds_since(t);

    std::string next_trx = previous;
    if (!voiced) {
        register_.flush_through(snapshot.last_seq);
        event.status = EventStatus::silence;
        event.window_start_seconds = event.window_end_seconds;
        next_trx.clear();
    } else {
        try {
            t = Clock::now();
            const auto trx = transcriber_->transcribe(snapshot);
            event.timing.trx_seconds = seconds_since(t);
            event.timing.vad_seconds = trx.vad_time_seconds.value_or(0.0);

            t = Clock::now();
            std::string text = trx.text;
            event.status = EventStatus::text;
            const auto verdict = detect_hallucination(text, options_.hallucination);
            if (verdict.detected) {
                text = verdict.filtered_text;
                event.status = EventStatus::filtered;
            }
            const auto suggestion = generate_suggestion(text, previous);
            event.timing.suggestion_seconds = seconds_since(t);

            event.suggestion = suggestion.text;
            event.full_trx = text;
            next_trx = std::move(text);
        } catch (const Error& e) {
            event.status = EventStatus::error;
            event.error = std::string(to_string(e.code())) + ": " + e.what();
        }
    }
    event.timing.total_seconds = seconds_since(started);

    {
        std::lock_guard lock(mutex_);
        last_trx_ = std::move(next_trx);
        last_processed_seq_ = snapshot.last_seq;
        events_.push_back(event);
    }
    register_.mark_consumed(snapshot.last_seq);
    return event;
}

void Session::set_voice_detector(std::shared_ptr<const VoiceDetector> vad) {
    std::lock_guard lock(mutex_);
    vad_ = std::move(vad);
}

std::string Session::last_trx() const {
    std::lock_guard lock(mutex_);
    return last_trx_;
}

std::int64_t Session::last_processed_seq() const {
    std::lock_guard lock(mutex_);
    return last_processed_seq_;
}

std::vector<TranscriptEvent> Session::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

std::string assemble_transcript(const std::vector<TranscriptEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        if (e.suggestion.empty()) continue;
        if (!out.empty()) out += ' ';
        out += e.suggestion;
    }
    return out;
}

namespace {

bool is_fatal(const TranscriptEvent& e) {
    return e.status == EventStatus::error && e.error.rfind(to_string(ErrorCode::backend_crashed), 0) == 0;
}

}  // namespace

void run_session(Session& session, const std::atomic<bool>& stop, const EventCallback& on_event) {
    auto& reg = session.shifting_register();
    while (!stop.load()) {
        const auto seen = reg.appended_total();
        while (!stop.load()) {
            auto event = session.process_new_chunk();
            if (!event) break;
            if (on_event) on_event(*event);
            if (is_fatal(*event)) return;
        }
        reg.wait_appended(seen, session.options().poll_interval);
    }
}

SessionRunner::SessionRunner(Session& session, EventCallback on_event)
    : session_(session), on_event_(std::move(on_event)) {}

SessionRunner::~SessionRunner() { stop(); }

void SessionRunner::start() {
    if (running_.exchange(true)) return;
    stop_requested_.store(false);
    thread_ = std::thread([this] {
        run_session(session_, stop_requested_, [this](const TranscriptEvent& e) {
            if (is_fatal(e)) {
                std::lock_guard lock(error_mutex_);
                fatal_error_ = e.error;
            }
            if (on_event_) on_event_(e);
        });
        running_.store(false);
    });
}

void SessionRunner::stop() {
    stop_requested_.store(true);
    if (thread_.joinable()) thread_.join();
    running_.store(false);
}

std::optional<std::string> SessionRunner::fatal_error() const {
    std::lock_guard lock(error_mutex_);
    return fatal_error_;
}

}  // namespace streamscribe
