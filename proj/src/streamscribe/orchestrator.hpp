#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "streamscribe/register.hpp"
#include "streamscribe/text.hpp"
#include "streamscribe/transcriber.hpp"
#include "streamscribe/vad.hpp"

namespace streamscribe {

enum class EventStatus { text, silence, filtered, error };

const char* to_string(EventStatus status) noexcept;
std::optional<EventStatus> event_status_from_string(std::string_view s) noexcept;

struct TimingRecord {
    double pre_vad_seconds = 0.0;
    double vad_seconds = 0.0;
    double trx_seconds = 0.0;
    double suggestion_seconds = 0.0;
    double total_seconds = 0.0;

    bool operator==(const TimingRecord&) const = default;
};

struct TranscriptEvent {
    std::int64_t chunk_seq = 0;        // newest chunk covered by this event
    std::int64_t first_chunk_seq = 0;  // oldest newly covered chunk (catch-up spans several)
    EventStatus status = EventStatus::text;
    std::string suggestion;
    std::string full_trx;
    double window_start_seconds = 0.0;
    double window_end_seconds = 0.0;
    std::string error;
    TimingRecord timing;

    double window_seconds() const noexcept { return window_end_seconds - window_start_seconds; }
    bool operator==(const TranscriptEvent&) const = default;
};

struct SessionOptions {
    HallucinationConfig hallucination{};
    std::chrono::milliseconds poll_interval{100};
};

// One transcription session over a register. process_new_chunk is the
// single consumer step; SessionRunner drives it from its own thread.
class Session {
public:
    Session(ShiftingRegister& reg, std::shared_ptr<const VoiceDetector> vad, std::shared_ptr<Transcriber> transcriber,
            SessionOptions options = {});

    // Returns nullopt when no chunk arrived since the last call.
    std::optional<TranscriptEvent> process_new_chunk();

    // Takes effect from the next chunk.
    void set_voice_detector(std::shared_ptr<const VoiceDetector> vad);
    Transcriber& transcriber() noexcept { return *transcriber_; }
    ShiftingRegister& shifting_register() noexcept { return register_; }
    const SessionOptions& options() const noexcept { return options_; }

    std::string last_trx() const;
    std::int64_t last_processed_seq() const;
    std::vector<TranscriptEvent> events() const;

private:
    ShiftingRegister& register_;
    std::shared_ptr<const VoiceDetector> vad_;
    std::shared_ptr<Transcriber> transcriber_;
    SessionOptions options_;

    mutable std::mutex mutex_;
    std::string last_trx_;
    std::int64_t last_processed_seq_ = -1;
    std::vector<TranscriptEvent> events_;
};

// Space-join of every non-empty suggestion, in event order.
std::string assemble_transcript(const std::vector<TranscriptEvent>& events);

using EventCallback = std::function<void(const TranscriptEvent&)>;

// Polls the session until stopped. Also wakes on register appends, so the
// poll interval only bounds latency when wakeups are missed.
class SessionRunner {
public:
    SessionRunner(Session& session, EventCallback on_event);
    ~SessionRunner();

    SessionRunner(const SessionRunner&) = delete;
    SessionRunner& operator=(const SessionRunner&) = delete;

    void start();
    void stop();
    bool running() const noexcept { return running_.load(); }

    // Set when a backend failure made the session unusable.
    std::optional<std::string> fatal_error() const;

private:
    void loop();

    Session& session_;
    EventCallback on_event_;
    std::atomic<bool> running_{false};
    std::atomic<bool> stop_requested_{false};
    std::thread thread_;
    mutable std::mutex error_mutex_;
    std::optional<std::string> fatal_error_;
};

void run_session(Session& session, const std::atomic<bool>& stop, const EventCallback& on_event);

}  // namespace streamscribe
