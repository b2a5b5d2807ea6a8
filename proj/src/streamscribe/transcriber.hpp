#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "streamscribe/register.hpp"

namespace streamscribe {

struct Segment {
    double start_seconds = 0.0;
    double end_seconds = 0.0;
    std::string text;

    bool operator==(const Segment&) const = default;
};

struct Transcription {
    std::string text;
    std::vector<Segment> segments;
    double model_time_seconds = 0.0;
    // Reported by backends that run their own VAD pass.
    std::optional<double> vad_time_seconds;
};

class Transcriber {
public:
    virtual ~Transcriber() = default;

    // Transcribes the full snapshot window.
    virtual Transcription transcribe(const RegisterSnapshot& snapshot) = 0;

    // Opaque model options, forwarded with every subsequent request.
    virtual void set_backend_options(const nlohmann::json& /*options*/) {}
    virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend

struct TimelineEntry {
    double midpoint_seconds = 0.0;
    std::string word;
};

// Words pinned to stream time. A window "hears" every word whose midpoint
// lies in [start, end).
class ScriptedTimeline {
public:
    ScriptedTimeline() = default;
    // Throws Error(invalid_argument) unless midpoints are strictly increasing.
    explicit ScriptedTimeline(std::vector<TimelineEntry> entries);

    // Spreads the words of `text` evenly over [start, end): word i sits at
    // start + (i + 0.5) * (end - start) / n.
    static ScriptedTimeline spread(const std::string& text, double start_seconds, double end_seconds);
    static ScriptedTimeline from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    const std::vector<TimelineEntry>& entries() const noexcept { return entries_; }
    std::string text() const;

private:
    std::vector<TimelineEntry> entries_;
};

Transcription scripted_transcribe(const ScriptedTimeline& timeline, double start_seconds, double end_seconds);

class ScriptedTranscriber final : public Transcriber {
public:
    // `seconds_per_audio_second` adds a synthetic model cost proportional to
    // the snapshot length.
    explicit ScriptedTranscriber(ScriptedTimeline timeline, double seconds_per_audio_second = 0.0);

    Transcription transcribe(const RegisterSnapshot& snapshot) override;
    std::string name() const override { return "scripted"; }

    std::size_t calls() const noexcept { return calls_.load(); }

private:
    ScriptedTimeline timeline_;
    double seconds_per_audio_second_;
    std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------
// External backend: newline-delimited JSON over a child process's stdio.

struct TranscribeRequest {
    std::int64_t id = 0;
    int sample_rate = 16000;
    std::string audio_pcm16le;  // raw little-endian bytes; base64 on the wire
    std::optional<std::string> language;
    bool vad_enabled = true;
    nlohmann::json backend_options = nlohmann::json::object();

    std::string to_line() const;  // includes the trailing '\n'
    static TranscribeRequest from_line(const std::string& line);
};

// Parses one response line for request `expected_id`. Error lines raise
// Error(backend); malformed lines or id mismatches raise Error(backend_protocol).
Transcription parse_response_line(const std::string& line, std::int64_t expected_id);

struct BackendCommand {
    std::vector<std::string> argv;

    // Whitespace split; no shell quoting.
    static BackendCommand parse(const std::string& command_line);
};

class BackendClient {
public:
    // Spawns the backend and waits for the `{"ready":true,...}` handshake.
    // Throws Error(backend) when the executable cannot be started or the
    // handshake is missing or malformed.
    static std::unique_ptr<BackendClient> launch(const BackendCommand& command,
                                                 std::chrono::milliseconds handshake_timeout);
    ~BackendClient();

    BackendClient(const BackendClient&) = delete;
    BackendClient& operator=(const BackendClient&) = delete;

    const std::string& backend_name() const noexcept { return backend_name_; }

    // One request line out, one response line in. Serialized by an internal
    // lock, so at most one request is outstanding.
    Transcription transcribe(const TranscribeRequest& request, std::chrono::milliseconds timeout);

    bool alive();
    int pid() const noexcept { return pid_; }

private:
    BackendClient(int pid, int to_child, int from_child);
    std::optional<std::string> read_line(std::chrono::milliseconds timeout);
    void write_all(const std::string& data);

    int pid_;
    int to_child_;
    int from_child_;
    std::string buffer_;
    std::string backend_name_;
    bool desynced_ = false;  // a timed-out response may still arrive later
    std::mutex mutex_;
};

Transcription external_transcribe(BackendClient& client, const TranscribeRequest& request,
                                  std::chrono::milliseconds timeout = std::chrono::seconds(30));

struct ExternalTranscriberOptions {
    std::optional<std::string> language;
    bool vad_enabled = true;
    nlohmann::json backend_options = nlohmann::json::object();
    std::chrono::milliseconds timeout = std::chrono::seconds(30);
};

class ExternalTranscriber final : public Transcriber {
public:
    ExternalTranscriber(std::unique_ptr<BackendClient> client, ExternalTranscriberOptions options);

    Transcription transcribe(const RegisterSnapshot& snapshot) override;
    void set_backend_options(const nlohmann::json& options) override;
    std::string name() const override;

    BackendClient& client() noexcept { return *client_; }

private:
    std::unique_ptr<BackendClient> client_;
    ExternalTranscriberOptions options_;
    std::int64_t next_id_ = 1;
    std::mutex options_mutex_;
};

}  // namespace streamscribe
