#include "streamscribe/transcriber.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <iterator>
#include <cerrno>
#include <cstring>
#include <sstream>
#include <thread>

#include "streamscribe/error.hpp"
#include "streamscribe/pcm.hpp"
#include "streamscribe/text.hpp"

namespace streamscribe {

using nlohmann::json;

ScriptedTimeline::ScriptedTimeline(std::vector<TimelineEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (!(entries_[i].midpoint_seconds > entries_[i - 1].midpoint_seconds)) {
            throw Error(ErrorCode::invalid_argument, "timeline midpoints must be strictly increasing");
        }
    }
}

ScriptedTimeline ScriptedTimeline::spread(const std::string& text, double start_seconds, double end_seconds) {
    const auto words = tokenize(text);
    std::vector<TimelineEntry> entries;
    entries.reserve(words.size());
    const double step = words.empty() ? 0.0 : (end_seconds - start_seconds) / static_cast<double>(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        entries.push_back({start_seconds + (static_cast<double>(i) + 0.5) * step, words[i]});
    }
    return ScriptedTimeline(std::move(entries));
}

ScriptedTimeline ScriptedTimeline::from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::invalid_argument, "timeline must be an array of [midpoint, word]");
    std::vector<TimelineEntry> entries;
    for (const auto& item : j) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_string()) {
            throw Error(ErrorCode::invalid_argument, "timeline entry must be [midpoint, word]");
        }
        entries.push_back({item[0].get<double>(), item[1].get<std::string>()});
    }
    return ScriptedTimeline(std::move(entries));
}

json ScriptedTimeline::to_json() const {
    json out = json::array();
    for (const auto& e : entries_) out.push_back(json::array({e.midpoint_seconds, e.word}));
    return out;
}

std::string ScriptedTimeline::text() const {
    std::string out;
    for (const auto& e : entries_) {
        if (!out.empty()) out += ' ';
        out += e.word;
    }
    return out;
}

Transcription scripted_transcribe(const ScriptedTimeline& timeline, double start_seconds, double end_seconds) {
    Transcription trx;
    const auto& entries = timeline.entries();
    auto it = std::lower_bound(entries.begin(), entries.end(), start_seconds,
                               [](const TimelineEntry& e, double t) { return e.midpoint_seconds < t; });
    // One segment per word, bounded halfway to its neighbours and clipped to
    // the window; times are relative to the window start like a real model's.
    for (; it != entries.end() && it->midpoint_seconds < end_seconds; ++it) {
        if (!trx.text.empty()) trx.text += ' ';
        trx.text += it->word;
        const double lo = it == entries.begin() ? start_seconds : (std::prev(it)->midpoint_seconds + it->midpoint_seconds) / 2;
        const double hi =
            std::next(it) == entries.end() ? end_seconds : (it->midpoint_seconds + std::next(it)->midpoint_seconds) / 2;
        trx.segments.push_back({std::max(lo, start_seconds) - start_seconds, std::min(hi, end_seconds) - start_seconds,
                                it->word});
    }
    return trx;
}

ScriptedTranscriber::ScriptedTranscriber(ScriptedTimeline timeline, double seconds_per_audio_second)
    : timeline_(std::move(timeline)), seconds_per_audio_second_(seconds_per_audio_second) {}

Transcription ScriptedTranscriber::transcribe(const RegisterSnapshot& snapshot) {
    ++calls_;
    const auto started = std::chrono::steady_clock::now();
    if (seconds_per_audio_second_ > 0.0) {
        std::this_thread::sleep_for(
            std::chrono::duration<double>(seconds_per_audio_second_ * snapshot.duration_seconds()));
    }
    auto trx = snapshot.empty() ? Transcription{}
                                : scripted_transcribe(timeline_, snapshot.start_seconds, snapshot.end_seconds);
    trx.model_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return trx;
}

// ---------------------------------------------------------------------------

std::string TranscribeRequest::to_line() const {
    json j;
    j["id"] = id;
    j["sample_rate"] = sample_rate;
    j["audio"] = base64_encode(audio_pcm16le);
    if (language) j["language"] = *language;
    j["vad_enabled"] = vad_enabled;
    j["backend_options"] = backend_options.is_null() ? json::object() : backend_options;
    return j.dump() + "\n";
}

TranscribeRequest TranscribeRequest::from_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::backend_protocol, "request is not a JSON object");
    try {
        TranscribeRequest r;
        r.id = j.at("id").get<std::int64_t>();
        r.sample_rate = j.at("sample_rate").get<int>();
        r.audio_pcm16le = base64_decode(j.at("audio").get<std::string>());
        if (j.contains("language") && !j["language"].is_null()) r.language = j["language"].get<std::string>();
        r.vad_enabled = j.value("vad_enabled", true);
        r.backend_options = j.value("backend_options", json::object());
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::backend_protocol, std::string("bad request line: ") + e.what());
    }
}

Transcription parse_response_line(const std::string& line, std::int64_t expected_id) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::backend_protocol, "backend response is not a JSON object: " + line.substr(0, 200));
    }
    if (!j.contains("id") || !j["id"].is_number_integer()) {
        throw Error(ErrorCode::backend_protocol, "backend response lacks an integer id");
    }
    const auto id = j["id"].get<std::int64_t>();
    if (id != expected_id) {
        throw Error(ErrorCode::backend_protocol,
                    "backend response id " + std::to_string(id) + " does not match request " +
                        std::to_string(expected_id));
    }
    if (j.contains("error")) {
        throw Error(ErrorCode::backend, j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump());
    }
    if (!j.contains("text") || !j["text"].is_string()) {
        throw Error(ErrorCode::backend_protocol, "backend response lacks a text field");
    }
    Transcription trx;
    trx.text = j["text"].get<std::string>();
    try {
        if (j.contains("segments") && j["segments"].is_array()) {
            for (const auto& s : j["segments"]) {
                trx.segments.push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<std::string>()});
            }
        }
        if (j.contains("model_time") && j["model_time"].is_number()) trx.model_time_seconds = j["model_time"].get<double>();
        if (j.contains("vad_time") && j["vad_time"].is_number()) trx.vad_time_seconds = j["vad_time"].get<double>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::backend_protocol, std::string("bad segment in backend response: ") + e.what());
    }
    return trx;
}

BackendCommand BackendCommand::parse(const std::string& command_line) {
    return BackendCommand{tokenize(command_line)};
}

namespace {

void ignore_sigpipe_once() {
    static const bool done = [] {
        struct sigaction sa {};
        sa.sa_handler = SIG_IGN;
        sigemptyset(&sa.sa_mask);
        sigaction(SIGPIPE, &sa, nullptr);
        return true;
    }();
    (void)done;
}

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

}  // namespace

BackendClient::BackendClient(int pid, int to_child, int from_child)
    : pid_(pid), to_child_(to_child), from_child_(from_child) {}

std::unique_ptr<BackendClient> BackendClient::launch(const BackendCommand& command,
                                                     std::chrono::milliseconds handshake_timeout) {
    if (command.argv.empty()) throw Error(ErrorCode::backend, "empty backend command");
    ignore_sigpipe_once();

    int in_pipe[2], out_pipe[2], exec_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::backend, "pipe failed");
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw Error(ErrorCode::backend, "pipe failed");
    }
    if (::pipe2(exec_pipe, O_CLOEXEC) != 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
        throw Error(ErrorCode::backend, "pipe failed");
    }

    std::vector<char*> argv;
    for (const auto& a : command.argv) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], exec_pipe[0], exec_pipe[1]}) ::close(fd);
        throw Error(ErrorCode::backend, "fork failed");
    }
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::execvp(argv[0], argv.data());
        const int err = errno;
        [[maybe_unused]] auto n = ::write(exec_pipe[1], &err, sizeof err);
        ::_exit(127);
    }

    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(exec_pipe[1]);
    std::unique_ptr<BackendClient> client(new BackendClient(pid, in_pipe[1], out_pipe[0]));

    int exec_errno = 0;
    const auto got = ::read(exec_pipe[0], &exec_errno, sizeof exec_errno);
    ::close(exec_pipe[0]);
    if (got == static_cast<ssize_t>(sizeof exec_errno)) {
        throw Error(ErrorCode::backend,
                    "cannot execute backend '" + command.argv[0] + "': " + std::strerror(exec_errno));
    }

    const auto line = client->read_line(handshake_timeout);
    if (!line) throw Error(ErrorCode::backend, "backend did not complete the handshake");
    const json hello = json::parse(*line, nullptr, false);
    if (hello.is_discarded() || !hello.is_object() || hello.value("ready", false) != true) {
        throw Error(ErrorCode::backend, "malformed backend handshake: " + line->substr(0, 200));
    }
    client->backend_name_ = hello.value("backend", std::string("unknown"));
    return client;
}

BackendClient::~BackendClient() {
    close_fd(to_child_);
    if (pid_ > 0) {
        int status = 0;
        // Closing stdin asks a well-behaved backend to exit; escalate if it does not.
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
        }
    }
    close_fd(from_child_);
}

bool BackendClient::alive() {
    if (pid_ <= 0) return false;
    int status = 0;
    const auto r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
        pid_ = -1;
        return false;
    }
    return true;
}

std::optional<std::string> BackendClient::read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) return std::nullopt;
        pollfd pfd{from_child_, POLLIN, 0};
        const int r = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (r < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorCode::backend_crashed, "poll on backend stdout failed");
        }
        if (r == 0) return std::nullopt;
        char chunk[65536];
        const auto n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw Error(ErrorCode::backend_crashed, "read from backend failed");
        }
        if (n == 0) throw Error(ErrorCode::backend_crashed, "backend closed its output stream");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

void BackendClient::write_all(const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = ::write(to_child_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorCode::backend_crashed, std::string("write to backend failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

Transcription BackendClient::transcribe(const TranscribeRequest& request, std::chrono::milliseconds timeout) {
    std::lock_guard lock(mutex_);
    if (to_child_ < 0 || !alive()) throw Error(ErrorCode::backend_crashed, "backend process is not running");
    write_all(request.to_line());
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        const auto line = read_line(std::max(remaining, std::chrono::milliseconds(0)));
        if (!line) {
            desynced_ = true;
            throw Error(ErrorCode::backend_timeout,
                        "backend did not answer request " + std::to_string(request.id) + " in time");
        }
        if (desynced_) {
            // Discard late answers to requests that already timed out.
            const json j = json::parse(*line, nullptr, false);
            if (j.is_object() && j.contains("id") && j["id"].is_number_integer() &&
                j["id"].get<std::int64_t>() < request.id) {
                continue;
            }
            desynced_ = false;
        }
        return parse_response_line(*line, request.id);
    }
}

Transcription external_transcribe(BackendClient& client, const TranscribeRequest& request,
                                  std::chrono::milliseconds timeout) {
    return client.transcribe(request, timeout);
}

ExternalTranscriber::ExternalTranscriber(std::unique_ptr<BackendClient> client, ExternalTranscriberOptions options)
    : client_(std::move(client)), options_(std::move(options)) {}

Transcription ExternalTranscriber::transcribe(const RegisterSnapshot& snapshot) {
    TranscribeRequest request;
    {
        std::lock_guard lock(options_mutex_);
        request.id = next_id_++;
        request.language = options_.language;
        request.vad_enabled = options_.vad_enabled;
        request.backend_options = options_.backend_options;
    }
    request.sample_rate = snapshot.sample_rate;
    request.audio_pcm16le = pcm16le_bytes(pcm16_from_floats(snapshot.samples));
    return client_->transcribe(request, options_.timeout);
}

void ExternalTranscriber::set_backend_options(const json& options) {
    std::lock_guard lock(options_mutex_);
    options_.backend_options = options;
}

std::string ExternalTranscriber::name() const { return "external:" + client_->backend_name(); }

}  // namespace streamscribe
